// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/grid.hpp"
#include "nrx/rng.hpp"

#include <cstddef>
#include <vector>

namespace nrx::link {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Tapped-delay-line Rayleigh fading with an exponential power-delay profile.
struct ChannelConfig {
  std::size_t num_taps = 6;
  double rms_delay_spread = 30e-9;  // s
  double ue_velocity = 0.0;         // m/s
  double carrier_freq = 3.5e9;      // Hz
  double subcarrier_spacing = 30e3; // Hz

  void validate() const;
  double doppler_hz() const noexcept { return ue_velocity * carrier_freq / kSpeedOfLight; }
  /// OFDM symbol period including cyclic prefix: 14 symbols per slot,
  /// slot length 1 ms * 15 kHz / subcarrier_spacing.
  double symbol_duration() const noexcept { return 1e-3 * 15e3 / subcarrier_spacing / 14.0; }
};

struct TapProfile {
  std::vector<double> delays;  // s
  std::vector<double> powers;  // sums to 1
};

/// Exponentially decaying taps on a uniform delay grid, with the grid
/// spacing chosen so the profile's RMS delay spread equals the target.
TapProfile exponential_profile(std::size_t num_taps, double rms_delay_spread);
double rms_delay_spread(const TapProfile& profile);

/// Frequency response h per (symbol, subcarrier, antenna), laid out like
/// ResourceGrid::h. Each tap and antenna fades independently; across OFDM
/// symbols a tap follows the Jakes autocorrelation J0(2 pi f_d dt).
std::vector<cd> generate_channel(const ChannelConfig& config, const GridSpec& grid, Philox& rng);

/// y = h x + n per RE and antenna with n ~ CN(0, noise_var). Stores h, n, y
/// on the grid.
void apply_channel(ResourceGrid& grid, std::vector<cd> h, double noise_var, Philox& rng);

/// Noise variance for unit-energy symbols:
///   1 / (code_rate * bits_per_symbol * 10^(ebno_db / 10)).
double ebno_to_noise_var(double ebno_db, std::size_t bits_per_symbol, double code_rate);

}  // namespace nrx::link
