// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/channel.hpp"
#include "nrx/constellation.hpp"
#include "nrx/grid.hpp"
#include "nrx/ldpc.hpp"
#include "nrx/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nrx::link {

/// Directory holding the shipped data files: $NRX_DATA_DIR when set, else the
/// path baked in at build time.
std::string default_data_dir();
/// The shipped n = 648, rate-1/2 quasi-cyclic code.
LdpcCode default_ldpc_code();

enum class ChannelKind {
  tdl,   // tapped-delay-line Rayleigh fading with Doppler
  flat,  // h = 1 on every RE and antenna
};

/// Fixed parts of the link shared by every block.
struct LinkSetup {
  GridSpec grid;
  Constellation constellation;
  LdpcCode code;
  double carrier_freq = 3.5e9;
  double subcarrier_spacing = 30e3;

  LinkSetup(GridSpec grid, std::size_t bits_per_symbol, LdpcCode code);
  /// Default grid, QPSK, shipped code.
  static LinkSetup standard();

  /// Information bits per coded bit slot on the grid: k / (data REs * bps).
  double effective_rate() const noexcept;
  double noise_var(double ebno_db) const;
};

/// Ranges a block's channel and Eb/N0 are drawn from, uniformly.
struct Scenario {
  ChannelKind kind = ChannelKind::tdl;
  std::size_t num_taps = 6;
  double delay_spread_lo = 10e-9;
  double delay_spread_hi = 100e-9;
  double velocity_lo = 0.0;
  double velocity_hi = 50.0;
  double ebno_lo = -2.0;
  double ebno_hi = 15.0;

  void validate() const;
};

struct Block {
  ResourceGrid grid;
  std::vector<std::uint8_t> message;
  ChannelConfig channel;
  double ebno_db = 0.0;
  double noise_var = 0.0;
};

/// Encodes a random message and passes it through a channel drawn from
/// `channel` (ignored for ChannelKind::flat).
Block simulate_block(const LinkSetup& setup, ChannelKind kind, const ChannelConfig& channel,
                     double ebno_db, Philox& rng);

/// Draws channel parameters and Eb/N0 from the scenario, then simulates.
Block simulate_block(const LinkSetup& setup, const Scenario& scenario, Philox& rng);

}  // namespace nrx::link
