// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/constellation.hpp"
#include "nrx/grid.hpp"
#include "nrx/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace nrx::classical {

using link::cd;

/// Least-squares channel estimates at the pilot REs.
struct PilotEstimates {
  std::vector<std::size_t> positions;  // RE indices, ascending
  std::vector<cd> h_hat;               // positions.size() * num_rx
  std::size_t num_rx = 0;
  /// Per-antenna estimation error variance for unit-magnitude pilots, given
  /// the noise variance n: n / |x_p|^2 (averaged over pilots).
  double error_gain = 0.0;
};

/// h_hat = y / x_p per antenna at every pilot RE. Throws on a zero pilot.
PilotEstimates ls_estimate(const link::ResourceGrid& grid);

/// For each RE, the index of the nearest pilot RE in (symbol, subcarrier)
/// index space under Euclidean distance. Ties go to the smaller symbol
/// index, then to the smaller subcarrier index.
std::vector<std::size_t> nearest_pilot_map(std::span<const std::uint8_t> pilot_mask,
                                           std::size_t num_symbols, std::size_t num_subcarriers);

/// Full-grid estimate (layout of ResourceGrid::h) by nearest-neighbor
/// interpolation of the pilot estimates.
std::vector<cd> nn_interpolate(const PilotEstimates& estimates, const link::GridSpec& spec);

/// SIMO LMMSE combining of one RE.
///
/// Bias convention: `x_hat` is the LMMSE output h^H y / (|h|^2 + n), which
/// equals gain * x + w with gain = |h|^2 / (|h|^2 + n) and
/// var(w) = noise_var = n |h|^2 / (|h|^2 + n)^2. The demapper works on the
/// unbiased pair (x_hat / gain, noise_var / gain^2) = (h^H y / |h|^2, n / |h|^2).
struct Equalized {
  cd x_hat{};
  double gain = 0.0;
  double noise_var = 0.0;
  bool erasure = false;  // no usable channel; demaps to LLR 0

  cd unbiased() const noexcept { return gain > 0 ? x_hat / gain : cd{}; }
  double unbiased_noise_var() const noexcept { return gain > 0 ? noise_var / (gain * gain) : 0.0; }
};

Equalized lmmse_equalize(std::span<const cd> y, std::span<const cd> h_hat, double noise_var);

/// Max-log LLRs, positive favoring bit 1:
///   LLR_k = (min_{s: b_k = 0} |x - s|^2 - min_{s: b_k = 1} |x - s|^2) / noise_var.
void soft_demap(cd x, double noise_var, const link::Constellation& constellation,
                std::span<double> llr_out);
std::vector<double> soft_demap(cd x, double noise_var, const link::Constellation& constellation);

enum class CsiMode { ls_estimate, perfect };

/// LLR grid [num_symbols, num_subcarriers, bits_per_symbol]; pilot REs and
/// erasures hold 0. In LS mode the LMMSE noise term adds the LS estimation
/// error variance to the thermal noise.
Tensor receive_classical(const link::ResourceGrid& grid, CsiMode mode, double noise_var,
                         const link::Constellation& constellation);

/// Data-RE LLRs in transmission order (matches ResourceGrid::bits).
std::vector<double> data_llrs(const Tensor& llr_grid, const link::GridSpec& spec);

}  // namespace nrx::classical
