// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>

namespace nrx::classical {

PilotEstimates ls_estimate(const link::ResourceGrid& grid) {
  const std::size_t nr = grid.spec.num_rx;
  if (grid.y.size() != grid.x.size() * nr) throw std::invalid_argument("ls_estimate: grid has no received signal");
  PilotEstimates est;
  est.num_rx = nr;
  double inv_power = 0.0;
  for (std::size_t re = 0; re < grid.x.size(); ++re) {
    if (!grid.pilot_mask[re]) continue;
    const cd xp = grid.x[re];
    if (std::norm(xp) == 0.0) {
      throw std::invalid_argument("ls_estimate: zero pilot value at RE " + std::to_string(re));
    }
    est.positions.push_back(re);
    for (std::size_t a = 0; a < nr; ++a) est.h_hat.push_back(grid.y[grid.ant(re, a)] / xp);
    inv_power += 1.0 / std::norm(xp);
  }
  if (est.positions.empty()) throw std::invalid_argument("ls_estimate: grid has no pilots");
  est.error_gain = inv_power / static_cast<double>(est.positions.size());
  return est;
}

std::vector<std::size_t> nearest_pilot_map(std::span<const std::uint8_t> pilot_mask,
                                           std::size_t num_symbols, std::size_t num_subcarriers) {
  if (pilot_mask.size() != num_symbols * num_subcarriers) {
    throw std::invalid_argument("nearest_pilot_map: mask size does not match grid");
  }
  // Pilot subcarriers per symbol row, ascending.
  std::vector<std::vector<std::size_t>> rows(num_symbols);
  bool any = false;
  for (std::size_t i = 0; i < num_symbols; ++i) {
    for (std::size_t j = 0; j < num_subcarriers; ++j) {
      if (pilot_mask[i * num_subcarriers + j]) {
        rows[i].push_back(j);
        any = true;
      }
    }
  }
  if (!any) throw std::invalid_argument("nearest_pilot_map: no pilot REs");

  std::vector<std::size_t> assign(num_symbols * num_subcarriers);
  for (std::size_t i = 0; i < num_symbols; ++i) {
    for (std::size_t j = 0; j < num_subcarriers; ++j) {
      // (distance^2, symbol, subcarrier), compared lexicographically.
      std::tuple<std::size_t, std::size_t, std::size_t> best{std::numeric_limits<std::size_t>::max(), 0, 0};
      for (std::size_t pi = 0; pi < num_symbols; ++pi) {
        const auto& cols = rows[pi];
        if (cols.empty()) continue;
        const std::size_t di = pi > i ? pi - i : i - pi;
        if (di * di > std::get<0>(best)) continue;
        // Closest pilot column in this row, preferring the lower one on a tie.
        auto it = std::lower_bound(cols.begin(), cols.end(), j);
        std::size_t pj;
        if (it == cols.end()) {
          pj = cols.back();
        } else if (it == cols.begin() || *it == j) {
          pj = *it;
        } else {
          const std::size_t below = *(it - 1);
          pj = (j - below) <= (*it - j) ? below : *it;
        }
        const std::size_t dj = pj > j ? pj - j : j - pj;
        const auto cand = std::make_tuple(di * di + dj * dj, pi, pj);
        if (cand < best) best = cand;
      }
      assign[i * num_subcarriers + j] = std::get<1>(best) * num_subcarriers + std::get<2>(best);
    }
  }
  return assign;
}

std::vector<cd> nn_interpolate(const PilotEstimates& est, const link::GridSpec& spec) {
  const std::size_t nr = est.num_rx;
  if (nr != spec.num_rx) throw std::invalid_argument("nn_interpolate: antenna count mismatch");
  std::vector<std::uint8_t> mask(spec.num_res(), 0);
  std::vector<std::size_t> slot(spec.num_res(), 0);
  for (std::size_t p = 0; p < est.positions.size(); ++p) {
    mask.at(est.positions[p]) = 1;
    slot[est.positions[p]] = p;
  }
  const auto assign = nearest_pilot_map(mask, spec.num_symbols, spec.num_subcarriers);
  std::vector<cd> h(spec.num_res() * nr);
  for (std::size_t re = 0; re < spec.num_res(); ++re) {
    const std::size_t p = slot[assign[re]];
    for (std::size_t a = 0; a < nr; ++a) h[re * nr + a] = est.h_hat[p * nr + a];
  }
  return h;
}

Equalized lmmse_equalize(std::span<const cd> y, std::span<const cd> h_hat, double noise_var) {
  if (y.size() != h_hat.size()) throw std::invalid_argument("lmmse_equalize: antenna count mismatch");
  if (noise_var < 0) throw std::invalid_argument("lmmse_equalize: negative noise variance");
  double energy = 0.0;
  cd mf{};
  for (std::size_t a = 0; a < y.size(); ++a) {
    energy += std::norm(h_hat[a]);
    mf += std::conj(h_hat[a]) * y[a];
  }
  Equalized eq;
  if (!(energy > 0.0)) {
    eq.erasure = true;
    return eq;
  }
  const double denom = energy + noise_var;
  eq.x_hat = mf / denom;
  eq.gain = energy / denom;
  eq.noise_var = noise_var * energy / (denom * denom);
  return eq;
}

void soft_demap(cd x, double noise_var, const link::Constellation& c, std::span<double> llr_out) {
  const std::size_t bps = c.bits_per_symbol();
  if (llr_out.size() != bps) throw std::invalid_argument("soft_demap: output span has wrong size");
  const double nv = std::max(noise_var, 1e-12);
  constexpr double inf = std::numeric_limits<double>::infinity();
  double d0[8], d1[8];
  std::fill(d0, d0 + bps, inf);
  std::fill(d1, d1 + bps, inf);
  const auto pts = c.points();
  for (std::size_t label = 0; label < pts.size(); ++label) {
    const double d = std::norm(x - pts[label]);
    for (std::size_t k = 0; k < bps; ++k) {
      double& slot = c.bit(label, k) ? d1[k] : d0[k];
      slot = std::min(slot, d);
    }
  }
  for (std::size_t k = 0; k < bps; ++k) llr_out[k] = (d0[k] - d1[k]) / nv;
}

std::vector<double> soft_demap(cd x, double noise_var, const link::Constellation& c) {
  std::vector<double> out(c.bits_per_symbol());
  soft_demap(x, noise_var, c, out);
  return out;
}

Tensor receive_classical(const link::ResourceGrid& grid, CsiMode mode, double noise_var,
                         const link::Constellation& constellation) {
  const link::GridSpec& spec = grid.spec;
  const std::size_t nr = spec.num_rx;
  const std::size_t bps = constellation.bits_per_symbol();
  if (grid.y.size() != spec.num_res() * nr) throw std::invalid_argument("receive_classical: grid has no received signal");

  std::vector<cd> h_hat;
  double eq_noise = noise_var;
  if (mode == CsiMode::perfect) {
    h_hat = grid.h;
  } else {
    const PilotEstimates est = ls_estimate(grid);
    h_hat = nn_interpolate(est, spec);
    eq_noise = noise_var * (1.0 + est.error_gain);
  }

  Tensor llr({spec.num_symbols, spec.num_subcarriers, bps});
  std::vector<double> bits(bps);
  for (std::size_t re = 0; re < spec.num_res(); ++re) {
    if (grid.pilot_mask[re]) continue;
    const Equalized eq = lmmse_equalize(std::span<const cd>(grid.y).subspan(re * nr, nr),
                                        std::span<const cd>(h_hat).subspan(re * nr, nr), eq_noise);
    if (eq.erasure) continue;
    soft_demap(eq.unbiased(), eq.unbiased_noise_var(), constellation, bits);
    for (std::size_t k = 0; k < bps; ++k) llr[re * bps + k] = static_cast<float>(bits[k]);
  }
  return llr;
}

std::vector<double> data_llrs(const Tensor& llr_grid, const link::GridSpec& spec) {
  if (llr_grid.rank() != 3 || llr_grid.dim(0) != spec.num_symbols || llr_grid.dim(1) != spec.num_subcarriers) {
    throw std::invalid_argument("data_llrs: LLR grid shape " + shape_string(llr_grid.shape()) +
                                " does not match the slot layout");
  }
  const std::size_t bps = llr_grid.dim(2);
  std::vector<double> out;
  const auto positions = spec.data_positions();
  out.reserve(positions.size() * bps);
  for (std::size_t re : positions) {
    for (std::size_t k = 0; k < bps; ++k) out.push_back(llr_grid[re * bps + k]);
  }
  return out;
}

}  // namespace nrx::classical
