// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/channel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nrx::link {

void ChannelConfig::validate() const {
  if (num_taps == 0) throw std::invalid_argument("ChannelConfig: num_taps must be >= 1");
  if (rms_delay_spread < 0 || ue_velocity < 0 || carrier_freq < 0 || !(subcarrier_spacing > 0)) {
    throw std::invalid_argument("ChannelConfig: physical quantities must be non-negative");
  }
}

double rms_delay_spread(const TapProfile& p) {
  double mean = 0.0, second = 0.0, total = 0.0;
  for (std::size_t l = 0; l < p.delays.size(); ++l) {
    total += p.powers[l];
    mean += p.powers[l] * p.delays[l];
    second += p.powers[l] * p.delays[l] * p.delays[l];
  }
  mean /= total;
  second /= total;
  return std::sqrt(std::max(0.0, second - mean * mean));
}

TapProfile exponential_profile(std::size_t num_taps, double rms) {
  if (num_taps == 0) throw std::invalid_argument("exponential_profile: num_taps must be >= 1");
  TapProfile p;
  p.delays.assign(num_taps, 0.0);
  p.powers.assign(num_taps, 0.0);
  // Decay constant of a quarter of the profile length, in tap units.
  const double decay = std::max(1.0, static_cast<double>(num_taps - 1) / 4.0);
  double total = 0.0;
  for (std::size_t l = 0; l < num_taps; ++l) {
    p.powers[l] = std::exp(-static_cast<double>(l) / decay);
    p.delays[l] = static_cast<double>(l);
    total += p.powers[l];
  }
  for (double& w : p.powers) w /= total;
  const double unit_rms = rms_delay_spread(p);
  const double spacing = (num_taps > 1 && rms > 0.0) ? rms / unit_rms : 0.0;
  for (double& d : p.delays) d *= spacing;
  return p;
}

std::vector<cd> generate_channel(const ChannelConfig& config, const GridSpec& grid, Philox& rng) {
  config.validate();
  grid.validate();
  const std::size_t ns = grid.num_symbols;
  const std::size_t nsc = grid.num_subcarriers;
  const std::size_t nr = grid.num_rx;
  const TapProfile profile = exponential_profile(config.num_taps, config.rms_delay_spread);
  const std::size_t taps = profile.powers.size();

  // Square root of the temporal correlation matrix R[t, u] = J0(2 pi f_d |t - u| T).
  const double fd = config.doppler_hz();
  Eigen::MatrixXd root;
  if (fd > 0.0) {
    Eigen::MatrixXd r(ns, ns);
    for (std::size_t t = 0; t < ns; ++t) {
      for (std::size_t u = 0; u < ns; ++u) {
        const double dt = std::abs(static_cast<double>(t) - static_cast<double>(u)) *
                          config.symbol_duration();
        r(t, u) = std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * fd * dt);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
    const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    root = eig.eigenvectors() * lambda.asDiagonal();
  }

  // tap_gain[(t * taps + l) * nr + a]
  std::vector<cd> tap_gain(ns * taps * nr);
  for (std::size_t l = 0; l < taps; ++l) {
    const double amp = std::sqrt(profile.powers[l]);
    for (std::size_t a = 0; a < nr; ++a) {
      if (fd > 0.0) {
        std::vector<cd> z(ns);
        for (auto& v : z) v = rng.complex_normal(1.0);
        for (std::size_t t = 0; t < ns; ++t) {
          cd acc{};
          for (std::size_t u = 0; u < ns; ++u) acc += root(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(u)) * z[u];
          tap_gain[(t * taps + l) * nr + a] = amp * acc;
        }
      } else {
        const cd g = amp * rng.complex_normal(1.0);
        for (std::size_t t = 0; t < ns; ++t) tap_gain[(t * taps + l) * nr + a] = g;
      }
    }
  }

  std::vector<cd> phasor(nsc * taps);
  for (std::size_t j = 0; j < nsc; ++j) {
    const double f = static_cast<double>(j) * config.subcarrier_spacing;
    for (std::size_t l = 0; l < taps; ++l) {
      phasor[j * taps + l] = std::polar(1.0, -2.0 * std::numbers::pi * f * profile.delays[l]);
    }
  }
  std::vector<cd> h(grid.num_res() * nr);
  for (std::size_t t = 0; t < ns; ++t) {
    for (std::size_t j = 0; j < nsc; ++j) {
      for (std::size_t a = 0; a < nr; ++a) {
        cd acc{};
        for (std::size_t l = 0; l < taps; ++l) acc += tap_gain[(t * taps + l) * nr + a] * phasor[j * taps + l];
        h[grid.index(t, j) * nr + a] = acc;
      }
    }
  }
  return h;
}

void apply_channel(ResourceGrid& grid, std::vector<cd> h, double noise_var, Philox& rng) {
  if (noise_var < 0) throw std::invalid_argument("apply_channel: noise variance must be >= 0");
  const std::size_t nr = grid.spec.num_rx;
  if (h.size() != grid.x.size() * nr) {
    throw std::invalid_argument("apply_channel: channel has " + std::to_string(h.size()) +
                                " entries, grid needs " + std::to_string(grid.x.size() * nr));
  }
  grid.h = std::move(h);
  grid.n.assign(grid.h.size(), cd{});
  grid.y.assign(grid.h.size(), cd{});
  for (std::size_t re = 0; re < grid.x.size(); ++re) {
    for (std::size_t a = 0; a < nr; ++a) {
      const std::size_t k = re * nr + a;
      const cd hx = grid.h[k] * grid.x[re];
      const cd noise = noise_var > 0 ? rng.complex_normal(noise_var) : cd{};
      grid.y[k] = hx + noise;
      // Retained as y - h x so the bookkeeping identity is exact in floating point.
      grid.n[k] = grid.y[k] - hx;
    }
  }
}

double ebno_to_noise_var(double ebno_db, std::size_t bits_per_symbol, double code_rate) {
  if (bits_per_symbol == 0) throw std::invalid_argument("ebno_to_noise_var: bits_per_symbol must be >= 1");
  if (!(code_rate > 0.0) || code_rate > 1.0) throw std::invalid_argument("ebno_to_noise_var: rate must be in (0, 1]");
  return 1.0 / (code_rate * static_cast<double>(bits_per_symbol) * std::pow(10.0, ebno_db / 10.0));
}

}  // namespace nrx::link
