// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/channel.hpp"
#include "nrx/classical.hpp"
#include "nrx/link.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace nrx::classical {
namespace {

using link::cd;

link::ResourceGrid noisy_grid(double noise_var, std::uint64_t seed, double velocity = 0.0) {
  const auto setup = link::LinkSetup::standard();
  Philox rng(seed);
  std::vector<std::uint8_t> bits(648);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.bit());
  auto g = link::build_transmit_grid(setup.grid, setup.constellation, bits);
  link::ChannelConfig cfg;
  cfg.ue_velocity = velocity;
  link::apply_channel(g, link::generate_channel(cfg, g.spec, rng), noise_var, rng);
  return g;
}

TEST(LsEstimate, NoiselessRecoversChannel) {
  const auto g = noisy_grid(0.0, 90, 30.0);
  const auto est = ls_estimate(g);
  ASSERT_EQ(est.positions.size(), 2u * 27u);
  for (std::size_t p = 0; p < est.positions.size(); ++p)
    for (std::size_t a = 0; a < 2; ++a) {
      EXPECT_NEAR(std::abs(est.h_hat[p * 2 + a] - g.h[g.ant(est.positions[p], a)]), 0.0, 1e-12);
    }
}

TEST(LsEstimate, UnitPilotReturnsReceived) {
  auto g = noisy_grid(0.1, 91);
  for (std::size_t re = 0; re < g.spec.num_res(); ++re) {
    if (g.pilot_mask[re]) g.x[re] = cd(1.0, 0.0);
  }
  const auto est = ls_estimate(g);
  for (std::size_t p = 0; p < est.positions.size(); ++p)
    for (std::size_t a = 0; a < 2; ++a) EXPECT_EQ(est.h_hat[p * 2 + a], g.y[g.ant(est.positions[p], a)]);
  g.x[est.positions[0]] = cd{};
  EXPECT_THROW(ls_estimate(g), std::invalid_argument);
}

TEST(LsEstimate, ErrorVarianceEqualsNoiseVariance) {
  const double nv = 0.2;
  double acc = 0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; count < 10000; ++s) {
    const auto g = noisy_grid(nv, 1000 + s);
    const auto est = ls_estimate(g);
    for (std::size_t p = 0; p < est.positions.size(); ++p)
      for (std::size_t a = 0; a < 2; ++a, ++count) {
        acc += std::norm(est.h_hat[p * 2 + a] - g.h[g.ant(est.positions[p], a)]);
      }
  }
  EXPECT_NEAR(acc / static_cast<double>(count), nv, 0.1 * nv);
}

TEST(NnInterpolate, MatchesExhaustiveOracleOnRandomLayouts) {
  Philox rng(92);
  for (int t = 0; t < 200; ++t) {
    const std::size_t ns = 1 + rng.below(14), nsc = 1 + rng.below(30);
    std::vector<std::uint8_t> mask(ns * nsc);
    const double density = rng.uniform(0.01, 0.3);
    for (auto& m : mask) m = rng.uniform() < density;
    mask[rng.below(mask.size())] = 1;
    ASSERT_EQ(nearest_pilot_map(mask, ns, nsc), oracle::nearest_pilot(mask, ns, nsc)) << "trial " << t;
  }
}

TEST(NnInterpolate, TieBreaksTowardSmallerIndices) {
  // Pilots at (0,0), (0,4) and (4,0); RE (2,2) sits at d^2 = 8 from all three.
  std::vector<std::uint8_t> mask(5 * 5);
  mask[0] = mask[4] = mask[20] = 1;
  const auto m = nearest_pilot_map(mask, 5, 5);
  EXPECT_EQ(m[2 * 5 + 2], 0u);
  EXPECT_EQ(m[0 * 5 + 2], 0u);  // (0,2): between (0,0) and (0,4)
  EXPECT_EQ(m[2 * 5 + 0], 0u);  // (2,0): between (0,0) and (4,0)
  EXPECT_THROW(nearest_pilot_map(std::vector<std::uint8_t>(25), 5, 5), std::invalid_argument);
}

TEST(NnInterpolate, SinglePilotAndOwnPosition) {
  link::GridSpec spec;
  spec.num_symbols = 4;
  spec.num_subcarriers = 5;
  spec.pilot_symbols = {1};
  spec.num_rx = 1;
  PilotEstimates one{{spec.index(1, 3)}, {cd(0.5, -0.25)}, 1, 0.0};
  for (const cd& h : nn_interpolate(one, spec)) EXPECT_EQ(h, cd(0.5, -0.25));

  const auto g = noisy_grid(0.05, 93, 20.0);
  const auto est = ls_estimate(g);
  const auto full = nn_interpolate(est, g.spec);
  for (std::size_t p = 0; p < est.positions.size(); ++p)
    for (std::size_t a = 0; a < 2; ++a) EXPECT_EQ(full[est.positions[p] * 2 + a], est.h_hat[p * 2 + a]);
}

TEST(Lmmse, MatchesNormalEquationSolve) {
  Philox rng(94);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t nr = 1 + rng.below(4);
    std::vector<cd> y(nr), h(nr);
    for (std::size_t a = 0; a < nr; ++a) {
      y[a] = rng.complex_normal(2.0);
      h[a] = rng.complex_normal(1.0);
    }
    const double nv = rng.uniform(0.01, 2.0);
    const auto eq = lmmse_equalize(y, h, nv);
    const cd want = oracle::mmse_solve(y, h, nv);
    ASSERT_LE(std::abs(eq.x_hat - want), 1e-10);
  }
}

TEST(Lmmse, ClosedFormCases) {
  const std::vector<cd> h{cd(1.0, 0.0)};
  const auto half = lmmse_equalize(std::vector<cd>{cd(0.8, -0.4)}, h, 1.0);
  EXPECT_NEAR(std::abs(half.x_hat - cd(0.4, -0.2)), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(half.gain, 0.5);
  EXPECT_DOUBLE_EQ(half.noise_var, 0.25);
  EXPECT_DOUBLE_EQ(half.unbiased_noise_var(), 1.0);

  const std::vector<cd> h2{cd(0.3, 0.7), cd(-1.1, 0.2)};
  const cd x(0.7071, -0.7071);
  const std::vector<cd> y2{h2[0] * x, h2[1] * x};
  const auto zf = lmmse_equalize(y2, h2, 1e-14);
  EXPECT_NEAR(std::abs(zf.unbiased() - x), 0.0, 1e-6);

  const auto erased = lmmse_equalize(std::vector<cd>{cd(1, 1)}, std::vector<cd>{cd{}}, 0.0);
  EXPECT_TRUE(erased.erasure);
  EXPECT_THROW(lmmse_equalize(std::vector<cd>(2), std::vector<cd>(1), 1.0), std::invalid_argument);
}

TEST(SoftDemap, QpskSignsAndSymmetry) {
  const auto q = link::Constellation::qam(2);
  for (std::size_t l = 0; l < 4; ++l) {
    const auto llr = soft_demap(q.point(l), 1e-3, q);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_EQ(llr[k] > 0, q.bit(l, k) == 1);
      EXPECT_GT(std::abs(llr[k]), 100.0);
    }
  }
  for (double v : soft_demap(cd{}, 0.5, q)) EXPECT_EQ(v, 0.0);
}

TEST(SoftDemap, MaxLogAgreesWithExactSignAboveMargin) {
  Philox rng(95);
  for (std::size_t bps : {2u, 4u, 6u}) {
    const auto c = link::Constellation::qam(bps);
    std::size_t checked = 0;
    for (int t = 0; t < 5000; ++t) {
      const cd x = rng.complex_normal(1.5);
      const double nv = rng.uniform(0.01, 1.0);
      const auto approx = soft_demap(x, nv, c);
      const auto exact = oracle::exact_llr(x, nv, c);
      for (std::size_t k = 0; k < bps; ++k) {
        if (std::abs(exact[k]) <= 0.5) continue;
        ++checked;
        ASSERT_EQ(approx[k] > 0, exact[k] > 0) << bps << " bits, trial " << t;
      }
      // QPSK max-log is exact up to the 1/nv scaling convention.
      if (bps == 2) {
        for (std::size_t k = 0; k < 2; ++k) ASSERT_NEAR(approx[k], exact[k], 1e-9 * std::max(1.0, std::abs(exact[k])));
      }
    }
    EXPECT_GT(checked, 1000u);
  }
}

TEST(ReceiveClassical, PerfectCsiNoiselessRecoversBits) {
  const auto g = noisy_grid(0.0, 96, 40.0);
  const auto setup = link::LinkSetup::standard();
  const auto llr = data_llrs(receive_classical(g, CsiMode::perfect, 1e-9, setup.constellation), g.spec);
  ASSERT_EQ(llr.size(), 648u);
  for (std::size_t i = 0; i < 648; ++i) ASSERT_EQ(llr[i] > 0, g.bits[i] == 1) << i;
}

TEST(ReceiveClassical, PerfectCsiBeatsLsOnUncodedBer) {
  const auto setup = link::LinkSetup::standard();
  link::Scenario sc;
  sc.ebno_lo = sc.ebno_hi = 4.0;
  sc.velocity_lo = 10;
  sc.velocity_hi = 40;
  Philox rng(97);
  std::size_t err_p = 0, err_ls = 0;
  for (int b = 0; b < 1000; ++b) {
    const auto blk = link::simulate_block(setup, sc, rng);
    const auto lp = data_llrs(receive_classical(blk.grid, CsiMode::perfect, blk.noise_var, setup.constellation), blk.grid.spec);
    const auto ll = data_llrs(receive_classical(blk.grid, CsiMode::ls_estimate, blk.noise_var, setup.constellation), blk.grid.spec);
    for (std::size_t i = 0; i < 648; ++i) {
      err_p += (lp[i] > 0) != (blk.grid.bits[i] == 1);
      err_ls += (ll[i] > 0) != (blk.grid.bits[i] == 1);
    }
  }
  RecordProperty("ber_perfect", std::to_string(err_p / 648000.0));
  RecordProperty("ber_ls", std::to_string(err_ls / 648000.0));
  EXPECT_LT(err_p, err_ls);
}

TEST(ReceiveClassical, QpskAwgnMatchesTheory) {
  // Flat h = 1, perfect CSI, rate-1 Eb/N0 of 4.3 dB puts the BER near 1e-2.
  const auto setup = link::LinkSetup::standard();
  const double ebno_db = 4.3;
  const double nv = link::ebno_to_noise_var(ebno_db, 2, 1.0);
  Philox rng(98);
  link::GridSpec spec = setup.grid;
  spec.num_rx = 1;
  std::size_t errors = 0, bits = 0;
  while (bits < 200000) {
    std::vector<std::uint8_t> cw(648);
    for (auto& b : cw) b = static_cast<std::uint8_t>(rng.bit());
    auto g = link::build_transmit_grid(spec, setup.constellation, cw);
    link::apply_channel(g, std::vector<cd>(spec.num_res(), cd(1, 0)), nv, rng);
    const auto llr = data_llrs(receive_classical(g, CsiMode::perfect, nv, setup.constellation), spec);
    for (std::size_t i = 0; i < 648; ++i) errors += (llr[i] > 0) != (cw[i] == 1);
    bits += 648;
  }
  const double ber = static_cast<double>(errors) / static_cast<double>(bits);
  const double theory = oracle::q_function(std::sqrt(2.0 * std::pow(10.0, ebno_db / 10.0)));
  EXPECT_NEAR(ber, theory, 0.15 * theory);
}

}  // namespace
}  // namespace nrx::classical
