// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/tensor.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

namespace nrx {
namespace {

TEST(Tensor, RejectsInconsistentShape) {
  EXPECT_THROW(Tensor({2, 0, 3}), std::invalid_argument);
  EXPECT_THROW(Tensor({2, 3}, std::vector<float>(5)), std::invalid_argument);
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.offset({1, 2, 3}), 23u);
  EXPECT_THROW(t.offset({2, 0, 0}), std::out_of_range);
}

TEST(Conv2d, OneByOneScalesInput) {
  const ConvSpec spec{1, 1, 1, 1};
  const Tensor x({1, 1, 1}, 2.5f);
  const Tensor k({1, 1, 1, 1}, -3.0f);
  const Tensor y = conv2d(x, k, Tensor({1}), spec);
  EXPECT_FLOAT_EQ(y[0], -7.5f);
}

TEST(Conv2d, CenteredDeltaKernelIsIdentity) {
  Philox rng(1);
  const Tensor x = oracle::random_tensor({6, 5, 1}, rng);
  Tensor k({3, 3, 1, 1});
  k.at({1, 1, 0, 0}) = 1.0f;
  const Tensor y = conv2d(x, k, Tensor({1}), ConvSpec{1, 1});
  EXPECT_EQ(y, x);
}

TEST(Conv2d, MatchesDirectOracle) {
  Philox rng(2);
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const ConvSpec spec{2, 4, 3, 3, 1 + trial % 2, 1 + trial % 3};
    const Tensor x = oracle::random_tensor({5, 5, 2}, rng);
    const Tensor k = oracle::random_tensor(spec.kernel_shape(), rng);
    const Tensor b = oracle::random_tensor({4}, rng);
    const Tensor got = conv2d(x, k, b, spec);
    const Tensor want = oracle::conv2d(x, k, b, spec);
    ASSERT_EQ(got.shape(), want.shape());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-5) << "trial " << trial;
  }
}

TEST(Conv2d, EvenKernelAndWideGrid) {
  Philox rng(3);
  const ConvSpec spec{3, 2, 2, 4, 1, 2};
  const Tensor x = oracle::random_tensor({4, 9, 3}, rng);
  const Tensor k = oracle::random_tensor(spec.kernel_shape(), rng);
  const Tensor b = oracle::random_tensor({2}, rng);
  const Tensor got = conv2d(x, k, b, spec);
  const Tensor want = oracle::conv2d(x, k, b, spec);
  for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-5);
}

TEST(Conv2d, ShapeErrorsNameTheAxis) {
  const ConvSpec spec{2, 3};
  const Tensor x({4, 4, 5});
  try {
    conv2d(x, Tensor(spec.kernel_shape()), Tensor({3}), spec);
    FAIL() << "expected a shape error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("channel"), std::string::npos) << e.what();
  }
  EXPECT_THROW(conv2d(Tensor({4, 4, 2}), Tensor({3, 3, 2, 4}), Tensor({3}), spec), std::invalid_argument);
  EXPECT_THROW(conv2d(Tensor({4, 4, 2}), Tensor(spec.kernel_shape()), Tensor({2}), spec), std::invalid_argument);
  EXPECT_THROW((ConvSpec{1, 1, 0, 3}.validate()), std::invalid_argument);
}

TEST(Conv2d, Deterministic) {
  Philox rng(4);
  const ConvSpec spec{3, 5};
  const Tensor x = oracle::random_tensor({7, 6, 3}, rng);
  const Tensor k = oracle::random_tensor(spec.kernel_shape(), rng);
  const Tensor b = oracle::random_tensor({5}, rng);
  EXPECT_EQ(conv2d(x, k, b, spec), conv2d(x, k, b, spec));
}

TEST(LayerNorm, ConstantInputGivesZero) {
  const Tensor y = layer_norm(Tensor({2, 2, 4}, 3.0f), Tensor({4}, 1.0f), Tensor({4}, 0.0f));
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(LayerNorm, ZeroGammaGivesBeta) {
  Philox rng(5);
  const Tensor x = oracle::random_tensor({3, 2, 4}, rng);
  const Tensor beta({4}, std::vector<float>{0.5f, -1.0f, 2.0f, 0.0f});
  const Tensor y = layer_norm(x, Tensor({4}, 0.0f), beta);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], beta[i % 4]);
}

TEST(LayerNorm, MatchesOracleAndMoments) {
  Philox rng(6);
  const Tensor x = oracle::random_tensor({4, 3, 8}, rng, 3.0);
  const Tensor gamma = oracle::random_tensor({8}, rng);
  const Tensor beta = oracle::random_tensor({8}, rng);
  const Tensor y = layer_norm(x, gamma, beta);
  const Tensor want = oracle::layer_norm(x, gamma, beta, kLayerNormEps);
  for (std::size_t i = 0; i < y.size(); ++i) ASSERT_NEAR(y[i], want[i], 1e-5);

  const Tensor unit = layer_norm(x, Tensor({8}, 1.0f), Tensor({8}, 0.0f));
  for (std::size_t p = 0; p < 12; ++p) {
    double m = 0, v = 0;
    for (std::size_t c = 0; c < 8; ++c) m += unit[p * 8 + c];
    m /= 8;
    for (std::size_t c = 0; c < 8; ++c) v += (unit[p * 8 + c] - m) * (unit[p * 8 + c] - m);
    v /= 8;
    EXPECT_NEAR(m, 0.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-3);
  }
}

TEST(LayerNorm, InverseRecoversInput) {
  Philox rng(7);
  const Tensor x = oracle::random_tensor({3, 3, 6}, rng, 2.0);
  Tensor gamma = oracle::random_tensor({6}, rng);
  for (float& g : gamma.data()) g = g >= 0 ? g + 0.5f : g - 0.5f;
  const Tensor beta = oracle::random_tensor({6}, rng);
  const Tensor y = layer_norm(x, gamma, beta);
  for (std::size_t p = 0; p < 9; ++p) {
    double m = 0, v = 0;
    for (std::size_t c = 0; c < 6; ++c) m += x[p * 6 + c];
    m /= 6;
    for (std::size_t c = 0; c < 6; ++c) v += (x[p * 6 + c] - m) * (x[p * 6 + c] - m);
    v /= 6;
    for (std::size_t c = 0; c < 6; ++c) {
      const double back = (y[p * 6 + c] - beta[c]) * std::sqrt(v + kLayerNormEps) / gamma[c] + m;
      EXPECT_NEAR(back, x[p * 6 + c], 1e-4);
    }
  }
}

TEST(LayerNorm, ChannelMismatchThrows) {
  EXPECT_THROW(layer_norm(Tensor({2, 2, 4}), Tensor({3}), Tensor({4})), std::invalid_argument);
  EXPECT_THROW(layer_norm(Tensor({2, 2, 4}), Tensor({4}), Tensor({4}), 0.0f), std::invalid_argument);
}

TEST(Relu, ElementwiseAndIdempotent) {
  const Tensor y = relu(Tensor({3}, std::vector<float>{-1.0f, 0.0f, 2.0f}));
  EXPECT_EQ(y.storage(), (std::vector<float>{0.0f, 0.0f, 2.0f}));
  EXPECT_EQ(relu(Tensor({5}, -2.0f)), Tensor({5}, 0.0f));
  Philox rng(8);
  const Tensor x = oracle::random_tensor({4, 4, 3}, rng);
  EXPECT_EQ(relu(relu(x)), relu(x));
}

TEST(Add, ShapeMismatchThrows) {
  EXPECT_THROW(add(Tensor({2, 2}), Tensor({2, 3})), std::invalid_argument);
  EXPECT_EQ(add(Tensor({2}, 1.0f), Tensor({2}, 2.0f)), Tensor({2}, 3.0f));
}

TEST(ForwardOps, FiniteOnFiniteInput) {
  Philox rng(9);
  const ConvSpec spec{4, 4};
  const Tensor x = oracle::random_tensor({14, 27, 4}, rng, 100.0);
  const Tensor y = relu(layer_norm(conv2d(x, oracle::random_tensor(spec.kernel_shape(), rng), Tensor({4}), spec),
                                   Tensor({4}, 1.0f), Tensor({4}, 0.0f)));
  EXPECT_TRUE(y.all_finite());
}

}  // namespace
}  // namespace nrx
