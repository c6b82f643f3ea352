// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

// Randomized quantizer property checks shared by the unit and acceptance suites.

#pragma once

#include "nrx/quantization.hpp"
#include "nrx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace nrx::props {

struct Tally {
  std::size_t cases = 0;
  std::size_t violations = 0;
  std::string first;

  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
};

/// Random kernel [kh, kw, cin, cout] with per-channel magnitudes spread over
/// three decades, occasional exact zeros and an occasional all-zero channel.
inline Tensor random_kernel(Philox& rng) {
  const std::size_t kh = 1 + rng.below(3), kw = 1 + rng.below(3);
  const std::size_t cin = 1 + rng.below(4), cout = 1 + rng.below(6);
  Tensor w({kh, kw, cin, cout});
  std::vector<double> ch_scale(cout);
  for (auto& s : ch_scale) s = std::pow(10.0, rng.uniform(-2.0, 1.0));
  const bool zero_channel = rng.below(10) == 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t c = i % cout;
    if ((zero_channel && c == 0) || rng.below(20) == 0) continue;
    w[i] = static_cast<float>(ch_scale[c] * rng.normal());
  }
  return w;
}

inline quant::QuantConfig random_config(Philox& rng) {
  static const int kBits[] = {2, 3, 4, 8, 12, 16};
  quant::QuantConfig c;
  c.bit_width = kBits[rng.below(6)];
  c.signedness = rng.below(4) == 0 ? quant::Signedness::unsigned_int : quant::Signedness::signed_int;
  c.granularity = rng.bit() ? quant::Granularity::per_channel : quant::Granularity::per_tensor;
  c.scale_mode = rng.bit() ? quant::ScaleMode::max_abs : quant::ScaleMode::magnitude_span;
  return c;
}

/// Every integer lies in the signedness range of its config.
inline void range_invariant(std::size_t n, std::uint64_t seed, Tally& t) {
  Philox rng(seed);
  for (std::size_t k = 0; k < n; ++k, ++t.cases) {
    const Tensor w = random_kernel(rng);
    const auto cfg = random_config(rng);
    const auto q = quant::quantize(w, cfg);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto v = q.value(i);
      if (v < cfg.min_value() || v > cfg.max_value()) {
        t.fail("case " + std::to_string(k) + ": value " + std::to_string(v) + " outside range");
        break;
      }
    }
    for (float s : q.scales) {
      if (!(s > 0.0f) || !std::isfinite(s)) t.fail("case " + std::to_string(k) + ": non-positive scale");
    }
  }
}

/// Zeros quantize to integer 0 and dequantize back to exactly 0.
inline void zero_exactness(std::size_t n, std::uint64_t seed, Tally& t) {
  Philox rng(seed);
  for (std::size_t k = 0; k < n; ++k, ++t.cases) {
    const Tensor w = random_kernel(rng);
    const auto cfg = random_config(rng);
    const auto q = quant::quantize(w, cfg);
    const Tensor back = quant::dequantize(q);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0f && (q.value(i) != 0 || back[i] != 0.0f)) {
        t.fail("case " + std::to_string(k) + ": zero not exact at " + std::to_string(i));
        break;
      }
    }
  }
}

/// |dequantize(quantize(x)) - x| <= s/2 wherever |x|/s stays inside the clamp limit.
inline void half_step_bound(std::size_t n, std::uint64_t seed, Tally& t) {
  Philox rng(seed);
  for (std::size_t k = 0; k < n; ++k, ++t.cases) {
    const Tensor w = random_kernel(rng);
    auto cfg = random_config(rng);
    cfg.signedness = quant::Signedness::signed_int;
    const auto q = quant::quantize(w, cfg);
    const Tensor back = quant::dequantize(q);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double s = q.scales[q.scale_index(i)];
      const double r = static_cast<double>(w[i]) / s;
      if (r < cfg.min_value() || r > cfg.max_value()) continue;
      // Float32 storage of x and s*k adds a few ulps on top of the exact half step.
      const double slack = 4.0 * std::numeric_limits<float>::epsilon() * std::max(std::abs(w[i]), 1e-30f);
      if (std::abs(static_cast<double>(back[i]) - w[i]) > s / 2 * (1 + 1e-6) + slack) {
        t.fail("case " + std::to_string(k) + ": error exceeds s/2 at " + std::to_string(i));
        break;
      }
    }
  }
}

/// x = s * k with k in range quantizes to k exactly and dequantizes losslessly.
inline void grid_idempotence(std::size_t n, std::uint64_t seed, Tally& t) {
  Philox rng(seed);
  for (std::size_t k = 0; k < n; ++k, ++t.cases) {
    auto cfg = random_config(rng);
    const Tensor shape_source = random_kernel(rng);
    const auto probe = quant::quantize(shape_source, cfg);
    Tensor grid(shape_source.shape());
    std::vector<std::int32_t> ints(grid.size());
    const std::int64_t span = static_cast<std::int64_t>(cfg.max_value()) - cfg.min_value() + 1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ints[i] = static_cast<std::int32_t>(cfg.min_value() + static_cast<std::int64_t>(rng.below(span)));
      grid[i] = probe.scales[probe.scale_index(i)] * static_cast<float>(ints[i]);
    }
    const auto q = quant::quantize_with_scales(grid, cfg, probe.scales);
    const Tensor back = quant::dequantize(q);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (q.value(i) != ints[i] || back[i] != grid[i]) {
        t.fail("case " + std::to_string(k) + ": grid point " + std::to_string(i) + " moved");
        break;
      }
    }
  }
}

/// In max_abs mode no per-channel scale exceeds the per-tensor scale.
inline void scale_monotonicity(std::size_t n, std::uint64_t seed, Tally& t) {
  Philox rng(seed);
  for (std::size_t k = 0; k < n; ++k, ++t.cases) {
    const Tensor w = random_kernel(rng);
    const int bits = 2 + static_cast<int>(rng.below(15));
    const auto sign = rng.bit() ? quant::Signedness::signed_int : quant::Signedness::unsigned_int;
    const auto whole = quant::compute_scale(w, bits, quant::ScaleMode::max_abs, sign);
    if (whole.degenerate) continue;
    for (const auto& c : quant::compute_scale_per_channel(w, bits, quant::ScaleMode::max_abs, sign)) {
      if (!c.degenerate && c.scale > whole.scale) {
        t.fail("case " + std::to_string(k) + ": channel scale above tensor scale");
        break;
      }
    }
  }
}

}  // namespace nrx::props
