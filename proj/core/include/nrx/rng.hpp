// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>

namespace nrx {

/// Philox4x32-10 counter-based generator. A stream is fully determined by its
/// 64-bit key; draws walk a 128-bit counter. Independent substreams are made
/// by deriving keys, so Monte Carlo results do not depend on scheduling.
class Philox {
 public:
  using result_type = std::uint32_t;

  explicit Philox(std::uint64_t key = 0, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;
  /// Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0) noexcept;
  int bit() noexcept { return static_cast<int>(operator()() >> 31); }

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer, used to fold identifiers into stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_string(std::string_view s) noexcept;
/// Order-sensitive combination of identifiers into one key.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) noexcept;

}  // namespace nrx
