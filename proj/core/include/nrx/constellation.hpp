// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nrx::link {

using cd = std::complex<double>;

/// Gray-labeled square QAM with unit average energy.
///
/// A symbol label packs its bits MSB-first: bit k of the label is
/// (label >> (bps - 1 - k)) & 1, and bits are consumed from the stream in
/// order b0, b1, ... Per-axis levels follow the usual 5G NR construction:
///   BPSK    1 - 2 b0                                   (real axis only)
///   QPSK    [(1-2b0) + j(1-2b1)] / sqrt(2)
///   16-QAM  [(1-2b0)(2-(1-2b2)) + j(1-2b1)(2-(1-2b3))] / sqrt(10)
///   64-QAM  [(1-2b0)(4-(1-2b2)(2-(1-2b4))) + j(...)] / sqrt(42)
/// so QPSK label 00 maps to (1 + j)/sqrt(2).
class Constellation {
 public:
  /// bits_per_symbol in {1, 2, 4, 6}.
  static Constellation qam(std::size_t bits_per_symbol);

  std::size_t bits_per_symbol() const noexcept { return bps_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::span<const cd> points() const noexcept { return points_; }
  cd point(std::size_t label) const { return points_.at(label); }
  int bit(std::size_t label, std::size_t k) const noexcept {
    return static_cast<int>((label >> (bps_ - 1 - k)) & 1u);
  }

  std::vector<cd> map(std::span<const std::uint8_t> bits) const;
  std::size_t nearest(cd x) const noexcept;
  std::vector<std::uint8_t> hard_demap(std::span<const cd> symbols) const;

 private:
  std::size_t bps_ = 0;
  std::vector<cd> points_;
};

}  // namespace nrx::link
