// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/constellation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nrx::link {

namespace {

// Amplitude level for one axis from its bits (b_first, then refinements).
double axis_level(const int* bits, std::size_t n) {
  auto s = [bits](std::size_t k) { return 1.0 - 2.0 * bits[k]; };
  switch (n) {
    case 1: return s(0);
    case 2: return s(0) * (2.0 - s(1));
    default: return s(0) * (4.0 - s(1) * (2.0 - s(2)));
  }
}

}  // namespace

Constellation Constellation::qam(std::size_t bits_per_symbol) {
  Constellation c;
  c.bps_ = bits_per_symbol;
  const std::size_t m = std::size_t{1} << bits_per_symbol;
  c.points_.resize(m);
  if (bits_per_symbol == 1) {
    c.points_[0] = {1.0, 0.0};
    c.points_[1] = {-1.0, 0.0};
    return c;
  }
  if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6) {
    throw std::invalid_argument("Constellation::qam: unsupported bits per symbol " +
                                std::to_string(bits_per_symbol));
  }
  const std::size_t half = bits_per_symbol / 2;
  const double norm = std::sqrt(2.0 * (static_cast<double>(m) - 1.0) / 3.0);
  for (std::size_t label = 0; label < m; ++label) {
    int re_bits[3], im_bits[3];
    for (std::size_t k = 0; k < half; ++k) {
      re_bits[k] = c.bit(label, 2 * k);
      im_bits[k] = c.bit(label, 2 * k + 1);
    }
    c.points_[label] = cd(axis_level(re_bits, half), axis_level(im_bits, half)) / norm;
  }
  return c;
}

std::vector<cd> Constellation::map(std::span<const std::uint8_t> bits) const {
  if (bits.size() % bps_ != 0) {
    throw std::invalid_argument("Constellation::map: " + std::to_string(bits.size()) +
                                " bits is not a multiple of " + std::to_string(bps_));
  }
  std::vector<cd> out(bits.size() / bps_);
  for (std::size_t s = 0; s < out.size(); ++s) {
    std::size_t label = 0;
    for (std::size_t k = 0; k < bps_; ++k) label = (label << 1) | (bits[s * bps_ + k] & 1u);
    out[s] = points_[label];
  }
  return out;
}

std::size_t Constellation::nearest(cd x) const noexcept {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = std::norm(x - points_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<std::uint8_t> Constellation::hard_demap(std::span<const cd> symbols) const {
  std::vector<std::uint8_t> bits(symbols.size() * bps_);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const std::size_t label = nearest(symbols[s]);
    for (std::size_t k = 0; k < bps_; ++k) bits[s * bps_ + k] = static_cast<std::uint8_t>(bit(label, k));
  }
  return bits;
}

}  // namespace nrx::link
