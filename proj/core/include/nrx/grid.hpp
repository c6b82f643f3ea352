// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/constellation.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nrx::link {

/// Slot layout. Pilot symbols are whole OFDM symbols carrying known values
/// on every subcarrier. Indices are 0-based: the default {2, 11} are the
/// 3rd and 12th symbols of the 14-symbol slot.
struct GridSpec {
  std::size_t num_symbols = 14;
  std::size_t num_subcarriers = 27;
  std::vector<std::size_t> pilot_symbols{2, 11};
  std::size_t num_rx = 2;
  std::uint64_t pilot_seed = 0x5EED0D3Bu;

  void validate() const;
  std::size_t num_res() const noexcept { return num_symbols * num_subcarriers; }
  std::size_t index(std::size_t symbol, std::size_t subcarrier) const noexcept {
    return symbol * num_subcarriers + subcarrier;
  }
  bool is_pilot_symbol(std::size_t symbol) const noexcept;
  /// 1 at pilot REs, 0 at data REs, indexed by index(i, j).
  std::vector<std::uint8_t> pilot_mask() const;
  /// Data RE indices in transmission order (symbol-major).
  std::vector<std::size_t> data_positions() const;
  std::size_t num_data_res() const;
  /// Unit-magnitude QPSK pilot values from the seeded sequence; 0 at data REs.
  std::vector<cd> pilot_values() const;
};

/// One slot's frequency-domain signals. Per-antenna arrays are indexed
/// (re * num_rx + antenna) with re = index(i, j).
struct ResourceGrid {
  GridSpec spec;
  std::vector<cd> x;
  std::vector<cd> h;
  std::vector<cd> n;
  std::vector<cd> y;
  std::vector<std::uint8_t> pilot_mask;
  /// Coded bits carried on the data REs (including zero padding).
  std::vector<std::uint8_t> bits;
  std::size_t payload_bits = 0;

  std::size_t ant(std::size_t re, std::size_t a) const noexcept { return re * spec.num_rx + a; }
};

/// Places `coded_bits` (zero-padded to fill every data RE) and the pilots
/// onto a fresh grid. Channel and noise fields are left empty.
ResourceGrid build_transmit_grid(const GridSpec& spec, const Constellation& constellation,
                                 std::span<const std::uint8_t> coded_bits);

}  // namespace nrx::link
