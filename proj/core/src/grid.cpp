// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/grid.hpp"

#include "nrx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nrx::link {

void GridSpec::validate() const {
  if (num_symbols == 0 || num_subcarriers == 0) throw std::invalid_argument("GridSpec: empty grid");
  if (num_rx == 0) throw std::invalid_argument("GridSpec: num_rx must be >= 1");
  if (pilot_symbols.empty()) throw std::invalid_argument("GridSpec: at least one pilot symbol required");
  for (std::size_t p : pilot_symbols) {
    if (p >= num_symbols) {
      throw std::invalid_argument("GridSpec: pilot symbol index " + std::to_string(p) +
                                  " >= num_symbols " + std::to_string(num_symbols));
    }
  }
  if (pilot_symbols.size() >= num_symbols) throw std::invalid_argument("GridSpec: no data symbols left");
}

bool GridSpec::is_pilot_symbol(std::size_t symbol) const noexcept {
  return std::find(pilot_symbols.begin(), pilot_symbols.end(), symbol) != pilot_symbols.end();
}

std::vector<std::uint8_t> GridSpec::pilot_mask() const {
  std::vector<std::uint8_t> mask(num_res(), 0);
  for (std::size_t i = 0; i < num_symbols; ++i) {
    if (!is_pilot_symbol(i)) continue;
    for (std::size_t j = 0; j < num_subcarriers; ++j) mask[index(i, j)] = 1;
  }
  return mask;
}

std::vector<std::size_t> GridSpec::data_positions() const {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < num_symbols; ++i) {
    if (is_pilot_symbol(i)) continue;
    for (std::size_t j = 0; j < num_subcarriers; ++j) pos.push_back(index(i, j));
  }
  return pos;
}

std::size_t GridSpec::num_data_res() const {
  std::size_t pilots = 0;
  for (std::size_t i = 0; i < num_symbols; ++i) pilots += is_pilot_symbol(i);
  return (num_symbols - pilots) * num_subcarriers;
}

std::vector<cd> GridSpec::pilot_values() const {
  std::vector<cd> values(num_res(), cd{});
  Philox rng(pilot_seed);
  const double a = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < num_symbols; ++i) {
    if (!is_pilot_symbol(i)) continue;
    for (std::size_t j = 0; j < num_subcarriers; ++j) {
      const double re = rng.bit() ? -a : a;
      const double im = rng.bit() ? -a : a;
      values[index(i, j)] = {re, im};
    }
  }
  return values;
}

ResourceGrid build_transmit_grid(const GridSpec& spec, const Constellation& constellation,
                                 std::span<const std::uint8_t> coded_bits) {
  spec.validate();
  const std::size_t capacity = spec.num_data_res() * constellation.bits_per_symbol();
  if (coded_bits.size() > capacity) {
    throw std::invalid_argument("build_transmit_grid: " + std::to_string(coded_bits.size()) +
                                " coded bits exceed grid capacity " + std::to_string(capacity));
  }
  ResourceGrid grid;
  grid.spec = spec;
  grid.pilot_mask = spec.pilot_mask();
  grid.x = spec.pilot_values();
  grid.bits.assign(capacity, 0);
  std::copy(coded_bits.begin(), coded_bits.end(), grid.bits.begin());
  grid.payload_bits = coded_bits.size();
  const std::vector<cd> symbols = constellation.map(grid.bits);
  const std::vector<std::size_t> data = spec.data_positions();
  for (std::size_t s = 0; s < data.size(); ++s) grid.x[data[s]] = symbols[s];
  return grid;
}

}  // namespace nrx::link
