// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/link.hpp"

#include <cstdlib>
#include <stdexcept>

#ifndef NRX_DEFAULT_DATA_DIR
#define NRX_DEFAULT_DATA_DIR "data"
#endif

namespace nrx::link {

std::string default_data_dir() {
  if (const char* env = std::getenv("NRX_DATA_DIR"); env && *env) return env;
  return NRX_DEFAULT_DATA_DIR;
}

LdpcCode default_ldpc_code() { return LdpcCode::from_file(default_data_dir() + "/ldpc_n648_r12.txt"); }

LinkSetup::LinkSetup(GridSpec g, std::size_t bits_per_symbol, LdpcCode c)
    : grid(std::move(g)), constellation(Constellation::qam(bits_per_symbol)), code(std::move(c)) {
  grid.validate();
  const std::size_t capacity = grid.num_data_res() * bits_per_symbol;
  if (code.n() > capacity) {
    throw std::invalid_argument("LinkSetup: codeword length " + std::to_string(code.n()) +
                                " exceeds grid capacity " + std::to_string(capacity));
  }
}

LinkSetup LinkSetup::standard() { return LinkSetup(GridSpec{}, 2, default_ldpc_code()); }

double LinkSetup::effective_rate() const noexcept {
  return static_cast<double>(code.k()) /
         static_cast<double>(grid.num_data_res() * constellation.bits_per_symbol());
}

double LinkSetup::noise_var(double ebno_db) const {
  return ebno_to_noise_var(ebno_db, constellation.bits_per_symbol(), effective_rate());
}

void Scenario::validate() const {
  if (num_taps == 0) throw std::invalid_argument("Scenario: num_taps must be >= 1");
  if (delay_spread_lo < 0 || delay_spread_hi < delay_spread_lo) throw std::invalid_argument("Scenario: bad delay spread range");
  if (velocity_lo < 0 || velocity_hi < velocity_lo) throw std::invalid_argument("Scenario: bad velocity range");
  if (ebno_hi < ebno_lo) throw std::invalid_argument("Scenario: bad Eb/N0 range");
}

Block simulate_block(const LinkSetup& setup, ChannelKind kind, const ChannelConfig& channel, double ebno_db,
                     Philox& rng) {
  Block b;
  b.channel = channel;
  b.ebno_db = ebno_db;
  b.noise_var = setup.noise_var(ebno_db);
  b.message.resize(setup.code.k());
  for (auto& bit : b.message) bit = static_cast<std::uint8_t>(rng.bit());
  const auto codeword = setup.code.encode(b.message);
  b.grid = build_transmit_grid(setup.grid, setup.constellation, codeword);
  std::vector<cd> h;
  if (kind == ChannelKind::flat) {
    h.assign(setup.grid.num_res() * setup.grid.num_rx, cd{1.0, 0.0});
  } else {
    h = generate_channel(channel, setup.grid, rng);
  }
  apply_channel(b.grid, std::move(h), b.noise_var, rng);
  return b;
}

Block simulate_block(const LinkSetup& setup, const Scenario& s, Philox& rng) {
  s.validate();
  ChannelConfig ch;
  ch.num_taps = s.num_taps;
  ch.carrier_freq = setup.carrier_freq;
  ch.subcarrier_spacing = setup.subcarrier_spacing;
  ch.rms_delay_spread = rng.uniform(s.delay_spread_lo, s.delay_spread_hi);
  ch.ue_velocity = rng.uniform(s.velocity_lo, s.velocity_hi);
  const double ebno = rng.uniform(s.ebno_lo, s.ebno_hi);
  return simulate_block(setup, s.kind, ch, ebno, rng);
}

}  // namespace nrx::link
