// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/ldpc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nrx::link {

namespace {

using Bits = std::vector<std::uint64_t>;

inline bool get_bit(const Bits& b, std::size_t i) { return (b[i >> 6] >> (i & 63)) & 1u; }
inline void set_bit(Bits& b, std::size_t i) { b[i >> 6] |= std::uint64_t{1} << (i & 63); }

}  // namespace

LdpcCode::LdpcCode(std::size_t n, std::vector<std::vector<std::size_t>> rows)
    : n_(n), rows_(std::move(rows)) {
  const std::size_t m = rows_.size();
  if (n_ == 0 || m == 0 || m >= n_) throw std::invalid_argument("LdpcCode: require 0 < m < n");
  for (auto& r : rows_) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (r.empty()) throw std::invalid_argument("LdpcCode: empty check row");
    if (r.back() >= n_) throw std::invalid_argument("LdpcCode: column index out of range");
  }

  // Gaussian elimination over GF(2), choosing pivots from the rightmost
  // columns so the message lands on the leading positions when possible.
  const std::size_t words = (n_ + 63) / 64;
  std::vector<Bits> a(m, Bits(words, 0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c : rows_[r]) set_bit(a[r], c);
  }
  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t c = n_; c-- > 0 && rank < m;) {
    std::size_t p = rank;
    while (p < m && !get_bit(a[p], c)) ++p;
    if (p == m) continue;
    std::swap(a[p], a[rank]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r != rank && get_bit(a[r], c)) {
        for (std::size_t w = 0; w < words; ++w) a[r][w] ^= a[rank][w];
      }
    }
    pivot_col.push_back(c);
    ++rank;
  }
  if (rank != m) throw std::invalid_argument("LdpcCode: parity-check matrix is rank deficient");

  std::vector<bool> is_pivot(n_, false);
  for (std::size_t c : pivot_col) is_pivot[c] = true;
  std::vector<std::size_t> info_index(n_, 0);
  for (std::size_t c = 0; c < n_; ++c) {
    if (!is_pivot[c]) {
      info_index[c] = info_pos_.size();
      info_pos_.push_back(c);
    }
  }
  const std::size_t kwords = (info_pos_.size() + 63) / 64;
  parity_pos_ = pivot_col;
  parity_eqs_.assign(m, Bits(kwords, 0));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c : info_pos_) {
      if (get_bit(a[r], c)) set_bit(parity_eqs_[r], info_index[c]);
    }
  }
}

LdpcCode LdpcCode::from_text(std::istream& in) {
  std::string line;
  std::size_t n = 0, m = 0;
  bool have_header = false;
  std::vector<std::vector<std::size_t>> rows;
  std::vector<bool> seen;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream is(line);
    if (!have_header) {
      if (!(is >> n >> m) || n == 0 || m == 0) {
        throw std::runtime_error("LDPC file: malformed header at line " + std::to_string(lineno));
      }
      rows.assign(m, {});
      seen.assign(m, false);
      have_header = true;
      continue;
    }
    std::size_t r;
    char colon;
    if (!(is >> r >> colon) || colon != ':' || r >= m || seen[r]) {
      throw std::runtime_error("LDPC file: malformed row at line " + std::to_string(lineno));
    }
    seen[r] = true;
    std::size_t c;
    while (is >> c) rows[r].push_back(c);
    if (!is.eof()) throw std::runtime_error("LDPC file: bad column index at line " + std::to_string(lineno));
  }
  if (!have_header) throw std::runtime_error("LDPC file: missing header");
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw std::runtime_error("LDPC file: missing check rows");
  }
  return LdpcCode(n, std::move(rows));
}

LdpcCode LdpcCode::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LDPC file '" + path + "'");
  return from_text(in);
}

std::vector<std::uint8_t> LdpcCode::encode(std::span<const std::uint8_t> message) const {
  if (message.size() != k()) {
    throw std::invalid_argument("LdpcCode::encode: message has " + std::to_string(message.size()) +
                                " bits, code expects " + std::to_string(k()));
  }
  std::vector<std::uint8_t> cw(n_, 0);
  Bits packed((k() + 63) / 64, 0);
  for (std::size_t i = 0; i < k(); ++i) {
    cw[info_pos_[i]] = message[i] & 1u;
    if (message[i] & 1u) set_bit(packed, i);
  }
  for (std::size_t r = 0; r < parity_eqs_.size(); ++r) {
    unsigned parity = 0;
    for (std::size_t w = 0; w < packed.size(); ++w) {
      parity ^= static_cast<unsigned>(std::popcount(parity_eqs_[r][w] & packed[w])) & 1u;
    }
    cw[parity_pos_[r]] = static_cast<std::uint8_t>(parity);
  }
  return cw;
}

bool LdpcCode::satisfies_parity(std::span<const std::uint8_t> codeword) const {
  if (codeword.size() != n_) return false;
  for (const auto& row : rows_) {
    unsigned p = 0;
    for (std::size_t c : row) p ^= codeword[c] & 1u;
    if (p) return false;
  }
  return true;
}

LdpcDecodeResult LdpcCode::decode(std::span<const double> llr, std::size_t max_iterations,
                                  double normalization) const {
  if (llr.size() != n_) {
    throw std::invalid_argument("LdpcCode::decode: expected " + std::to_string(n_) + " LLRs, got " +
                                std::to_string(llr.size()));
  }
  // Internally L > 0 favors bit 0.
  std::vector<double> channel(n_);
  for (std::size_t i = 0; i < n_; ++i) channel[i] = -llr[i];

  std::vector<std::size_t> row_start(rows_.size() + 1, 0);
  for (std::size_t r = 0; r < rows_.size(); ++r) row_start[r + 1] = row_start[r] + rows_[r].size();
  const std::size_t edges = row_start.back();
  std::vector<double> c2v(edges, 0.0);
  std::vector<double> total = channel;

  LdpcDecodeResult result;
  result.codeword.assign(n_, 0);
  const std::size_t iters = std::max<std::size_t>(max_iterations, 1);
  for (std::size_t it = 1; it <= iters; ++it) {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
      std::size_t argmin = 0;
      bool sign = false;
      for (std::size_t e = 0; e < row.size(); ++e) {
        const double v2c = total[row[e]] - c2v[row_start[r] + e];
        const double mag = std::abs(v2c);
        sign ^= v2c < 0.0;
        if (mag < min1) {
          min2 = min1;
          min1 = mag;
          argmin = e;
        } else if (mag < min2) {
          min2 = mag;
        }
      }
      for (std::size_t e = 0; e < row.size(); ++e) {
        const std::size_t idx = row_start[r] + e;
        const double v2c = total[row[e]] - c2v[idx];
        const bool s = sign ^ (v2c < 0.0);
        const double mag = normalization * (e == argmin ? min2 : min1);
        const double msg = s ? -mag : mag;
        total[row[e]] += msg - c2v[idx];
        c2v[idx] = msg;
      }
    }
    for (std::size_t i = 0; i < n_; ++i) result.codeword[i] = total[i] < 0.0 ? 1 : 0;
    result.iterations = it;
    if (satisfies_parity(result.codeword)) {
      result.converged = true;
      break;
    }
  }
  result.message.resize(k());
  for (std::size_t i = 0; i < k(); ++i) result.message[i] = result.codeword[info_pos_[i]];
  return result;
}

}  // namespace nrx::link
