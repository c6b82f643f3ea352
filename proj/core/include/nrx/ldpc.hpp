// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nrx::link {

struct LdpcDecodeResult {
  std::vector<std::uint8_t> message;   // k information bits
  std::vector<std::uint8_t> codeword;  // n hard decisions
  bool converged = false;
  std::size_t iterations = 0;
};

/// Binary LDPC code defined by a sparse parity-check matrix H (m x n, full
/// row rank). Encoding is systematic: message bits are written verbatim to
/// `info_positions()` and the remaining positions are solved from the
/// reduced row echelon form of H.
class LdpcCode {
 public:
  /// rows[r] lists the column indices of the ones in check row r.
  LdpcCode(std::size_t n, std::vector<std::vector<std::size_t>> rows);

  /// Sparse text format: '#' comments, a header line "n m", then m lines
  /// "r: c0 c1 ...".
  static LdpcCode from_text(std::istream& in);
  static LdpcCode from_file(const std::string& path);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return rows_.size(); }
  std::size_t k() const noexcept { return n_ - rows_.size(); }
  double rate() const noexcept { return static_cast<double>(k()) / static_cast<double>(n_); }

  const std::vector<std::vector<std::size_t>>& rows() const noexcept { return rows_; }
  const std::vector<std::size_t>& info_positions() const noexcept { return info_pos_; }

  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> message) const;
  bool satisfies_parity(std::span<const std::uint8_t> codeword) const;

  /// Normalized min-sum belief propagation, row-layered schedule. LLRs use
  /// the positive-means-bit-1 convention. Stops early once H c = 0.
  LdpcDecodeResult decode(std::span<const double> llr, std::size_t max_iterations = 20,
                          double normalization = 0.75) const;

 private:
  std::size_t n_;
  std::vector<std::vector<std::size_t>> rows_;
  std::vector<std::size_t> info_pos_;
  std::vector<std::size_t> parity_pos_;                 // pivot column of each RREF row
  std::vector<std::vector<std::uint64_t>> parity_eqs_;  // packed over info index
};

}  // namespace nrx::link
