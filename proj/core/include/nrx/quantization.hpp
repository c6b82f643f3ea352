// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nrx::quant {

// Symmetric uniform quantization with the zero-point fixed at 0:
//   dequantize:  x_hat = s * x_int
//   unsigned:    x_int = clamp(round(x / s), 0, 2^b - 1)
//   signed:      x_int = clamp(round(x / s), -2^(b-1), 2^(b-1) - 1)
// round() is round-half-to-even.

enum class Signedness { signed_int, unsigned_int };
enum class Granularity { per_tensor, per_channel };

enum class ScaleMode {
  /// s = (max|x| - min|x|) / (2^b - 1), for either signedness.
  magnitude_span,
  /// s = max|x| / (2^(b-1) - 1) when signed, max|x| / (2^b - 1) when unsigned.
  max_abs,
};

struct QuantConfig {
  int bit_width = 8;
  Signedness signedness = Signedness::signed_int;
  Granularity granularity = Granularity::per_channel;
  /// Axis holding output channels; the last axis of a [kh, kw, Cin, Cout] kernel.
  std::size_t channel_axis = 3;
  ScaleMode scale_mode = ScaleMode::magnitude_span;

  void validate() const;
  void validate_for(const Shape& shape) const;

  std::int32_t min_value() const noexcept;
  std::int32_t max_value() const noexcept;

  friend bool operator==(const QuantConfig&, const QuantConfig&) = default;
};

std::string to_string(Signedness s);
std::string to_string(Granularity g);
std::string to_string(ScaleMode m);
Granularity parse_granularity(const std::string& s);
ScaleMode parse_scale_mode(const std::string& s);

struct ScaleResult {
  float scale = 1.0f;
  /// Set when the formula produced a non-positive or non-finite scale and a
  /// fallback was substituted: 1.0 for an all-zero tensor, otherwise the
  /// max_abs scale.
  bool degenerate = false;
};

ScaleResult compute_scale(std::span<const float> x, int bit_width,
                          ScaleMode mode = ScaleMode::magnitude_span,
                          Signedness signedness = Signedness::signed_int);
ScaleResult compute_scale(const Tensor& x, int bit_width,
                          ScaleMode mode = ScaleMode::magnitude_span,
                          Signedness signedness = Signedness::signed_int);

/// One scale per slice along `channel_axis` (default: the last axis).
std::vector<ScaleResult> compute_scale_per_channel(const Tensor& weights, int bit_width,
                                                   ScaleMode mode = ScaleMode::magnitude_span,
                                                   Signedness signedness = Signedness::signed_int,
                                                   std::size_t channel_axis = 3);

/// Integer values held in the narrowest container that fits the bit-width:
/// 4- and 8-bit values in 8-bit containers, 16-bit values in 16-bit ones.
using IntStorage = std::variant<std::vector<std::int8_t>, std::vector<std::uint8_t>,
                                std::vector<std::int16_t>, std::vector<std::uint16_t>>;

struct QuantizedTensor {
  Shape shape;
  QuantConfig config;
  /// Length 1 when per-tensor, shape[channel_axis] when per-channel.
  std::vector<float> scales;
  IntStorage values;
  std::size_t degenerate_scales = 0;

  std::size_t size() const noexcept;
  std::int32_t value(std::size_t i) const;
  /// Index into `scales` for flat element i.
  std::size_t scale_index(std::size_t i) const noexcept;

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

IntStorage make_storage(const QuantConfig& config, std::size_t n);
void store_value(IntStorage& storage, std::size_t i, std::int32_t v);

/// Round half to even.
double round_to_nearest(double x) noexcept;

QuantizedTensor quantize(const Tensor& x, const QuantConfig& config);
/// Quantize with caller-supplied scales (used to test grid-point behavior).
QuantizedTensor quantize_with_scales(const Tensor& x, const QuantConfig& config,
                                     std::vector<float> scales);
Tensor dequantize(const QuantizedTensor& q);

/// Serialized integer payload: b = 4 packs two values per byte (first value
/// in the low nibble, two's complement when signed), b = 8 one per byte,
/// b = 16 little-endian pairs. Other widths round up to the next of these.
std::vector<std::uint8_t> pack_values(const QuantizedTensor& q);
IntStorage unpack_values(std::span<const std::uint8_t> payload, const QuantConfig& config,
                         std::size_t count);
std::size_t packed_size(int bit_width, std::size_t count) noexcept;

/// Memory access estimate Cost = C * M_param + T * M_tensor, in caller units.
struct AccessCostEstimate {
  double channels = 0;
  double param_cost = 0;
  double tensor_size = 0;
  double element_cost = 0;
  double total = 0;
};

AccessCostEstimate memory_access_cost(double channels, double param_cost, double tensor_size,
                                      double element_cost);

/// Summary statistics and histogram of one tensor's values.
struct LayerWeightStats {
  std::string layer_name;
  std::size_t count = 0;
  double min = 0;
  double max = 0;
  double mean = 0;
  double stddev = 0;  // population
  std::vector<double> bin_edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

LayerWeightStats tensor_stats(std::string name, const Tensor& values, std::size_t bins);

}  // namespace nrx::quant
