// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/quantization.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nrx::quant {

namespace {

std::size_t stride_after(const Shape& shape, std::size_t axis) {
  std::size_t s = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) s *= shape[a];
  return s;
}

double max_abs_scale(double max_abs, int b, Signedness signedness) {
  const double levels = signedness == Signedness::signed_int ? std::ldexp(1.0, b - 1) - 1.0
                                                             : std::ldexp(1.0, b) - 1.0;
  return max_abs / levels;
}

}  // namespace

void QuantConfig::validate() const {
  if (bit_width < 2 || bit_width > 16) {
    throw std::invalid_argument("QuantConfig: bit_width must be in [2, 16], got " +
                                std::to_string(bit_width));
  }
}

void QuantConfig::validate_for(const Shape& shape) const {
  validate();
  if (granularity == Granularity::per_channel && channel_axis >= shape.size()) {
    throw std::invalid_argument("QuantConfig: channel_axis " + std::to_string(channel_axis) +
                                " is not valid for a tensor of shape " + shape_string(shape));
  }
}

std::int32_t QuantConfig::min_value() const noexcept {
  return signedness == Signedness::signed_int ? -(std::int32_t{1} << (bit_width - 1)) : 0;
}

std::int32_t QuantConfig::max_value() const noexcept {
  return signedness == Signedness::signed_int ? (std::int32_t{1} << (bit_width - 1)) - 1
                                              : (std::int32_t{1} << bit_width) - 1;
}

std::string to_string(Signedness s) { return s == Signedness::signed_int ? "signed" : "unsigned"; }

std::string to_string(Granularity g) {
  return g == Granularity::per_tensor ? "per-tensor" : "per-channel";
}

std::string to_string(ScaleMode m) {
  return m == ScaleMode::magnitude_span ? "magnitude-span" : "max-abs";
}

Granularity parse_granularity(const std::string& s) {
  if (s == "per-tensor" || s == "per_tensor" || s == "perTensor") return Granularity::per_tensor;
  if (s == "per-channel" || s == "per_channel" || s == "perChannel") return Granularity::per_channel;
  throw std::invalid_argument("unknown granularity '" + s + "'");
}

ScaleMode parse_scale_mode(const std::string& s) {
  if (s == "magnitude-span" || s == "magnitude_span") return ScaleMode::magnitude_span;
  if (s == "max-abs" || s == "max_abs") return ScaleMode::max_abs;
  throw std::invalid_argument("unknown scale mode '" + s + "'");
}

ScaleResult compute_scale(std::span<const float> x, int bit_width, ScaleMode mode,
                          Signedness signedness) {
  if (x.empty()) throw std::invalid_argument("compute_scale: empty tensor");
  if (bit_width < 2 || bit_width > 16) {
    throw std::invalid_argument("compute_scale: bit_width must be in [2, 16]");
  }
  double hi = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (float v : x) {
    const double a = std::abs(static_cast<double>(v));
    hi = std::max(hi, a);
    lo = std::min(lo, a);
  }
  if (!(hi > 0.0) || !std::isfinite(hi)) return {1.0f, true};

  double s = mode == ScaleMode::magnitude_span ? (hi - lo) / (std::ldexp(1.0, bit_width) - 1.0)
                                               : max_abs_scale(hi, bit_width, signedness);
  bool degenerate = false;
  if (!(s > 0.0) || !std::isfinite(s) || !(static_cast<float>(s) > 0.0f)) {
    s = max_abs_scale(hi, bit_width, signedness);
    degenerate = true;
  }
  return {static_cast<float>(s), degenerate};
}

ScaleResult compute_scale(const Tensor& x, int bit_width, ScaleMode mode, Signedness signedness) {
  return compute_scale(x.data(), bit_width, mode, signedness);
}

std::vector<ScaleResult> compute_scale_per_channel(const Tensor& weights, int bit_width,
                                                   ScaleMode mode, Signedness signedness,
                                                   std::size_t channel_axis) {
  if (weights.rank() == 0 || channel_axis >= weights.rank()) {
    throw std::invalid_argument("compute_scale_per_channel: channel axis " +
                                std::to_string(channel_axis) + " invalid for shape " +
                                shape_string(weights.shape()));
  }
  const std::size_t channels = weights.dim(channel_axis);
  const std::size_t inner = stride_after(weights.shape(), channel_axis);
  std::vector<std::vector<float>> slices(channels);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    slices[(i / inner) % channels].push_back(weights[i]);
  }
  std::vector<ScaleResult> out;
  out.reserve(channels);
  for (const auto& slice : slices) out.push_back(compute_scale(slice, bit_width, mode, signedness));
  return out;
}

std::size_t QuantizedTensor::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, values);
}

std::int32_t QuantizedTensor::value(std::size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<std::int32_t>(v.at(i)); }, values);
}

std::size_t QuantizedTensor::scale_index(std::size_t i) const noexcept {
  if (config.granularity == Granularity::per_tensor || scales.size() <= 1) return 0;
  return (i / stride_after(shape, config.channel_axis)) % scales.size();
}

IntStorage make_storage(const QuantConfig& config, std::size_t n) {
  const bool is_signed = config.signedness == Signedness::signed_int;
  if (config.bit_width <= 8) {
    if (is_signed) return std::vector<std::int8_t>(n, 0);
    return std::vector<std::uint8_t>(n, 0);
  }
  if (is_signed) return std::vector<std::int16_t>(n, 0);
  return std::vector<std::uint16_t>(n, 0);
}

void store_value(IntStorage& storage, std::size_t i, std::int32_t v) {
  std::visit([i, v](auto& vec) { vec.at(i) = static_cast<typename std::decay_t<decltype(vec)>::value_type>(v); },
             storage);
}

double round_to_nearest(double x) noexcept {
  // std::nearbyint honors the current rounding mode, which is round-to-nearest-even by default.
  const int saved = std::fegetround();
  if (saved != FE_TONEAREST) std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x);
  if (saved != FE_TONEAREST) std::fesetround(saved);
  return r;
}

QuantizedTensor quantize_with_scales(const Tensor& x, const QuantConfig& config,
                                     std::vector<float> scales) {
  config.validate_for(x.shape());
  const std::size_t expected =
      config.granularity == Granularity::per_tensor ? 1 : x.dim(config.channel_axis);
  if (scales.size() != expected) {
    throw std::invalid_argument("quantize: expected " + std::to_string(expected) +
                                " scales, got " + std::to_string(scales.size()));
  }
  for (float s : scales) {
    if (!(s > 0.0f) || !std::isfinite(s)) throw std::invalid_argument("quantize: scales must be positive");
  }
  QuantizedTensor q;
  q.shape = x.shape();
  q.config = config;
  q.scales = std::move(scales);
  q.values = make_storage(config, x.size());
  const double lo = config.min_value();
  const double hi = config.max_value();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = q.scales[q.scale_index(i)];
    const double r = std::clamp(round_to_nearest(static_cast<double>(x[i]) / s), lo, hi);
    store_value(q.values, i, static_cast<std::int32_t>(r));
  }
  return q;
}

QuantizedTensor quantize(const Tensor& x, const QuantConfig& config) {
  config.validate_for(x.shape());
  std::vector<float> scales;
  std::size_t degenerate = 0;
  if (config.granularity == Granularity::per_tensor) {
    const ScaleResult r = compute_scale(x, config.bit_width, config.scale_mode, config.signedness);
    scales.push_back(r.scale);
    degenerate += r.degenerate;
  } else {
    for (const ScaleResult& r : compute_scale_per_channel(x, config.bit_width, config.scale_mode,
                                                          config.signedness, config.channel_axis)) {
      scales.push_back(r.scale);
      degenerate += r.degenerate;
    }
  }
  QuantizedTensor q = quantize_with_scales(x, config, std::move(scales));
  q.degenerate_scales = degenerate;
  return q;
}

Tensor dequantize(const QuantizedTensor& q) {
  Tensor out(q.shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = q.scales[q.scale_index(i)] * static_cast<float>(q.value(i));
  }
  return out;
}

std::size_t packed_size(int bit_width, std::size_t count) noexcept {
  if (bit_width <= 4) return (count + 1) / 2;
  if (bit_width <= 8) return count;
  return 2 * count;
}

std::vector<std::uint8_t> pack_values(const QuantizedTensor& q) {
  const std::size_t n = q.size();
  std::vector<std::uint8_t> out(packed_size(q.config.bit_width, n), 0);
  if (q.config.bit_width <= 4) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto nibble = static_cast<std::uint8_t>(static_cast<std::uint32_t>(q.value(i)) & 0xFu);
      out[i / 2] |= static_cast<std::uint8_t>(i % 2 == 0 ? nibble : nibble << 4);
    }
  } else if (q.config.bit_width <= 8) {
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(q.value(i) & 0xFF);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::uint16_t>(q.value(i) & 0xFFFF);
      out[2 * i] = static_cast<std::uint8_t>(v & 0xFF);
      out[2 * i + 1] = static_cast<std::uint8_t>(v >> 8);
    }
  }
  return out;
}

IntStorage unpack_values(std::span<const std::uint8_t> payload, const QuantConfig& config,
                         std::size_t count) {
  config.validate();
  if (payload.size() != packed_size(config.bit_width, count)) {
    throw std::runtime_error("unpack_values: payload has " + std::to_string(payload.size()) +
                             " bytes, expected " +
                             std::to_string(packed_size(config.bit_width, count)));
  }
  const bool is_signed = config.signedness == Signedness::signed_int;
  IntStorage storage = make_storage(config, count);
  auto sign_extend = [is_signed](std::uint32_t raw, int bits) -> std::int32_t {
    if (is_signed && (raw & (1u << (bits - 1)))) return static_cast<std::int32_t>(raw) - (1 << bits);
    return static_cast<std::int32_t>(raw);
  };
  for (std::size_t i = 0; i < count; ++i) {
    std::int32_t v;
    if (config.bit_width <= 4) {
      const std::uint32_t raw = i % 2 == 0 ? payload[i / 2] & 0xFu : payload[i / 2] >> 4;
      v = sign_extend(raw, 4);
    } else if (config.bit_width <= 8) {
      v = sign_extend(payload[i], 8);
    } else {
      v = sign_extend(static_cast<std::uint32_t>(payload[2 * i]) |
                          (static_cast<std::uint32_t>(payload[2 * i + 1]) << 8),
                      16);
    }
    if (v < config.min_value() || v > config.max_value()) {
      throw std::runtime_error("unpack_values: stored value outside the configured range");
    }
    store_value(storage, i, v);
  }
  return storage;
}

AccessCostEstimate memory_access_cost(double channels, double param_cost, double tensor_size,
                                      double element_cost) {
  if (channels < 0 || param_cost < 0 || tensor_size < 0 || element_cost < 0) {
    throw std::invalid_argument("memory_access_cost: inputs must be non-negative");
  }
  return {channels, param_cost, tensor_size, element_cost,
          channels * param_cost + tensor_size * element_cost};
}

LayerWeightStats tensor_stats(std::string name, const Tensor& values, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("tensor_stats: bins must be >= 2");
  if (values.empty()) throw std::invalid_argument("tensor_stats: empty tensor");
  LayerWeightStats st;
  st.layer_name = std::move(name);
  st.count = values.size();
  st.min = values[0];
  st.max = values[0];
  double sum = 0.0;
  for (float v : values.data()) {
    st.min = std::min<double>(st.min, v);
    st.max = std::max<double>(st.max, v);
    sum += v;
  }
  st.mean = sum / static_cast<double>(st.count);
  double sq = 0.0;
  for (float v : values.data()) sq += (v - st.mean) * (v - st.mean);
  st.stddev = std::sqrt(sq / static_cast<double>(st.count));

  double lo = st.min;
  double hi = st.max;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  st.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    st.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
  }
  st.counts.assign(bins, 0);
  for (float v : values.data()) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    st.counts[std::min(b, bins - 1)] += 1;
  }
  return st;
}

}  // namespace nrx::quant
