// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/model_quantization.hpp"
#include "nrx/receiver.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nrx {

// Weight file layout, all integers little-endian:
//
//   header   char[4] magic "NRXW"
//            u32     version (kWeightFileVersion)
//            u32     kind: 0 float model, 1 stored-kernel model
//            u32[8]  config echo: num_blocks, channels, kernel_h, kernel_w,
//                    dilation_h, dilation_w, bits_per_symbol, num_rx
//            u32     record count
//   record   u16     name length, then the name bytes ("<layer>.<field>")
//            u8      dtype: 0 float32, 1 float16, 2 integer
//            u8      bit width (32, 16, or the integer width)
//            u8      signedness: 0 signed, 1 unsigned
//            u8      granularity: 0 per-tensor, 1 per-channel
//            u8      channel axis
//            u8      scale mode: 0 magnitude-span, 1 max-abs
//            u8      rank, then u32 dims[rank]
//            u32     scale count, then f32 scales[count]
//            u64     payload length, then the payload bytes
//
// Records appear in NeuralReceiver::parameter_names() order. Integer
// payloads use quant::pack_values; float payloads are raw IEEE bits.

inline constexpr std::uint32_t kWeightFileVersion = 1;

class WeightFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class WeightFileKind : std::uint32_t { float_model = 0, stored_kernels = 1 };

std::vector<std::uint8_t> serialize(const NeuralReceiver& model);
std::vector<std::uint8_t> serialize(const QuantizedReceiver& qmodel);
NeuralReceiver deserialize_model(std::span<const std::uint8_t> bytes);
QuantizedReceiver deserialize_quantized(std::span<const std::uint8_t> bytes);
WeightFileKind peek_kind(std::span<const std::uint8_t> bytes);

void save_weights(const NeuralReceiver& model, const std::string& path);
void save_weights(const QuantizedReceiver& qmodel, const std::string& path);
NeuralReceiver load_weights(const std::string& path);
QuantizedReceiver load_quantized(const std::string& path);
std::vector<std::uint8_t> read_file(const std::string& path);

/// Weight-only storage accounting: kernels at stored precision plus their
/// scales, biases and layer-norm parameters at float32. Headers and names
/// are excluded.
struct SizeReport {
  std::size_t kernel_bytes = 0;
  std::size_t scale_bytes = 0;
  std::size_t full_precision_bytes = 0;
  std::size_t total_bytes = 0;
  std::size_t float32_bytes = 0;  // the same model with every parameter at float32
  double reduction = 1.0;         // float32_bytes / total_bytes
};

SizeReport model_size_bytes(const NeuralReceiver& model);
SizeReport model_size_bytes(const QuantizedReceiver& qmodel);

}  // namespace nrx
