// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/quantization.hpp"
#include "nrx/receiver.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nrx {

enum class KernelFormat { float32, float16, integer };

std::string to_string(KernelFormat f);

/// One conv kernel held at its storage precision.
struct StoredKernel {
  std::string name;  // conv layer name
  Shape shape;
  KernelFormat format = KernelFormat::float32;
  quant::QuantizedTensor quantized;  // integer
  std::vector<std::uint16_t> half;   // float16
  Tensor full;                       // float32

  Tensor decode() const;
  /// Serialized kernel payload in bytes (integer values packed, no scales).
  std::size_t payload_bytes() const;
  std::size_t num_scales() const noexcept;

  friend bool operator==(const StoredKernel&, const StoredKernel&) = default;
};

/// A receiver whose conv kernels are stored at reduced precision. `base`
/// carries the biases and layer-norm parameters at full precision; its
/// kernel tensors are not consulted.
struct QuantizedReceiver {
  NeuralReceiver base;
  KernelFormat format = KernelFormat::integer;
  quant::QuantConfig config;  // meaningful when format == integer
  std::vector<StoredKernel> kernels;

  const StoredKernel* find(const std::string& layer) const noexcept;
};

struct QuantizationReport {
  std::size_t degenerate_scales = 0;
  std::vector<std::string> degenerate_layers;
};

/// Quantizes every conv kernel with `config`. Biases and layer-norm
/// parameters stay float32 and the source model is not modified.
QuantizedReceiver quantize_model(const NeuralReceiver& model, const quant::QuantConfig& config,
                                 QuantizationReport* report = nullptr);
QuantizedReceiver to_float16(const NeuralReceiver& model);

/// The float receiver whose kernels equal the stored kernels' decoded values.
/// Throws if any conv layer has no stored kernel.
NeuralReceiver dequantize_model(const QuantizedReceiver& qmodel);

/// Weight-only quantized inference: float activations over decoded kernels.
Tensor forward_quantized(const QuantizedReceiver& qmodel, const Tensor& features);

/// Per conv layer statistics over kernel weights.
std::vector<quant::LayerWeightStats> weight_stats(const NeuralReceiver& model, std::size_t bins);

/// Sum over conv kernels of the squared error between two models' kernels,
/// divided by the total kernel element count.
double kernel_mse(const NeuralReceiver& a, const NeuralReceiver& b);

}  // namespace nrx
