// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/model_quantization.hpp"

#include "nrx/half.hpp"

#include <stdexcept>

namespace nrx {

std::string to_string(KernelFormat f) {
  switch (f) {
    case KernelFormat::float32: return "float32";
    case KernelFormat::float16: return "float16";
    case KernelFormat::integer: return "integer";
  }
  return "unknown";
}

Tensor StoredKernel::decode() const {
  switch (format) {
    case KernelFormat::float32:
      return full;
    case KernelFormat::float16: {
      Tensor t(shape);
      if (half.size() != t.size()) throw std::runtime_error("StoredKernel: " + name + " float16 payload size mismatch");
      for (std::size_t i = 0; i < half.size(); ++i) t[i] = half_to_float(half[i]);
      return t;
    }
    case KernelFormat::integer:
      return quant::dequantize(quantized);
  }
  throw std::logic_error("StoredKernel: unknown format");
}

std::size_t StoredKernel::payload_bytes() const {
  const std::size_t n = shape_numel(shape);
  switch (format) {
    case KernelFormat::float32: return 4 * n;
    case KernelFormat::float16: return 2 * n;
    case KernelFormat::integer: return quant::packed_size(quantized.config.bit_width, n);
  }
  return 0;
}

std::size_t StoredKernel::num_scales() const noexcept {
  return format == KernelFormat::integer ? quantized.scales.size() : 0;
}

const StoredKernel* QuantizedReceiver::find(const std::string& layer) const noexcept {
  for (const auto& k : kernels) {
    if (k.name == layer) return &k;
  }
  return nullptr;
}

QuantizedReceiver quantize_model(const NeuralReceiver& model, const quant::QuantConfig& config,
                                 QuantizationReport* report) {
  config.validate();
  QuantizedReceiver q;
  q.base = model;
  q.format = KernelFormat::integer;
  q.config = config;
  QuantizationReport local;
  for (const ConvLayer* layer : model.conv_layers()) {
    StoredKernel k;
    k.name = layer->name;
    k.shape = layer->kernel.shape();
    k.format = KernelFormat::integer;
    k.quantized = quant::quantize(layer->kernel, config);
    if (k.quantized.degenerate_scales > 0) {
      local.degenerate_scales += k.quantized.degenerate_scales;
      local.degenerate_layers.push_back(layer->name);
    }
    q.kernels.push_back(std::move(k));
  }
  if (report) *report = std::move(local);
  return q;
}

QuantizedReceiver to_float16(const NeuralReceiver& model) {
  QuantizedReceiver q;
  q.base = model;
  q.format = KernelFormat::float16;
  for (const ConvLayer* layer : model.conv_layers()) {
    StoredKernel k;
    k.name = layer->name;
    k.shape = layer->kernel.shape();
    k.format = KernelFormat::float16;
    k.half.reserve(layer->kernel.size());
    for (float w : layer->kernel.data()) k.half.push_back(float_to_half(w));
    q.kernels.push_back(std::move(k));
  }
  return q;
}

NeuralReceiver dequantize_model(const QuantizedReceiver& qmodel) {
  NeuralReceiver m = qmodel.base;
  for (ConvLayer* layer : m.conv_layers()) {
    const StoredKernel* k = qmodel.find(layer->name);
    if (!k) throw std::runtime_error("quantized model has no kernel record for layer " + layer->name);
    if (k->shape != layer->kernel.shape()) {
      throw std::runtime_error("kernel record " + layer->name + " has shape " + shape_string(k->shape) +
                               ", layer expects " + shape_string(layer->kernel.shape()));
    }
    layer->kernel = k->decode();
  }
  return m;
}

Tensor forward_quantized(const QuantizedReceiver& qmodel, const Tensor& features) {
  return forward(dequantize_model(qmodel), features);
}

std::vector<quant::LayerWeightStats> weight_stats(const NeuralReceiver& model, std::size_t bins) {
  std::vector<quant::LayerWeightStats> out;
  for (const ConvLayer* layer : model.conv_layers()) out.push_back(quant::tensor_stats(layer->name, layer->kernel, bins));
  return out;
}

double kernel_mse(const NeuralReceiver& a, const NeuralReceiver& b) {
  const auto la = a.conv_layers();
  const auto lb = b.conv_layers();
  if (la.size() != lb.size()) throw std::invalid_argument("kernel_mse: models have different layer counts");
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < la.size(); ++i) {
    const auto x = la[i]->kernel.data();
    const auto y = lb[i]->kernel.data();
    if (x.size() != y.size()) throw std::invalid_argument("kernel_mse: layer " + la[i]->name + " shapes differ");
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = static_cast<double>(x[j]) - static_cast<double>(y[j]);
      sq += d * d;
    }
    n += x.size();
  }
  return n ? sq / static_cast<double>(n) : 0.0;
}

}  // namespace nrx
