// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/receiver.hpp"

#include "nrx/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace nrx {

ReceiverConfig ReceiverConfig::full_size() {
  ReceiverConfig c;
  c.num_blocks = 8;
  c.channels = 128;
  c.bits_per_symbol = 6;
  return c;
}

ReceiverConfig ReceiverConfig::desk_scale() { return ReceiverConfig{}; }

void ReceiverConfig::validate() const {
  if (num_blocks == 0) throw std::invalid_argument("ReceiverConfig: num_blocks must be >= 1");
  if (channels == 0) throw std::invalid_argument("ReceiverConfig: channels must be >= 1");
  if (num_rx == 0) throw std::invalid_argument("ReceiverConfig: num_rx must be >= 1");
  if (bits_per_symbol != 1 && bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6) {
    throw std::invalid_argument("ReceiverConfig: bits_per_symbol must match a supported constellation");
  }
  ConvSpec{1, 1, kernel_h, kernel_w, dilation_h, dilation_w}.validate();
}

namespace {

ConvSpec make_spec(const ReceiverConfig& c, std::size_t cin, std::size_t cout) {
  return ConvSpec{cin, cout, c.kernel_h, c.kernel_w, c.dilation_h, c.dilation_w};
}

ConvLayer make_conv(std::string name, const ConvSpec& spec, Philox& rng) {
  ConvLayer layer{std::move(name), spec, Tensor(spec.kernel_shape()), Tensor({spec.out_channels})};
  const double stddev = std::sqrt(2.0 / static_cast<double>(spec.patch_size()));
  for (float& w : layer.kernel.data()) w = static_cast<float>(stddev * rng.normal());
  return layer;
}

NormLayer make_norm(std::string name, std::size_t c) {
  return NormLayer{std::move(name), Tensor({c}, 1.0f), Tensor({c}, 0.0f)};
}

}  // namespace

std::vector<ConvLayer*> NeuralReceiver::conv_layers() {
  std::vector<ConvLayer*> out{&input_conv};
  for (auto& b : blocks) {
    out.push_back(&b.conv1);
    out.push_back(&b.conv2);
  }
  out.push_back(&output_conv);
  return out;
}

std::vector<const ConvLayer*> NeuralReceiver::conv_layers() const {
  std::vector<const ConvLayer*> out{&input_conv};
  for (const auto& b : blocks) {
    out.push_back(&b.conv1);
    out.push_back(&b.conv2);
  }
  out.push_back(&output_conv);
  return out;
}

std::vector<NormLayer*> NeuralReceiver::norm_layers() {
  std::vector<NormLayer*> out;
  for (auto& b : blocks) {
    out.push_back(&b.norm1);
    out.push_back(&b.norm2);
  }
  return out;
}

std::vector<const NormLayer*> NeuralReceiver::norm_layers() const {
  std::vector<const NormLayer*> out;
  for (const auto& b : blocks) {
    out.push_back(&b.norm1);
    out.push_back(&b.norm2);
  }
  return out;
}

std::vector<Tensor*> NeuralReceiver::parameters() {
  std::vector<Tensor*> out;
  for (ConvLayer* c : conv_layers()) {
    out.push_back(&c->kernel);
    out.push_back(&c->bias);
  }
  for (NormLayer* n : norm_layers()) {
    out.push_back(&n->gamma);
    out.push_back(&n->beta);
  }
  return out;
}

std::vector<const Tensor*> NeuralReceiver::parameters() const {
  std::vector<const Tensor*> out;
  for (const ConvLayer* c : conv_layers()) {
    out.push_back(&c->kernel);
    out.push_back(&c->bias);
  }
  for (const NormLayer* n : norm_layers()) {
    out.push_back(&n->gamma);
    out.push_back(&n->beta);
  }
  return out;
}

std::vector<std::string> NeuralReceiver::parameter_names() const {
  std::vector<std::string> out;
  for (const ConvLayer* c : conv_layers()) {
    out.push_back(c->name + ".kernel");
    out.push_back(c->name + ".bias");
  }
  for (const NormLayer* n : norm_layers()) {
    out.push_back(n->name + ".gamma");
    out.push_back(n->name + ".beta");
  }
  return out;
}

std::size_t NeuralReceiver::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : parameters()) n += t->size();
  return n;
}

std::size_t parameter_count(const ReceiverConfig& c) {
  const std::size_t k = c.kernel_h * c.kernel_w;
  const std::size_t input = k * c.input_channels() * c.channels + c.channels;
  const std::size_t block = 2 * (k * c.channels * c.channels + c.channels) + 2 * (2 * c.channels);
  const std::size_t output = k * c.channels * c.bits_per_symbol + c.bits_per_symbol;
  return input + c.num_blocks * block + output;
}

NeuralReceiver build_receiver(const ReceiverConfig& config, std::uint64_t seed) {
  config.validate();
  Philox rng(derive_key({seed, hash_string("build_receiver")}));
  NeuralReceiver m;
  m.config = config;
  m.input_conv = make_conv("input_conv", make_spec(config, config.input_channels(), config.channels), rng);
  for (std::size_t b = 0; b < config.num_blocks; ++b) {
    const std::string prefix = "block" + std::to_string(b + 1) + "_";
    ResidualBlock blk;
    blk.norm1 = make_norm(prefix + "norm1", config.channels);
    blk.conv1 = make_conv(prefix + "conv1", make_spec(config, config.channels, config.channels), rng);
    blk.norm2 = make_norm(prefix + "norm2", config.channels);
    blk.conv2 = make_conv(prefix + "conv2", make_spec(config, config.channels, config.channels), rng);
    m.blocks.push_back(std::move(blk));
  }
  m.output_conv = make_conv("output_conv", make_spec(config, config.channels, config.bits_per_symbol), rng);
  return m;
}

Tensor featurize(const link::ResourceGrid& grid, std::span<const link::cd> pilot_values) {
  const link::GridSpec& spec = grid.spec;
  const std::size_t nr = spec.num_rx;
  const std::size_t res = spec.num_res();
  if (grid.y.size() != res * nr) {
    throw std::invalid_argument("featurize: received grid holds " + std::to_string(grid.y.size()) +
                                " samples, expected " + std::to_string(res) + " REs x " +
                                std::to_string(nr) + " antennas");
  }
  if (pilot_values.size() != res || grid.pilot_mask.size() != res) {
    throw std::invalid_argument("featurize: pilot grid does not match the resource grid");
  }
  const std::size_t c = 2 * nr + 2;
  Tensor f({spec.num_symbols, spec.num_subcarriers, c});
  for (std::size_t re = 0; re < res; ++re) {
    float* px = f.data().data() + re * c;
    for (std::size_t a = 0; a < nr; ++a) {
      px[2 * a] = static_cast<float>(grid.y[re * nr + a].real());
      px[2 * a + 1] = static_cast<float>(grid.y[re * nr + a].imag());
    }
    if (grid.pilot_mask[re]) {
      px[2 * nr] = static_cast<float>(pilot_values[re].real());
      px[2 * nr + 1] = static_cast<float>(pilot_values[re].imag());
    }
  }
  return f;
}

Tensor featurize(const link::ResourceGrid& grid) {
  const auto pilots = grid.spec.pilot_values();
  return featurize(grid, pilots);
}

Tensor forward(const NeuralReceiver& m, const Tensor& features) {
  if (features.rank() != 3 || features.dim(2) != m.input_conv.spec.in_channels) {
    throw std::invalid_argument("forward: features " + shape_string(features.shape()) +
                                " do not match the input conv (" +
                                std::to_string(m.input_conv.spec.in_channels) + " channels)");
  }
  Tensor x = conv2d(features, m.input_conv.kernel, m.input_conv.bias, m.input_conv.spec);
  for (const ResidualBlock& b : m.blocks) {
    Tensor t = relu(layer_norm(x, b.norm1.gamma, b.norm1.beta));
    t = conv2d(t, b.conv1.kernel, b.conv1.bias, b.conv1.spec);
    t = relu(layer_norm(t, b.norm2.gamma, b.norm2.beta));
    t = conv2d(t, b.conv2.kernel, b.conv2.bias, b.conv2.spec);
    x = add(x, t);
  }
  return conv2d(x, m.output_conv.kernel, m.output_conv.bias, m.output_conv.spec);
}

autograd::Var forward_on_tape(autograd::Tape& tape, const NeuralReceiver& m, autograd::Var features,
                              std::vector<autograd::Var>& params) {
  params.clear();
  for (const Tensor* p : m.parameters()) params.push_back(tape.leaf(*p, true));
  // Index layout follows parameters(): conv layers first, then norm layers.
  const std::size_t num_conv = 2 + 2 * m.blocks.size();
  auto kernel = [&](std::size_t conv) { return params[2 * conv]; };
  auto bias = [&](std::size_t conv) { return params[2 * conv + 1]; };
  auto gamma = [&](std::size_t norm) { return params[2 * num_conv + 2 * norm]; };
  auto beta = [&](std::size_t norm) { return params[2 * num_conv + 2 * norm + 1]; };

  autograd::Var x = tape.conv2d(features, kernel(0), bias(0), m.input_conv.spec);
  for (std::size_t b = 0; b < m.blocks.size(); ++b) {
    const ResidualBlock& blk = m.blocks[b];
    autograd::Var t = tape.relu(tape.layer_norm(x, gamma(2 * b), beta(2 * b)));
    t = tape.conv2d(t, kernel(1 + 2 * b), bias(1 + 2 * b), blk.conv1.spec);
    t = tape.relu(tape.layer_norm(t, gamma(2 * b + 1), beta(2 * b + 1)));
    t = tape.conv2d(t, kernel(2 + 2 * b), bias(2 + 2 * b), blk.conv2.spec);
    x = tape.add(x, t);
  }
  return tape.conv2d(x, kernel(num_conv - 1), bias(num_conv - 1), m.output_conv.spec);
}

}  // namespace nrx
