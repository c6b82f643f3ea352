// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/autograd.hpp"
#include "nrx/grid.hpp"
#include "nrx/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nrx {

/// Geometry of the convolutional receiver: an input conv, `num_blocks`
/// residual blocks of `channels` width, and an output conv producing one
/// logit per bit of the constellation symbol.
struct ReceiverConfig {
  std::size_t num_blocks = 2;
  std::size_t channels = 16;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t dilation_h = 1;
  std::size_t dilation_w = 1;
  std::size_t bits_per_symbol = 2;
  std::size_t num_rx = 2;

  /// 8 blocks, 128 channels, 64-QAM output, 2 receive antennas.
  static ReceiverConfig full_size();
  /// 2 blocks, 16 channels, QPSK output, 2 receive antennas.
  static ReceiverConfig desk_scale();

  /// Features: Re/Im of y per antenna, then Re/Im of the known pilot value.
  std::size_t input_channels() const noexcept { return 2 * num_rx + 2; }
  void validate() const;
  friend bool operator==(const ReceiverConfig&, const ReceiverConfig&) = default;
};

struct ConvLayer {
  std::string name;
  ConvSpec spec;
  Tensor kernel;  // [kh, kw, Cin, Cout]
  Tensor bias;    // [Cout]

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

struct NormLayer {
  std::string name;
  Tensor gamma;
  Tensor beta;

  friend bool operator==(const NormLayer&, const NormLayer&) = default;
};

/// Pre-activation block: x + conv2(relu(ln2(conv1(relu(ln1(x)))))).
struct ResidualBlock {
  NormLayer norm1;
  ConvLayer conv1;
  NormLayer norm2;
  ConvLayer conv2;

  friend bool operator==(const ResidualBlock&, const ResidualBlock&) = default;
};

struct NeuralReceiver {
  ReceiverConfig config;
  ConvLayer input_conv;
  std::vector<ResidualBlock> blocks;
  ConvLayer output_conv;

  std::vector<ConvLayer*> conv_layers();
  std::vector<const ConvLayer*> conv_layers() const;
  std::vector<NormLayer*> norm_layers();
  std::vector<const NormLayer*> norm_layers() const;

  /// Every trainable tensor, in a fixed order: for each conv layer its
  /// kernel then bias, for each norm layer gamma then beta, walking the
  /// network from input to output.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;

  friend bool operator==(const NeuralReceiver&, const NeuralReceiver&) = default;
};

/// Closed-form parameter count of a configuration.
std::size_t parameter_count(const ReceiverConfig& config);

/// Kernels drawn N(0, 2 / fan_in) from the seed; biases and beta 0, gamma 1.
NeuralReceiver build_receiver(const ReceiverConfig& config, std::uint64_t seed);

/// Input features [num_symbols, num_subcarriers, 2 * num_rx + 2] from the
/// received grid and the known pilot values (indexed like ResourceGrid::x,
/// zero at data REs).
Tensor featurize(const link::ResourceGrid& grid, std::span<const link::cd> pilot_values);
/// Uses the pilot sequence of the grid's GridSpec.
Tensor featurize(const link::ResourceGrid& grid);

/// Logits [H, W, bits_per_symbol]; positive favors bit 1.
Tensor forward(const NeuralReceiver& model, const Tensor& features);

/// Records the forward pass on a tape. `params` receives one leaf per entry
/// of parameters(), in the same order.
autograd::Var forward_on_tape(autograd::Tape& tape, const NeuralReceiver& model,
                              autograd::Var features, std::vector<autograd::Var>& params);

}  // namespace nrx
