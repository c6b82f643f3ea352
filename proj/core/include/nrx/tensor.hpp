// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace nrx {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major float32 tensor. The last axis is contiguous, so an
/// activation map [H, W, C] stores all channels of one position together.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  std::vector<float>& storage() noexcept { return data_; }
  const std::vector<float>& storage() const noexcept { return data_; }

  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  std::size_t offset(std::initializer_list<std::size_t> index) const;
  float& at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
  float at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

  bool all_finite() const noexcept;
  void fill(float value) noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// 2-D convolution geometry. Padding is always "same" with zero fill.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t dilation_h = 1;
  std::size_t dilation_w = 1;

  void validate() const;
  Shape kernel_shape() const { return {kernel_h, kernel_w, in_channels, out_channels}; }
  std::size_t patch_size() const { return kernel_h * kernel_w * in_channels; }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

inline constexpr float kLayerNormEps = 1e-5f;

// Forward kernels. All are pure; reductions accumulate in double.

/// Cross-correlation of input [H, W, Cin] with kernel [kh, kw, Cin, Cout]
/// plus bias [Cout]. Output is [H, W, Cout].
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, const ConvSpec& spec);

/// Per-position normalization over the channel axis of [H, W, C].
Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  float eps = kLayerNormEps);

Tensor relu(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);

// Backward kernels, given the upstream gradient of the op's output.

struct Conv2dGrads {
  Tensor input;
  Tensor kernel;
  Tensor bias;
};
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel, const ConvSpec& spec,
                            const Tensor& grad_output);

struct LayerNormGrads {
  Tensor input;
  Tensor gamma;
  Tensor beta;
};
LayerNormGrads layer_norm_backward(const Tensor& input, const Tensor& gamma, float eps,
                                   const Tensor& grad_output);

/// Subgradient at exactly zero is zero.
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);

}  // namespace nrx
