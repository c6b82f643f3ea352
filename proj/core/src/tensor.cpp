// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nrx {

namespace {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

[[noreturn]] void shape_error(const std::string& op, const std::string& what) {
  throw std::invalid_argument(op + ": " + what);
}

struct ConvGeometry {
  std::size_t height;
  std::size_t width;
  std::size_t pad_top;
  std::size_t pad_left;
};

ConvGeometry check_conv(const Tensor& input, const Tensor& kernel, const ConvSpec& spec) {
  spec.validate();
  if (input.rank() != 3) {
    shape_error("conv2d", "input must be rank 3 [H, W, C], got " + shape_string(input.shape()));
  }
  if (input.dim(2) != spec.in_channels) {
    shape_error("conv2d", "input channel axis (axis 2) has " + std::to_string(input.dim(2)) +
                              " entries but spec.in_channels is " +
                              std::to_string(spec.in_channels));
  }
  if (kernel.shape() != spec.kernel_shape()) {
    const char* axes[] = {"kernel height (axis 0)", "kernel width (axis 1)",
                          "kernel input channels (axis 2)", "kernel output channels (axis 3)"};
    const Shape expected = spec.kernel_shape();
    if (kernel.rank() != 4) {
      shape_error("conv2d", "kernel must be rank 4 [kh, kw, Cin, Cout], got " +
                                shape_string(kernel.shape()));
    }
    for (std::size_t a = 0; a < 4; ++a) {
      if (kernel.dim(a) != expected[a]) {
        shape_error("conv2d", std::string(axes[a]) + " is " + std::to_string(kernel.dim(a)) +
                                  ", expected " + std::to_string(expected[a]));
      }
    }
  }
  const std::size_t extent_h = (spec.kernel_h - 1) * spec.dilation_h;
  const std::size_t extent_w = (spec.kernel_w - 1) * spec.dilation_w;
  return {input.dim(0), input.dim(1), extent_h / 2, extent_w / 2};
}

// Patch matrix [H*W, kh*kw*Cin]; column order matches the row-major kernel
// flattening so that output = patches * kernel.reshape(kh*kw*Cin, Cout).
RowMatrixXd im2col(const Tensor& input, const ConvSpec& spec, const ConvGeometry& g) {
  const std::size_t cin = spec.in_channels;
  RowMatrixXd patches = RowMatrixXd::Zero(static_cast<Eigen::Index>(g.height * g.width),
                                          static_cast<Eigen::Index>(spec.patch_size()));
  const float* src = input.data().data();
  for (std::size_t h = 0; h < g.height; ++h) {
    for (std::size_t w = 0; w < g.width; ++w) {
      double* row = patches.row(static_cast<Eigen::Index>(h * g.width + w)).data();
      for (std::size_t a = 0; a < spec.kernel_h; ++a) {
        const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(h + a * spec.dilation_h) -
                                  static_cast<std::ptrdiff_t>(g.pad_top);
        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
        for (std::size_t b = 0; b < spec.kernel_w; ++b) {
          const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(w + b * spec.dilation_w) -
                                    static_cast<std::ptrdiff_t>(g.pad_left);
          if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.width)) continue;
          const float* pix = src + (static_cast<std::size_t>(ih) * g.width +
                                    static_cast<std::size_t>(iw)) * cin;
          double* dst = row + (a * spec.kernel_w + b) * cin;
          for (std::size_t c = 0; c < cin; ++c) dst[c] = pix[c];
        }
      }
    }
  }
  return patches;
}

void col2im(const RowMatrixXd& grad_patches, const ConvSpec& spec, const ConvGeometry& g,
            std::vector<double>& grad_input) {
  const std::size_t cin = spec.in_channels;
  for (std::size_t h = 0; h < g.height; ++h) {
    for (std::size_t w = 0; w < g.width; ++w) {
      const double* row = grad_patches.row(static_cast<Eigen::Index>(h * g.width + w)).data();
      for (std::size_t a = 0; a < spec.kernel_h; ++a) {
        const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(h + a * spec.dilation_h) -
                                  static_cast<std::ptrdiff_t>(g.pad_top);
        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height)) continue;
        for (std::size_t b = 0; b < spec.kernel_w; ++b) {
          const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(w + b * spec.dilation_w) -
                                    static_cast<std::ptrdiff_t>(g.pad_left);
          if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.width)) continue;
          double* pix = grad_input.data() + (static_cast<std::size_t>(ih) * g.width +
                                             static_cast<std::size_t>(iw)) * cin;
          const double* src = row + (a * spec.kernel_w + b) * cin;
          for (std::size_t c = 0; c < cin; ++c) pix[c] += src[c];
        }
      }
    }
  }
}

RowMatrixXd kernel_matrix(const Tensor& kernel, const ConvSpec& spec) {
  Eigen::Map<const RowMatrixXf> k(kernel.data().data(),
                                  static_cast<Eigen::Index>(spec.patch_size()),
                                  static_cast<Eigen::Index>(spec.out_channels));
  return k.cast<double>();
}

void check_layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, float eps) {
  if (!(eps > 0.0f)) shape_error("layer_norm", "eps must be positive");
  if (input.rank() != 3) {
    shape_error("layer_norm", "input must be rank 3 [H, W, C], got " + shape_string(input.shape()));
  }
  const std::size_t c = input.dim(2);
  if (gamma.size() != c) {
    shape_error("layer_norm", "gamma has " + std::to_string(gamma.size()) +
                                  " entries but input channel axis (axis 2) has " +
                                  std::to_string(c));
  }
  if (beta.size() != c) {
    shape_error("layer_norm", "beta has " + std::to_string(beta.size()) +
                                  " entries but input channel axis (axis 2) has " +
                                  std::to_string(c));
  }
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("Tensor: zero-sized dimension in " + shape_string(shape_));
  }
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("Tensor: zero-sized dimension in " + shape_string(shape_));
  }
  if (shape_numel(shape_) != data_.size()) {
    throw std::invalid_argument("Tensor: shape " + shape_string(shape_) + " needs " +
                                std::to_string(shape_numel(shape_)) + " values, got " +
                                std::to_string(data_.size()));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::out_of_range("Tensor::dim: axis " + std::to_string(axis) + " out of range for " +
                            shape_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw std::out_of_range("Tensor::offset: rank mismatch for " + shape_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw std::out_of_range("Tensor::offset: index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

void Tensor::fill(float value) noexcept { std::fill(data_.begin(), data_.end(), value); }

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0) throw std::invalid_argument("ConvSpec: channel counts must be >= 1");
  if (kernel_h == 0 || kernel_w == 0) throw std::invalid_argument("ConvSpec: kernel entries must be >= 1");
  if (dilation_h == 0 || dilation_w == 0) throw std::invalid_argument("ConvSpec: dilation entries must be >= 1");
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, const ConvSpec& spec) {
  const ConvGeometry g = check_conv(input, kernel, spec);
  if (bias.size() != spec.out_channels) {
    shape_error("conv2d", "bias has " + std::to_string(bias.size()) + " entries, expected " +
                              std::to_string(spec.out_channels) + " (output channels)");
  }
  const RowMatrixXd patches = im2col(input, spec, g);
  RowMatrixXd out = patches * kernel_matrix(kernel, spec);
  Tensor result({g.height, g.width, spec.out_channels});
  float* dst = result.data().data();
  const std::size_t cout = spec.out_channels;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < cout; ++c) {
      dst[static_cast<std::size_t>(r) * cout + c] =
          static_cast<float>(out(r, static_cast<Eigen::Index>(c)) + static_cast<double>(bias[c]));
    }
  }
  return result;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel, const ConvSpec& spec,
                            const Tensor& grad_output) {
  const ConvGeometry g = check_conv(input, kernel, spec);
  const Shape out_shape{g.height, g.width, spec.out_channels};
  if (grad_output.shape() != out_shape) {
    shape_error("conv2d_backward", "grad_output shape " + shape_string(grad_output.shape()) +
                                       " does not match output shape " + shape_string(out_shape));
  }
  const RowMatrixXd patches = im2col(input, spec, g);
  Eigen::Map<const RowMatrixXf> go_f(grad_output.data().data(),
                                     static_cast<Eigen::Index>(g.height * g.width),
                                     static_cast<Eigen::Index>(spec.out_channels));
  const RowMatrixXd go = go_f.cast<double>();

  Conv2dGrads grads;
  const RowMatrixXd dk = patches.transpose() * go;
  grads.kernel = Tensor(spec.kernel_shape());
  for (Eigen::Index r = 0; r < dk.rows(); ++r) {
    for (Eigen::Index c = 0; c < dk.cols(); ++c) {
      grads.kernel[static_cast<std::size_t>(r * dk.cols() + c)] = static_cast<float>(dk(r, c));
    }
  }
  grads.bias = Tensor({spec.out_channels});
  const Eigen::RowVectorXd db = go.colwise().sum();
  for (std::size_t c = 0; c < spec.out_channels; ++c) {
    grads.bias[c] = static_cast<float>(db(static_cast<Eigen::Index>(c)));
  }

  const RowMatrixXd dpatches = go * kernel_matrix(kernel, spec).transpose();
  std::vector<double> dinput(input.size(), 0.0);
  col2im(dpatches, spec, g, dinput);
  grads.input = Tensor(input.shape());
  for (std::size_t i = 0; i < dinput.size(); ++i) grads.input[i] = static_cast<float>(dinput[i]);
  return grads;
}

Tensor layer_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta, float eps) {
  check_layer_norm(input, gamma, beta, eps);
  const std::size_t c = input.dim(2);
  const std::size_t positions = input.size() / c;
  Tensor out(input.shape());
  for (std::size_t p = 0; p < positions; ++p) {
    const float* x = input.data().data() + p * c;
    float* y = out.data().data() + p * c;
    double mean = 0.0;
    for (std::size_t k = 0; k < c; ++k) mean += x[k];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t k = 0; k < c; ++k) var += (x[k] - mean) * (x[k] - mean);
    var /= static_cast<double>(c);
    const double rstd = 1.0 / std::sqrt(var + static_cast<double>(eps));
    for (std::size_t k = 0; k < c; ++k) {
      y[k] = static_cast<float>((x[k] - mean) * rstd * gamma[k] + beta[k]);
    }
  }
  return out;
}

LayerNormGrads layer_norm_backward(const Tensor& input, const Tensor& gamma, float eps,
                                   const Tensor& grad_output) {
  check_layer_norm(input, gamma, gamma, eps);
  if (grad_output.shape() != input.shape()) {
    shape_error("layer_norm_backward", "grad_output shape " + shape_string(grad_output.shape()) +
                                           " does not match input " + shape_string(input.shape()));
  }
  const std::size_t c = input.dim(2);
  const std::size_t positions = input.size() / c;
  std::vector<double> dgamma(c, 0.0), dbeta(c, 0.0), xhat(c), dxhat(c);
  LayerNormGrads grads{Tensor(input.shape()), Tensor({c}), Tensor({c})};
  for (std::size_t p = 0; p < positions; ++p) {
    const float* x = input.data().data() + p * c;
    const float* g = grad_output.data().data() + p * c;
    float* dx = grads.input.data().data() + p * c;
    double mean = 0.0;
    for (std::size_t k = 0; k < c; ++k) mean += x[k];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t k = 0; k < c; ++k) var += (x[k] - mean) * (x[k] - mean);
    var /= static_cast<double>(c);
    const double rstd = 1.0 / std::sqrt(var + static_cast<double>(eps));
    double sum_d = 0.0, sum_dx = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      xhat[k] = (x[k] - mean) * rstd;
      dgamma[k] += g[k] * xhat[k];
      dbeta[k] += g[k];
      dxhat[k] = static_cast<double>(g[k]) * gamma[k];
      sum_d += dxhat[k];
      sum_dx += dxhat[k] * xhat[k];
    }
    const double inv_c = 1.0 / static_cast<double>(c);
    for (std::size_t k = 0; k < c; ++k) {
      dx[k] = static_cast<float>(rstd * (dxhat[k] - sum_d * inv_c - xhat[k] * sum_dx * inv_c));
    }
  }
  for (std::size_t k = 0; k < c; ++k) {
    grads.gamma[k] = static_cast<float>(dgamma[k]);
    grads.beta[k] = static_cast<float>(dbeta[k]);
  }
  return grads;
}

Tensor relu(const Tensor& input) {
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0f ? input[i] : 0.0f;
  return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
  if (grad_output.shape() != input.shape()) {
    shape_error("relu_backward", "grad_output shape " + shape_string(grad_output.shape()) +
                                     " does not match input " + shape_string(input.shape()));
  }
  Tensor out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0f ? grad_output[i] : 0.0f;
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    shape_error("add", "operand shapes differ: " + shape_string(a.shape()) + " vs " +
                           shape_string(b.shape()));
  }
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

}  // namespace nrx
