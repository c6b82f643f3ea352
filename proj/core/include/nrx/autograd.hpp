// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/tensor.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace nrx::autograd {

/// Handle to a node recorded on a Tape.
struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
};

/// Reverse-mode tape over the receiver's op set. Record a forward pass by
/// calling the op methods, then call backward() on a scalar node. A tape is
/// single-use and not thread-safe; build one per sample.
class Tape {
 public:
  Var leaf(Tensor value, bool requires_grad = true);

  Var conv2d(Var input, Var kernel, Var bias, const ConvSpec& spec);
  Var layer_norm(Var input, Var gamma, Var beta, float eps = kLayerNormEps);
  Var relu(Var input);
  Var add(Var a, Var b);
  Var sum(Var input);
  /// Mean binary cross-entropy of logits against {0,1} targets, averaged
  /// over the positions where mask is nonzero. Result is a scalar.
  Var bce_with_logits(Var logits, const Tensor& targets, const Tensor& mask);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() call's loss with respect to v.
  const Tensor& grad(Var v) const;

  /// Throws std::invalid_argument unless `loss` holds exactly one element.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Tape&, Node&)> backward;
  };

  Var push(Tensor value, bool requires_grad, std::function<void(Tape&, Node&)> backward);
  Node& node(Var v);
  const Node& node(Var v) const;
  void accumulate(Var v, const Tensor& g);

  std::vector<Node> nodes_;
};

}  // namespace nrx::autograd
