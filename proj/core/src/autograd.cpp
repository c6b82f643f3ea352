// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/autograd.hpp"

#include "nrx/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace nrx {

namespace {

void check_bce_shapes(const Tensor& targets, const Tensor& logits, const Tensor* mask) {
  if (targets.shape() != logits.shape()) {
    throw std::invalid_argument("bce_with_logits: target shape " + shape_string(targets.shape()) +
                                " does not match logit shape " + shape_string(logits.shape()));
  }
  if (mask && mask->shape() != logits.shape()) {
    throw std::invalid_argument("bce_with_logits: mask shape " + shape_string(mask->shape()) +
                                " does not match logit shape " + shape_string(logits.shape()));
  }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double bce_impl(const Tensor& targets, const Tensor& logits, const Tensor* mask) {
  check_bce_shapes(targets, logits, mask);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask && (*mask)[i] == 0.0f) continue;
    const double l = logits[i];
    total += softplus(l) - static_cast<double>(targets[i]) * l;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("bce_with_logits: mask selects no elements");
  return total / static_cast<double>(count);
}

}  // namespace

double bce_with_logits(const Tensor& targets, const Tensor& logits) {
  return bce_impl(targets, logits, nullptr);
}

double bce_with_logits(const Tensor& targets, const Tensor& logits, const Tensor& mask) {
  return bce_impl(targets, logits, &mask);
}

Tensor bce_with_logits_grad(const Tensor& targets, const Tensor& logits, const Tensor& mask) {
  check_bce_shapes(targets, logits, &mask);
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) count += mask[i] != 0.0f;
  if (count == 0) throw std::invalid_argument("bce_with_logits: mask selects no elements");
  Tensor grad(logits.shape());
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i] == 0.0f) continue;
    const double sig = 1.0 / (1.0 + std::exp(-static_cast<double>(logits[i])));
    grad[i] = static_cast<float>((sig - targets[i]) * inv);
  }
  return grad;
}

namespace autograd {

Var Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&, Node&)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("Tape: invalid variable handle");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("Tape: invalid variable handle");
  return nodes_[v.id];
}

void Tape::accumulate(Var v, const Tensor& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) n.grad[i] += g[i];
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Var Tape::conv2d(Var input, Var kernel, Var bias, const ConvSpec& spec) {
  Tensor out = nrx::conv2d(value(input), value(kernel), value(bias), spec);
  const bool rg = node(input).requires_grad || node(kernel).requires_grad || node(bias).requires_grad;
  return push(std::move(out), rg, [input, kernel, bias, spec](Tape& t, Node& self) {
    Conv2dGrads g = conv2d_backward(t.value(input), t.value(kernel), spec, self.grad);
    t.accumulate(input, g.input);
    t.accumulate(kernel, g.kernel);
    t.accumulate(bias, g.bias);
  });
}

Var Tape::layer_norm(Var input, Var gamma, Var beta, float eps) {
  Tensor out = nrx::layer_norm(value(input), value(gamma), value(beta), eps);
  const bool rg = node(input).requires_grad || node(gamma).requires_grad || node(beta).requires_grad;
  return push(std::move(out), rg, [input, gamma, beta, eps](Tape& t, Node& self) {
    LayerNormGrads g = layer_norm_backward(t.value(input), t.value(gamma), eps, self.grad);
    t.accumulate(input, g.input);
    t.accumulate(gamma, g.gamma);
    t.accumulate(beta, g.beta);
  });
}

Var Tape::relu(Var input) {
  Tensor out = nrx::relu(value(input));
  return push(std::move(out), node(input).requires_grad, [input](Tape& t, Node& self) {
    t.accumulate(input, relu_backward(t.value(input), self.grad));
  });
}

Var Tape::add(Var a, Var b) {
  Tensor out = nrx::add(value(a), value(b));
  const bool rg = node(a).requires_grad || node(b).requires_grad;
  return push(std::move(out), rg, [a, b](Tape& t, Node& self) {
    t.accumulate(a, self.grad);
    t.accumulate(b, self.grad);
  });
}

Var Tape::sum(Var input) {
  double total = 0.0;
  for (float x : value(input).data()) total += x;
  Tensor out({1}, static_cast<float>(total));
  return push(std::move(out), node(input).requires_grad, [input](Tape& t, Node& self) {
    Tensor g(t.value(input).shape(), self.grad[0]);
    t.accumulate(input, g);
  });
}

Var Tape::bce_with_logits(Var logits, const Tensor& targets, const Tensor& mask) {
  const double loss = nrx::bce_with_logits(targets, value(logits), mask);
  Tensor out({1}, static_cast<float>(loss));
  return push(std::move(out), node(logits).requires_grad,
              [logits, targets, mask](Tape& t, Node& self) {
                Tensor g = bce_with_logits_grad(targets, t.value(logits), mask);
                const float scale = self.grad[0];
                for (float& x : g.data()) x *= scale;
                t.accumulate(logits, g);
              });
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.empty()) {
    static const Tensor kEmpty;
    return kEmpty;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  Node& root = node(loss);
  if (root.value.size() != 1) {
    throw std::invalid_argument("Tape::backward: loss must be a scalar, got shape " +
                                shape_string(root.value.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  root.grad = Tensor(root.value.shape(), 1.0f);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty() || !n.requires_grad) continue;
    n.backward(*this, n);
  }
}

}  // namespace autograd
}  // namespace nrx
