// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/link.hpp"
#include "nrx/receiver.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nrx::train {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moments per parameter element, in double.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One bias-corrected Adam update. An empty state is sized on first use.
/// Throws NonFiniteGradient, before touching any parameter, if a gradient
/// element is NaN or infinite.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double learning_rate, const AdamConfig& config = {});

/// One supervised example: features, target bits, and a 0/1 mask selecting
/// the data-RE payload bits that enter the loss.
struct TrainingSample {
  Tensor features;  // [H, W, 2 * num_rx + 2]
  Tensor targets;   // [H, W, bps]
  Tensor mask;      // [H, W, bps]
};

TrainingSample make_sample(const link::Block& block);

struct ChannelProfile {
  std::string name;
  std::size_t num_taps = 6;
  double delay_spread_lo = 10e-9;
  double delay_spread_hi = 100e-9;
};

struct VelocityTier {
  std::string name;
  double lo = 0.0;
  double hi = 50.0;
};

struct TrainPhase {
  std::size_t iterations = 0;
  double ebno_lo = -2.0;
  double ebno_hi = 15.0;
  double learning_rate = 1e-3;
};

struct TrainConfig {
  ReceiverConfig receiver = ReceiverConfig::desk_scale();
  std::vector<TrainPhase> phases{{5000, -2.0, 15.0, 1e-3}, {3000, 7.0, 12.0, 3e-4}};
  std::size_t batch_size = 16;
  double l2_coeff = 1e-7;
  /// The channel profile advances every channel_period iterations and the
  /// velocity tier every velocity_period iterations, cycling through each list.
  std::size_t channel_period = 100;
  std::size_t velocity_period = 1000;
  std::vector<ChannelProfile> channel_profiles{
      {"short", 4, 10e-9, 40e-9}, {"medium", 6, 30e-9, 70e-9}, {"long", 8, 60e-9, 100e-9}};
  std::vector<VelocityTier> velocity_tiers{{"low", 0.0, 5.1}, {"medium", 10.0, 20.0}, {"high", 25.0, 50.0}};
  link::ChannelKind channel_kind = link::ChannelKind::tdl;
  std::size_t checkpoint_every = 500;
  std::uint64_t seed = 1;
  AdamConfig adam;

  void validate() const;
  std::size_t total_iterations() const noexcept;
  /// Phase active at an iteration (the last phase past the end).
  const TrainPhase& phase_at(std::size_t iteration) const;
  link::Scenario scenario_at(std::size_t iteration) const;

  /// Keys absent from the JSON object keep their defaults.
  static TrainConfig from_json(const std::string& text);
  static TrainConfig from_file(const std::string& path);
};

/// Seed-ordered sample source: sample (iteration, index) depends on nothing
/// else, so a run can be replayed or resumed.
class LinkSampler {
 public:
  LinkSampler(const TrainConfig& config, link::LinkSetup setup);
  TrainingSample sample(std::size_t iteration, std::size_t index) const;
  const link::LinkSetup& setup() const noexcept { return setup_; }

 private:
  TrainConfig config_;
  link::LinkSetup setup_;
};

struct LossRecord {
  std::size_t iteration = 0;
  double loss = 0.0;     // mean BCE plus l2_term
  double l2_term = 0.0;  // l2_coeff * sum of squared kernel weights
};

struct TrainResult {
  NeuralReceiver model;
  std::vector<LossRecord> trace;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, NeuralReceiver checkpoint, std::size_t checkpoint_iteration)
      : std::runtime_error(what), checkpoint(std::move(checkpoint)), checkpoint_iteration(checkpoint_iteration) {}
  NeuralReceiver checkpoint;
  std::size_t checkpoint_iteration;
};

/// Sum of squared conv-kernel weights scaled by coeff.
double l2_term(const NeuralReceiver& model, double coeff);

/// Mean BCE of one batch with gradients for every entry of parameters().
struct BatchGradient {
  double bce = 0.0;
  std::vector<Tensor> grads;
};
BatchGradient batch_gradient(const NeuralReceiver& model, std::span<const TrainingSample> batch);
/// batch_gradient plus the L2 term's 2 * l2_coeff * W on every conv kernel;
/// `bce` excludes the penalty.
BatchGradient regularized_gradient(const NeuralReceiver& model, std::span<const TrainingSample> batch,
                                   double l2_coeff);

using ProgressFn = std::function<void(const LossRecord&)>;

/// Trains from a fresh build_receiver(config.receiver, config.seed).
TrainResult train(const TrainConfig& config, const LinkSampler& sampler, const ProgressFn& progress = {});
/// Trains starting from `initial`.
TrainResult train(const TrainConfig& config, const LinkSampler& sampler, NeuralReceiver initial,
                  const ProgressFn& progress = {});

/// Moving average over trailing windows of `window` records.
std::vector<double> smoothed_loss(std::span<const LossRecord> trace, std::size_t window);

/// CSV with header "iteration,loss,l2_term".
std::string loss_trace_csv(std::span<const LossRecord> trace);

}  // namespace nrx::train
