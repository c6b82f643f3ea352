// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/training.hpp"

#include "json_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace nrx::train {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double learning_rate, const AdamConfig& config) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam_step: parameter and gradient counts differ");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->size(), 0.0);
      state.v[i].assign(params[i]->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adam_step: state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i]->shape() || state.m[i].size() != params[i]->size()) {
      throw std::invalid_argument("adam_step: shape mismatch for parameter " + std::to_string(i));
    }
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      if (!std::isfinite(grads[i][j])) {
        throw NonFiniteGradient("adam_step: non-finite gradient in parameter " + std::to_string(i) + " element " +
                                std::to_string(j));
      }
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto g = grads[i].data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g[j];
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * gj;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * gj * gj;
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] = static_cast<float>(p[j] - learning_rate * mhat / (std::sqrt(vhat) + config.epsilon));
    }
  }
}

TrainingSample make_sample(const link::Block& block) {
  const link::ResourceGrid& g = block.grid;
  const std::size_t bps = g.bits.size() / g.spec.num_data_res();
  TrainingSample s;
  s.features = featurize(g);
  s.targets = Tensor({g.spec.num_symbols, g.spec.num_subcarriers, bps});
  s.mask = Tensor({g.spec.num_symbols, g.spec.num_subcarriers, bps});
  const auto positions = g.spec.data_positions();
  for (std::size_t d = 0; d < positions.size(); ++d) {
    for (std::size_t k = 0; k < bps; ++k) {
      const std::size_t bit = d * bps + k;
      if (bit >= g.payload_bits) continue;
      s.targets[positions[d] * bps + k] = static_cast<float>(g.bits[bit]);
      s.mask[positions[d] * bps + k] = 1.0f;
    }
  }
  return s;
}

void TrainConfig::validate() const {
  receiver.validate();
  if (phases.empty() || total_iterations() == 0) throw std::invalid_argument("TrainConfig: no training iterations");
  for (const auto& p : phases) {
    if (p.ebno_hi < p.ebno_lo) throw std::invalid_argument("TrainConfig: phase SNR range has lo > hi");
    if (!(p.learning_rate >= 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be >= 0");
  }
  if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(l2_coeff >= 0.0)) throw std::invalid_argument("TrainConfig: l2_coeff must be >= 0");
  if (channel_period == 0 || velocity_period == 0) throw std::invalid_argument("TrainConfig: schedule periods must be >= 1");
  if (channel_profiles.empty() || velocity_tiers.empty()) {
    throw std::invalid_argument("TrainConfig: channel profile and velocity tier lists must be nonempty");
  }
}

std::size_t TrainConfig::total_iterations() const noexcept {
  std::size_t n = 0;
  for (const auto& p : phases) n += p.iterations;
  return n;
}

const TrainPhase& TrainConfig::phase_at(std::size_t iteration) const {
  for (const auto& p : phases) {
    if (iteration < p.iterations) return p;
    iteration -= p.iterations;
  }
  return phases.back();
}

link::Scenario TrainConfig::scenario_at(std::size_t iteration) const {
  const ChannelProfile& cp = channel_profiles[(iteration / channel_period) % channel_profiles.size()];
  const VelocityTier& vt = velocity_tiers[(iteration / velocity_period) % velocity_tiers.size()];
  const TrainPhase& ph = phase_at(iteration);
  link::Scenario s;
  s.kind = channel_kind;
  s.num_taps = cp.num_taps;
  s.delay_spread_lo = cp.delay_spread_lo;
  s.delay_spread_hi = cp.delay_spread_hi;
  s.velocity_lo = vt.lo;
  s.velocity_hi = vt.hi;
  s.ebno_lo = ph.ebno_lo;
  s.ebno_hi = ph.ebno_hi;
  return s;
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  using json_util::Object;
  const auto root = json_util::parse_object(text, "train config");
  Object o(root, "train config");
  TrainConfig c;
  if (auto r = o.object("receiver")) c.receiver = json_util::receiver_config(*r);
  if (auto phases = o.array("phases")) {
    c.phases.clear();
    for (std::size_t i = 0; i < phases->size(); ++i) {
      Object p((*phases)[i], "phases[" + std::to_string(i) + "]");
      TrainPhase ph;
      ph.iterations = p.get_or("iterations", ph.iterations);
      if (auto r = p.range("ebno_db")) std::tie(ph.ebno_lo, ph.ebno_hi) = *r;
      ph.learning_rate = p.get_or("learning_rate", ph.learning_rate);
      p.finish();
      c.phases.push_back(ph);
    }
  }
  c.batch_size = o.get_or("batch_size", c.batch_size);
  c.l2_coeff = o.get_or("l2_coeff", c.l2_coeff);
  c.channel_period = o.get_or("channel_period", c.channel_period);
  c.velocity_period = o.get_or("velocity_period", c.velocity_period);
  if (auto profiles = o.array("channel_profiles")) {
    c.channel_profiles.clear();
    for (std::size_t i = 0; i < profiles->size(); ++i) {
      Object p((*profiles)[i], "channel_profiles[" + std::to_string(i) + "]");
      ChannelProfile cp;
      cp.name = p.get_or("name", cp.name);
      cp.num_taps = p.get_or("num_taps", cp.num_taps);
      if (auto r = p.range("delay_spread_ns")) {
        cp.delay_spread_lo = r->first * 1e-9;
        cp.delay_spread_hi = r->second * 1e-9;
      }
      p.finish();
      c.channel_profiles.push_back(cp);
    }
  }
  if (auto tiers = o.array("velocity_tiers")) {
    c.velocity_tiers.clear();
    for (std::size_t i = 0; i < tiers->size(); ++i) {
      Object p((*tiers)[i], "velocity_tiers[" + std::to_string(i) + "]");
      VelocityTier vt;
      vt.name = p.get_or("name", vt.name);
      if (auto r = p.range("velocity_mps")) std::tie(vt.lo, vt.hi) = *r;
      p.finish();
      c.velocity_tiers.push_back(vt);
    }
  }
  if (auto kind = o.get<std::string>("channel")) {
    if (*kind == "tdl") {
      c.channel_kind = link::ChannelKind::tdl;
    } else if (*kind == "flat") {
      c.channel_kind = link::ChannelKind::flat;
    } else {
      throw std::invalid_argument("train config: channel must be \"tdl\" or \"flat\", got \"" + *kind + "\"");
    }
  }
  c.checkpoint_every = o.get_or("checkpoint_every", c.checkpoint_every);
  c.seed = o.get_or("seed", c.seed);
  if (auto a = o.object("adam")) {
    Object ao(*a, "adam");
    c.adam.beta1 = ao.get_or("beta1", c.adam.beta1);
    c.adam.beta2 = ao.get_or("beta2", c.adam.beta2);
    c.adam.epsilon = ao.get_or("epsilon", c.adam.epsilon);
    ao.finish();
  }
  o.finish();
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_file(const std::string& path) { return from_json(json_util::read_text(path)); }

LinkSampler::LinkSampler(const TrainConfig& config, link::LinkSetup setup)
    : config_(config), setup_(std::move(setup)) {
  config_.validate();
  if (setup_.grid.num_rx != config_.receiver.num_rx ||
      setup_.constellation.bits_per_symbol() != config_.receiver.bits_per_symbol) {
    throw std::invalid_argument("LinkSampler: link setup does not match the receiver configuration");
  }
}

TrainingSample LinkSampler::sample(std::size_t iteration, std::size_t index) const {
  Philox rng(derive_key({config_.seed, hash_string("train_sample"), iteration, index}));
  return make_sample(link::simulate_block(setup_, config_.scenario_at(iteration), rng));
}

double l2_term(const NeuralReceiver& model, double coeff) {
  double sq = 0.0;
  for (const ConvLayer* c : model.conv_layers()) {
    for (float w : c->kernel.data()) sq += static_cast<double>(w) * w;
  }
  return coeff * sq;
}

BatchGradient batch_gradient(const NeuralReceiver& model, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  BatchGradient out;
  const auto params = model.parameters();
  out.grads.reserve(params.size());
  for (const Tensor* p : params) out.grads.emplace_back(p->shape());
  const float inv = 1.0f / static_cast<float>(batch.size());
  for (const TrainingSample& s : batch) {
    autograd::Tape tape;
    std::vector<autograd::Var> vars;
    const autograd::Var x = tape.leaf(s.features, false);
    const autograd::Var logits = forward_on_tape(tape, model, x, vars);
    const autograd::Var loss = tape.bce_with_logits(logits, s.targets, s.mask);
    tape.backward(loss);
    out.bce += tape.value(loss)[0];
    for (std::size_t i = 0; i < vars.size(); ++i) {
      auto dst = out.grads[i].data();
      const auto src = tape.grad(vars[i]).data();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += inv * src[j];
    }
  }
  out.bce /= static_cast<double>(batch.size());
  return out;
}

BatchGradient regularized_gradient(const NeuralReceiver& model, std::span<const TrainingSample> batch,
                                   double l2_coeff) {
  BatchGradient g = batch_gradient(model, batch);
  const auto params = model.parameters();
  // Kernels sit at the even indices of the conv section: d/dW l2 ||W||^2 = 2 l2 W.
  const std::size_t num_conv = model.conv_layers().size();
  for (std::size_t c = 0; c < num_conv; ++c) {
    auto dst = g.grads[2 * c].data();
    const auto w = params[2 * c]->data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += static_cast<float>(2.0 * l2_coeff * w[j]);
  }
  return g;
}

TrainResult train(const TrainConfig& config, const LinkSampler& sampler, const ProgressFn& progress) {
  return train(config, sampler, build_receiver(config.receiver, config.seed), progress);
}

TrainResult train(const TrainConfig& config, const LinkSampler& sampler, NeuralReceiver initial,
                  const ProgressFn& progress) {
  config.validate();
  if (!(initial.config == config.receiver)) throw std::invalid_argument("train: initial model does not match config");
  TrainResult result;
  result.model = std::move(initial);
  NeuralReceiver checkpoint = result.model;
  std::size_t checkpoint_iteration = 0;
  AdamState state;
  const std::size_t total = config.total_iterations();
  std::vector<TrainingSample> batch(config.batch_size);

  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t b = 0; b < config.batch_size; ++b) batch[b] = sampler.sample(it, b);
    BatchGradient g = regularized_gradient(result.model, batch, config.l2_coeff);
    auto params = result.model.parameters();
    LossRecord rec;
    rec.iteration = it;
    rec.l2_term = l2_term(result.model, config.l2_coeff);
    rec.loss = g.bce + rec.l2_term;
    try {
      if (!std::isfinite(rec.loss)) throw NonFiniteGradient("loss is not finite");
      adam_step(params, g.grads, state, config.phase_at(it).learning_rate, config.adam);
    } catch (const NonFiniteGradient& e) {
      throw TrainingDiverged("training diverged at iteration " + std::to_string(it) + ": " + e.what(),
                             std::move(checkpoint), checkpoint_iteration);
    }
    result.trace.push_back(rec);
    if (progress) progress(rec);
    if (config.checkpoint_every && (it + 1) % config.checkpoint_every == 0) {
      checkpoint = result.model;
      checkpoint_iteration = it + 1;
    }
  }
  return result;
}

std::vector<double> smoothed_loss(std::span<const LossRecord> trace, std::size_t window) {
  if (window == 0) throw std::invalid_argument("smoothed_loss: window must be >= 1");
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    acc += trace[i].loss;
    if (i >= window) acc -= trace[i - window].loss;
    out.push_back(acc / static_cast<double>(std::min(window, i + 1)));
  }
  return out;
}

std::string loss_trace_csv(std::span<const LossRecord> trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,loss,l2_term\n";
  for (const auto& r : trace) os << r.iteration << ',' << r.loss << ',' << r.l2_term << '\n';
  return os.str();
}

}  // namespace nrx::train
