// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

// nrx: train, quantize and evaluate the convolutional OFDM receiver.

#include "nrx/harness.hpp"
#include "nrx/model_quantization.hpp"
#include "nrx/training.hpp"
#include "nrx/weights_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

nrx::NeuralReceiver load_any(const std::string& path) {
  const auto bytes = nrx::read_file(path);
  if (nrx::peek_kind(bytes) == nrx::WeightFileKind::float_model) return nrx::deserialize_model(bytes);
  return nrx::dequantize_model(nrx::deserialize_quantized(bytes));
}

struct TrainArgs {
  std::string config;
  std::string out = "receiver.bin";
  std::string trace;
  std::string init;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::size_t log_every = 100;
};

int run_train(const TrainArgs& a) {
  nrx::train::TrainConfig cfg = a.config.empty() ? nrx::train::TrainConfig{} : nrx::train::TrainConfig::from_file(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.iterations) {
    // Scale every phase to the requested total, keeping the proportions.
    const double total = static_cast<double>(cfg.total_iterations());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < cfg.phases.size(); ++i) {
      auto& p = cfg.phases[i];
      p.iterations = i + 1 == cfg.phases.size()
                         ? *a.iterations - assigned
                         : static_cast<std::size_t>(static_cast<double>(*a.iterations) * p.iterations / total);
      assigned += p.iterations;
    }
  }
  cfg.validate();
  nrx::link::LinkSetup setup(nrx::link::GridSpec{}, cfg.receiver.bits_per_symbol, nrx::link::default_ldpc_code());
  setup.grid.num_rx = cfg.receiver.num_rx;
  nrx::train::LinkSampler sampler(cfg, setup);
  double window = 0.0;
  std::size_t count = 0;
  auto progress = [&](const nrx::train::LossRecord& r) {
    window += r.loss;
    ++count;
    if (a.log_every && (r.iteration + 1) % a.log_every == 0) {
      std::fprintf(stderr, "iter %zu  loss %.5f  l2 %.3e\n", r.iteration + 1, window / static_cast<double>(count),
                   r.l2_term);
      window = 0.0;
      count = 0;
    }
  };
  const auto result = a.init.empty() ? nrx::train::train(cfg, sampler, progress)
                                     : nrx::train::train(cfg, sampler, nrx::load_weights(a.init), progress);
  nrx::save_weights(result.model, a.out);
  if (!a.trace.empty()) emit(nrx::train::loss_trace_csv(result.trace), a.trace);
  return 0;
}

struct QuantizeArgs {
  std::string model;
  std::string out;
  int bits = 8;
  std::string granularity = "per_channel";
  std::string scale_mode = "magnitude_span";
  bool float16 = false;
};

int run_quantize(const QuantizeArgs& a) {
  const auto model = nrx::load_weights(a.model);
  nrx::QuantizedReceiver q;
  if (a.float16) {
    q = nrx::to_float16(model);
  } else {
    nrx::quant::QuantConfig qc;
    qc.bit_width = a.bits;
    qc.granularity = nrx::quant::parse_granularity(a.granularity);
    qc.scale_mode = nrx::quant::parse_scale_mode(a.scale_mode);
    nrx::QuantizationReport report;
    q = nrx::quantize_model(model, qc, &report);
    for (const auto& layer : report.degenerate_layers) {
      std::fprintf(stderr, "warning: degenerate scale in %s (fallback applied)\n", layer.c_str());
    }
  }
  nrx::save_weights(q, a.out);
  const auto size = nrx::model_size_bytes(q);
  std::fprintf(stderr, "wrote %s: %zu weight bytes, %.3fx smaller than float32\n", a.out.c_str(), size.total_bytes,
               size.reduction);
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string out;
  std::string model;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

int run_sweep(const SweepArgs& a) {
  auto cfg = nrx::harness::SweepConfig::from_file(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  if (!a.model.empty()) cfg.model_path = a.model;
  cfg.validate();
  const auto setup = nrx::link::LinkSetup::standard();
  const auto curves = nrx::harness::run_sweep(cfg, setup);
  emit(nrx::harness::bler_csv(curves), a.out);
  for (const auto& c : curves) {
    const auto x = nrx::harness::crossing_ebno(c);
    std::fprintf(stderr, "%-40s %-7s 10%% BLER at %s\n", c.variant.c_str(), c.mobility.c_str(),
                 x ? (nrx::harness::format_double(*x) + " dB").c_str() : "not reached");
  }
  return 0;
}

struct StatsArgs {
  std::string model;
  std::size_t bins = 80;
  std::string out;
  std::string summary;
};

int run_stats(const StatsArgs& a) {
  const auto stats = nrx::weight_stats(load_any(a.model), a.bins);
  emit(nrx::harness::histogram_csv(stats), a.out);
  if (!a.summary.empty()) emit(nrx::harness::stats_summary_csv(stats), a.summary);
  return 0;
}

struct SizesArgs {
  std::string model;
  bool full_size = false;
  std::string scale_mode = "magnitude_span";
  std::string out;
};

int run_sizes(const SizesArgs& a) {
  if (a.model.empty() == !a.full_size) throw CLI::ValidationError("sizes", "give exactly one of --model or --full-size");
  const auto model = a.full_size ? nrx::build_receiver(nrx::ReceiverConfig::full_size(), 1) : load_any(a.model);
  const auto rows = nrx::harness::report_sizes(model, nrx::quant::parse_scale_mode(a.scale_mode));
  emit(nrx::harness::sizes_csv(rows), a.out);
  return 0;
}

struct ReferenceArgs {
  std::string path = nrx::harness::default_reference_path();
  std::string out;
  std::string mobility;
  std::string variant;
};

int run_reference(const ReferenceArgs& a) {
  auto curves = nrx::harness::load_reference_curves(a.path);
  std::vector<nrx::harness::BlerCurve> kept;
  for (auto& c : curves) {
    if (!a.mobility.empty() && c.mobility != a.mobility) continue;
    if (!a.variant.empty() && c.variant != a.variant) continue;
    kept.push_back(std::move(c));
  }
  emit(nrx::harness::reference_csv(kept), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nrx: neural OFDM receiver training, weight quantization and BLER evaluation"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train the receiver and write its weights");
  t->add_option("--config", train.config, "training config (JSON)")->check(CLI::ExistingFile);
  t->add_option("--out", train.out, "output weight file")->capture_default_str();
  t->add_option("--trace", train.trace, "loss trace CSV (iteration,loss,l2_term)");
  t->add_option("--init", train.init, "start from these float weights instead of a fresh init")
      ->check(CLI::ExistingFile);
  t->add_option("--seed", train.seed, "override the config seed");
  t->add_option("--iterations", train.iterations, "override the total iteration count")->check(CLI::PositiveNumber);
  t->add_option("--log-every", train.log_every, "progress interval on stderr (0 = silent)")->capture_default_str();

  QuantizeArgs quantize;
  auto* q = app.add_subcommand("quantize", "post-training quantize a float weight file");
  q->add_option("--model", quantize.model, "float weight file")->required()->check(CLI::ExistingFile);
  q->add_option("--out", quantize.out, "output weight file")->required();
  q->add_option("--bits", quantize.bits, "integer bit width (2-16)")->capture_default_str()->check(CLI::Range(2, 16));
  q->add_option("--granularity", quantize.granularity, "per_channel or per_tensor")
      ->capture_default_str()
      ->check(CLI::IsMember({"per_channel", "per_tensor"}));
  q->add_option("--scale-mode", quantize.scale_mode, "magnitude_span or max_abs")
      ->capture_default_str()
      ->check(CLI::IsMember({"magnitude_span", "max_abs"}));
  q->add_flag("--float16", quantize.float16, "store kernels as float16 instead");

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "BLER sweep over receiver variants and mobility tiers");
  s->add_option("--config", sweep.config, "sweep config (JSON)")->required()->check(CLI::ExistingFile);
  s->add_option("--out", sweep.out, "output CSV (default stdout)");
  s->add_option("--model", sweep.model, "float weight file, overriding the config")->check(CLI::ExistingFile);
  s->add_option("--seed", sweep.seed, "override the config seed");
  s->add_option("--workers", sweep.workers, "worker threads (default $NRX_WORKERS or 1)")->check(CLI::PositiveNumber);

  StatsArgs stats;
  auto* st = app.add_subcommand("stats", "per-layer kernel weight statistics and histograms");
  st->add_option("--model", stats.model, "weight file")->required()->check(CLI::ExistingFile);
  st->add_option("--bins", stats.bins, "histogram bins (>= 2)")->capture_default_str()->check(CLI::Range(2, 100000));
  st->add_option("--out", stats.out, "histogram CSV (default stdout)");
  st->add_option("--summary", stats.summary, "per-layer summary CSV");

  SizesArgs sizes;
  auto* sz = app.add_subcommand("sizes", "weight storage per precision relative to float32");
  sz->add_option("--model", sizes.model, "weight file")->check(CLI::ExistingFile);
  sz->add_flag("--full-size", sizes.full_size, "use a freshly built 8-block, 128-channel receiver");
  sz->add_option("--scale-mode", sizes.scale_mode, "magnitude_span or max_abs")
      ->capture_default_str()
      ->check(CLI::IsMember({"magnitude_span", "max_abs"}));
  sz->add_option("--out", sizes.out, "output CSV (default stdout)");

  ReferenceArgs reference;
  auto* r = app.add_subcommand("reference", "print the bundled reference BLER curves");
  r->add_option("--path", reference.path, "reference CSV")->capture_default_str()->check(CLI::ExistingFile);
  r->add_option("--mobility", reference.mobility, "keep one mobility tier");
  r->add_option("--variant", reference.variant, "keep one variant");
  r->add_option("--out", reference.out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*t) return run_train(train);
    if (*q) return run_quantize(quantize);
    if (*s) return run_sweep(sweep);
    if (*st) return run_stats(stats);
    if (*sz) return run_sizes(sizes);
    if (*r) return run_reference(reference);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
