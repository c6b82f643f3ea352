// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/link.hpp"
#include "nrx/quantization.hpp"
#include "nrx/receiver.hpp"
#include "nrx/weights_io.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nrx::harness {

struct MobilityTier {
  std::string name;
  double velocity_lo = 0.0;  // m/s
  double velocity_hi = 0.0;
  std::size_t id = 0;        // stable across configs; enters the RNG key
};

/// "low" 0-5.1 m/s, "medium" 10-20 m/s, "high" 25-40 m/s.
MobilityTier mobility_tier(const std::string& name);
const std::vector<MobilityTier>& mobility_tiers();

enum class VariantKind { neural, perfect_csi, ls_estimation };

/// A receiver under test, named by its label:
///   neural-receiver                          float32 weights
///   neural-receiver-float16                  float16-stored kernels
///   neural-receiver-ptq-per{Channel,Tensor}-int{4,8,16}
///   baseline-perfect-csi, baseline-ls-estimation
struct Variant {
  std::string label;
  VariantKind kind = VariantKind::neural;
  bool float16 = false;
  std::optional<quant::QuantConfig> quant;
  std::size_t rank = 0;  // canonical output order
};

/// Throws std::invalid_argument for an unknown label.
Variant parse_variant(const std::string& label, quant::ScaleMode mode = quant::ScaleMode::magnitude_span);
/// The seven labels of the standard comparison, in canonical order.
const std::vector<std::string>& standard_variants();

/// Monte Carlo sweep settings. Each Eb/N0 point runs chunks of `batch_blocks`
/// blocks and stops once blocks >= min_blocks and errors >= target_errors,
/// or once blocks >= max_blocks.
struct SweepConfig {
  std::vector<double> ebno_db;
  std::vector<std::string> mobility{"low", "medium", "high"};
  std::vector<std::string> variants = standard_variants();
  std::size_t min_blocks = 256;
  std::size_t target_errors = 50;
  std::size_t max_blocks = 4096;
  std::size_t batch_blocks = 128;
  std::uint64_t seed = 1;
  /// 0 picks $NRX_WORKERS, else 1.
  std::size_t workers = 0;
  std::string model_path;
  std::size_t num_taps = 6;
  double delay_spread_lo = 0.0;
  double delay_spread_hi = 50e-9;
  std::size_t ldpc_iterations = 20;
  quant::ScaleMode scale_mode = quant::ScaleMode::magnitude_span;

  void validate() const;
  std::size_t resolved_workers() const;

  /// Keys absent from the JSON object keep their defaults. A relative
  /// "model" path is resolved against `base_dir` when one is given.
  static SweepConfig from_json(const std::string& text, const std::string& base_dir = "");
  static SweepConfig from_file(const std::string& path);
};

struct BlerPoint {
  double ebno_db = 0.0;
  double bler = 0.0;
  std::size_t blocks = 0;
  std::size_t errors = 0;

  friend bool operator==(const BlerPoint&, const BlerPoint&) = default;
};

struct BlerCurve {
  std::string variant;
  std::string mobility;
  std::vector<BlerPoint> points;

  friend bool operator==(const BlerCurve&, const BlerCurve&) = default;
};

/// Every variant sees the same block realizations: block b at an Eb/N0
/// point is drawn from the stream keyed by (seed, mobility tier, Eb/N0 in
/// millidecibels, b), independent of variant and worker count. Output is
/// ordered by mobility tier, then canonical variant order.
/// `model` supplies the neural weights; when null they are loaded from
/// config.model_path.
std::vector<BlerCurve> run_sweep(const SweepConfig& config, const link::LinkSetup& setup,
                                 const NeuralReceiver* model = nullptr);

/// "# schema: nrx-bler-csv/1", then variant,mobility,ebno_db,bler,blocks,errors.
std::string bler_csv(const std::vector<BlerCurve>& curves);
std::vector<BlerCurve> parse_bler_csv(const std::string& text);

/// Bundled reference curves: variant,mobility,ebno_db,bler.
std::string reference_csv(const std::vector<BlerCurve>& curves);
std::vector<BlerCurve> parse_reference_csv(const std::string& text);
std::string default_reference_path();
std::vector<BlerCurve> load_reference_curves(const std::string& path = default_reference_path());

const BlerCurve* find_curve(const std::vector<BlerCurve>& curves, const std::string& variant,
                            const std::string& mobility);

/// Eb/N0 where the curve first falls below `target`, interpolating log10(BLER)
/// linearly between neighbouring points (zeros floored at 1e-6). Returns the
/// first point's Eb/N0 if it already lies below, nullopt if none does.
std::optional<double> crossing_ebno(const BlerCurve& curve, double target = 0.1);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

struct SizeRow {
  std::string variant;
  std::string precision;  // float32, float16, int8, int4
  std::string granularity;
  SizeReport size;
};

/// Storage of the model under each stored precision of the standard comparison.
std::vector<SizeRow> report_sizes(const NeuralReceiver& model,
                                  quant::ScaleMode mode = quant::ScaleMode::magnitude_span);
/// variant,precision,granularity,kernel_bytes,scale_bytes,full_precision_bytes,total_bytes,float32_bytes,reduction
std::string sizes_csv(const std::vector<SizeRow>& rows);

/// layer,bin,lo,hi,count
std::string histogram_csv(const std::vector<quant::LayerWeightStats>& stats);
/// layer,count,min,max,mean,std
std::string stats_summary_csv(const std::vector<quant::LayerWeightStats>& stats);

}  // namespace nrx::harness
