// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/harness.hpp"

#include "json_util.hpp"
#include "nrx/classical.hpp"
#include "nrx/model_quantization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace nrx::harness {

const std::vector<MobilityTier>& mobility_tiers() {
  static const std::vector<MobilityTier> tiers{
      {"low", 0.0, 5.1, 0}, {"medium", 10.0, 20.0, 1}, {"high", 25.0, 40.0, 2}};
  return tiers;
}

MobilityTier mobility_tier(const std::string& name) {
  for (const auto& t : mobility_tiers()) {
    if (t.name == name) return t;
  }
  throw std::invalid_argument("unknown mobility tier \"" + name + "\" (expected low, medium or high)");
}

const std::vector<std::string>& standard_variants() {
  static const std::vector<std::string> labels{
      "neural-receiver",
      "neural-receiver-ptq-perChannel-int8",
      "neural-receiver-ptq-perChannel-int4",
      "neural-receiver-ptq-perTensor-int8",
      "neural-receiver-ptq-perTensor-int4",
      "baseline-perfect-csi",
      "baseline-ls-estimation",
  };
  return labels;
}

Variant parse_variant(const std::string& label, quant::ScaleMode mode) {
  Variant v;
  v.label = label;
  const auto& standard = standard_variants();
  const auto it = std::find(standard.begin(), standard.end(), label);
  v.rank = it == standard.end() ? standard.size() : static_cast<std::size_t>(it - standard.begin());

  if (label == "neural-receiver") return v;
  if (label == "neural-receiver-float16") {
    v.float16 = true;
    return v;
  }
  if (label == "baseline-perfect-csi") {
    v.kind = VariantKind::perfect_csi;
    return v;
  }
  if (label == "baseline-ls-estimation") {
    v.kind = VariantKind::ls_estimation;
    return v;
  }
  const std::string prefix = "neural-receiver-ptq-";
  if (label.rfind(prefix, 0) == 0) {
    const std::string rest = label.substr(prefix.size());
    quant::QuantConfig qc;
    qc.scale_mode = mode;
    std::string bits;
    if (rest.rfind("perChannel-int", 0) == 0) {
      qc.granularity = quant::Granularity::per_channel;
      bits = rest.substr(14);
    } else if (rest.rfind("perTensor-int", 0) == 0) {
      qc.granularity = quant::Granularity::per_tensor;
      bits = rest.substr(13);
    }
    if (bits == "4" || bits == "8" || bits == "16") {
      qc.bit_width = std::stoi(bits);
      v.quant = qc;
      return v;
    }
  }
  throw std::invalid_argument("invalid variant name \"" + label + "\"");
}

void SweepConfig::validate() const {
  if (ebno_db.empty()) throw std::invalid_argument("SweepConfig: ebno_db must be nonempty");
  for (std::size_t i = 1; i < ebno_db.size(); ++i) {
    if (!(ebno_db[i] > ebno_db[i - 1])) throw std::invalid_argument("SweepConfig: ebno_db must be strictly ascending");
  }
  if (mobility.empty()) throw std::invalid_argument("SweepConfig: mobility list must be nonempty");
  for (const auto& m : mobility) mobility_tier(m);
  if (variants.empty()) throw std::invalid_argument("SweepConfig: variant list must be nonempty");
  for (const auto& v : variants) parse_variant(v, scale_mode);
  if (min_blocks == 0) throw std::invalid_argument("SweepConfig: min_blocks must be >= 1");
  if (max_blocks < min_blocks) throw std::invalid_argument("SweepConfig: max_blocks must be >= min_blocks");
  if (batch_blocks == 0) throw std::invalid_argument("SweepConfig: batch_blocks must be >= 1");
  if (num_taps == 0) throw std::invalid_argument("SweepConfig: num_taps must be >= 1");
  if (delay_spread_lo < 0 || delay_spread_hi < delay_spread_lo) {
    throw std::invalid_argument("SweepConfig: bad delay spread range");
  }
  if (ldpc_iterations == 0) throw std::invalid_argument("SweepConfig: ldpc_iterations must be >= 1");
}

std::size_t SweepConfig::resolved_workers() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("NRX_WORKERS"); env && *env) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
    throw std::invalid_argument(std::string("NRX_WORKERS must be a positive integer, got \"") + env + "\"");
  }
  return 1;
}

SweepConfig SweepConfig::from_json(const std::string& text, const std::string& base_dir) {
  using json_util::Object;
  const auto root = json_util::parse_object(text, "sweep config");
  Object o(root, "sweep config");
  SweepConfig c;
  if (auto grid = o.object("ebno_range")) {
    Object g(*grid, "ebno_range");
    const auto start = g.get<double>("start");
    const auto stop = g.get<double>("stop");
    const auto step = g.get<double>("step");
    g.finish();
    if (!start || !stop || !step || !(*step > 0)) {
      throw std::invalid_argument("ebno_range: needs start, stop and a positive step");
    }
    const auto n = static_cast<std::size_t>(std::floor((*stop - *start) / *step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) c.ebno_db.push_back(*start + static_cast<double>(i) * *step);
  }
  if (auto list = o.array("ebno_db")) {
    if (!c.ebno_db.empty()) throw std::invalid_argument("sweep config: give ebno_db or ebno_range, not both");
    for (const auto& v : *list) {
      if (!v.is_number()) throw std::invalid_argument("sweep config.ebno_db: expected numbers");
      c.ebno_db.push_back(v.get<double>());
    }
  }
  auto strings = [&](const char* key, std::vector<std::string>& dst) {
    if (auto list = o.array(key)) {
      dst.clear();
      for (const auto& v : *list) {
        if (!v.is_string()) throw std::invalid_argument(std::string("sweep config.") + key + ": expected strings");
        dst.push_back(v.get<std::string>());
      }
    }
  };
  strings("mobility", c.mobility);
  strings("variants", c.variants);
  c.min_blocks = o.get_or("min_blocks", c.min_blocks);
  c.target_errors = o.get_or("target_errors", c.target_errors);
  c.max_blocks = o.get_or("max_blocks", c.max_blocks);
  c.batch_blocks = o.get_or("batch_blocks", c.batch_blocks);
  c.seed = o.get_or("seed", c.seed);
  c.workers = o.get_or("workers", c.workers);
  if (auto m = o.get<std::string>("model")) {
    std::filesystem::path p(*m);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
    c.model_path = p.string();
  }
  c.num_taps = o.get_or("num_taps", c.num_taps);
  if (auto r = o.range("delay_spread_ns")) {
    c.delay_spread_lo = r->first * 1e-9;
    c.delay_spread_hi = r->second * 1e-9;
  }
  c.ldpc_iterations = o.get_or("ldpc_iterations", c.ldpc_iterations);
  if (auto s = o.get<std::string>("scale_mode")) c.scale_mode = quant::parse_scale_mode(*s);
  o.finish();
  c.validate();
  return c;
}

SweepConfig SweepConfig::from_file(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return from_json(json_util::read_text(path), dir);
}

namespace {

struct PreparedVariant {
  Variant variant;
  NeuralReceiver model;  // decoded weights, neural variants only
};

bool block_error(const PreparedVariant& pv, const link::LinkSetup& setup, const link::Block& block,
                 std::size_t ldpc_iterations) {
  Tensor llr_grid;
  switch (pv.variant.kind) {
    case VariantKind::neural:
      llr_grid = forward(pv.model, featurize(block.grid));
      break;
    case VariantKind::perfect_csi:
      llr_grid = classical::receive_classical(block.grid, classical::CsiMode::perfect, block.noise_var,
                                              setup.constellation);
      break;
    case VariantKind::ls_estimation:
      llr_grid = classical::receive_classical(block.grid, classical::CsiMode::ls_estimate, block.noise_var,
                                              setup.constellation);
      break;
  }
  std::vector<double> llr = classical::data_llrs(llr_grid, setup.grid);
  llr.resize(setup.code.n());
  const auto decoded = setup.code.decode(llr, ldpc_iterations);
  return decoded.message != block.message;
}

// Runs fn(i) for i in [0, n) across `workers` threads with a fixed strided
// partition; rethrows the first exception.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<BlerCurve> run_sweep(const SweepConfig& config, const link::LinkSetup& setup,
                                 const NeuralReceiver* model) {
  config.validate();
  std::vector<Variant> variants;
  std::set<std::string> seen;
  for (const auto& label : config.variants) {
    if (!seen.insert(label).second) throw std::invalid_argument("sweep: duplicate variant \"" + label + "\"");
    variants.push_back(parse_variant(label, config.scale_mode));
  }
  std::sort(variants.begin(), variants.end(), [](const Variant& a, const Variant& b) {
    return a.rank != b.rank ? a.rank < b.rank : a.label < b.label;
  });

  const bool need_model = std::any_of(variants.begin(), variants.end(),
                                      [](const Variant& v) { return v.kind == VariantKind::neural; });
  NeuralReceiver loaded;
  if (need_model && !model) {
    if (config.model_path.empty()) throw std::runtime_error("sweep: neural variants need model weights (\"model\")");
    if (!std::filesystem::exists(config.model_path)) {
      throw std::runtime_error("sweep: missing weights file " + config.model_path);
    }
    loaded = load_weights(config.model_path);
    model = &loaded;
  }
  if (need_model && (model->config.num_rx != setup.grid.num_rx ||
                     model->config.bits_per_symbol != setup.constellation.bits_per_symbol())) {
    throw std::invalid_argument("sweep: model configuration does not match the link setup");
  }

  std::vector<PreparedVariant> prepared;
  for (const auto& v : variants) {
    PreparedVariant pv{v, {}};
    if (v.kind == VariantKind::neural) {
      if (v.float16) {
        pv.model = dequantize_model(to_float16(*model));
      } else if (v.quant) {
        pv.model = dequantize_model(quantize_model(*model, *v.quant));
      } else {
        pv.model = *model;
      }
    }
    prepared.push_back(std::move(pv));
  }

  std::vector<MobilityTier> tiers;
  for (const auto& name : config.mobility) {
    const MobilityTier t = mobility_tier(name);
    if (std::none_of(tiers.begin(), tiers.end(), [&](const MobilityTier& x) { return x.id == t.id; })) tiers.push_back(t);
  }
  std::sort(tiers.begin(), tiers.end(), [](const MobilityTier& a, const MobilityTier& b) { return a.id < b.id; });

  const std::size_t workers = config.resolved_workers();
  std::vector<BlerCurve> curves;
  for (const MobilityTier& tier : tiers) {
    const std::size_t first_curve = curves.size();
    for (const auto& pv : prepared) curves.push_back(BlerCurve{pv.variant.label, tier.name, {}});

    link::Scenario scenario;
    scenario.num_taps = config.num_taps;
    scenario.delay_spread_lo = config.delay_spread_lo;
    scenario.delay_spread_hi = config.delay_spread_hi;
    scenario.velocity_lo = tier.velocity_lo;
    scenario.velocity_hi = tier.velocity_hi;

    for (double ebno : config.ebno_db) {
      scenario.ebno_lo = scenario.ebno_hi = ebno;
      const auto milli_db = static_cast<std::uint64_t>(std::llround(ebno * 1000.0));
      std::vector<std::size_t> blocks(prepared.size(), 0), errors(prepared.size(), 0);
      std::vector<bool> active(prepared.size(), true);
      std::size_t start = 0;
      while (std::find(active.begin(), active.end(), true) != active.end()) {
        const std::size_t chunk = std::min(config.batch_blocks, config.max_blocks - start);
        std::vector<std::vector<std::uint8_t>> err(prepared.size(), std::vector<std::uint8_t>(chunk, 0));
        parallel_for(chunk, workers, [&](std::size_t i) {
          Philox rng(derive_key({config.seed, hash_string("sweep_block"), tier.id, milli_db, start + i}));
          const link::Block block = link::simulate_block(setup, scenario, rng);
          for (std::size_t v = 0; v < prepared.size(); ++v) {
            if (active[v]) err[v][i] = block_error(prepared[v], setup, block, config.ldpc_iterations) ? 1 : 0;
          }
        });
        start += chunk;
        for (std::size_t v = 0; v < prepared.size(); ++v) {
          if (!active[v]) continue;
          blocks[v] += chunk;
          for (auto e : err[v]) errors[v] += e;
          const bool enough = blocks[v] >= config.min_blocks && errors[v] >= config.target_errors;
          if (enough || blocks[v] >= config.max_blocks) active[v] = false;
        }
      }
      for (std::size_t v = 0; v < prepared.size(); ++v) {
        const double bler = static_cast<double>(errors[v]) / static_cast<double>(blocks[v]);
        curves[first_curve + v].points.push_back(BlerPoint{ebno, bler, blocks[v], errors[v]});
      }
    }
  }
  return curves;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kBlerSchema = "# schema: nrx-bler-csv/1";
constexpr const char* kBlerHeader = "variant,mobility,ebno_db,bler,blocks,errors";
constexpr const char* kReferenceHeader = "variant,mobility,ebno_db,bler";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

template <class T>
T parse_number(const std::string& s, std::size_t line, const char* field) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("line " + std::to_string(line) + ": bad " + field + " \"" + s + "\"");
  }
  return v;
}

BlerCurve& curve_for(std::vector<BlerCurve>& curves, const std::string& variant, const std::string& mobility) {
  for (auto& c : curves) {
    if (c.variant == variant && c.mobility == mobility) return c;
  }
  curves.push_back(BlerCurve{variant, mobility, {}});
  return curves.back();
}

std::vector<BlerCurve> parse_curves(const std::string& text, const char* header, bool with_counts) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<BlerCurve> curves;
  const std::size_t fields = with_counts ? 6 : 4;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line != header) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected header \"" + header + "\"");
      have_header = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != fields) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " + std::to_string(fields) + " fields");
    }
    if (f[0].empty() || f[1].empty()) throw std::invalid_argument("line " + std::to_string(lineno) + ": empty label");
    BlerPoint p;
    p.ebno_db = parse_number<double>(f[2], lineno, "ebno_db");
    p.bler = parse_number<double>(f[3], lineno, "bler");
    if (!(p.bler >= 0.0 && p.bler <= 1.0)) throw std::invalid_argument("line " + std::to_string(lineno) + ": bler outside [0, 1]");
    if (with_counts) {
      p.blocks = parse_number<std::size_t>(f[4], lineno, "blocks");
      p.errors = parse_number<std::size_t>(f[5], lineno, "errors");
      if (p.errors > p.blocks) throw std::invalid_argument("line " + std::to_string(lineno) + ": errors exceed blocks");
    }
    BlerCurve& c = curve_for(curves, f[0], f[1]);
    if (!c.points.empty() && !(p.ebno_db > c.points.back().ebno_db)) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": ebno_db not ascending within its curve");
    }
    c.points.push_back(p);
  }
  if (!have_header) throw std::invalid_argument("missing header \"" + std::string(header) + "\"");
  return curves;
}

}  // namespace

std::string bler_csv(const std::vector<BlerCurve>& curves) {
  std::ostringstream os;
  os << kBlerSchema << '\n' << kBlerHeader << '\n';
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << c.variant << ',' << c.mobility << ',' << format_double(p.ebno_db) << ',' << format_double(p.bler) << ','
         << p.blocks << ',' << p.errors << '\n';
    }
  }
  return os.str();
}

std::vector<BlerCurve> parse_bler_csv(const std::string& text) { return parse_curves(text, kBlerHeader, true); }

std::string reference_csv(const std::vector<BlerCurve>& curves) {
  std::ostringstream os;
  os << kReferenceHeader << '\n';
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << c.variant << ',' << c.mobility << ',' << format_double(p.ebno_db) << ',' << format_double(p.bler) << '\n';
    }
  }
  return os.str();
}

std::vector<BlerCurve> parse_reference_csv(const std::string& text) {
  return parse_curves(text, kReferenceHeader, false);
}

std::string default_reference_path() { return link::default_data_dir() + "/reference_bler.csv"; }

std::vector<BlerCurve> load_reference_curves(const std::string& path) {
  return parse_reference_csv(json_util::read_text(path));
}

const BlerCurve* find_curve(const std::vector<BlerCurve>& curves, const std::string& variant,
                            const std::string& mobility) {
  for (const auto& c : curves) {
    if (c.variant == variant && c.mobility == mobility) return &c;
  }
  return nullptr;
}

std::optional<double> crossing_ebno(const BlerCurve& curve, double target) {
  const auto& pts = curve.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].bler >= target) continue;
    if (i == 0) return pts[0].ebno_db;
    const double y0 = std::log10(std::max(pts[i - 1].bler, 1e-6));
    const double y1 = std::log10(std::max(pts[i].bler, 1e-6));
    const double yt = std::log10(target);
    const double t = y0 == y1 ? 0.0 : (y0 - yt) / (y0 - y1);
    return pts[i - 1].ebno_db + t * (pts[i].ebno_db - pts[i - 1].ebno_db);
  }
  return std::nullopt;
}

std::vector<SizeRow> report_sizes(const NeuralReceiver& model, quant::ScaleMode mode) {
  std::vector<SizeRow> rows;
  rows.push_back({"neural-receiver", "float32", "n/a", model_size_bytes(model)});
  rows.push_back({"neural-receiver-float16", "float16", "n/a", model_size_bytes(to_float16(model))});
  for (int bits : {8, 4}) {
    for (auto g : {quant::Granularity::per_channel, quant::Granularity::per_tensor}) {
      quant::QuantConfig qc;
      qc.bit_width = bits;
      qc.granularity = g;
      qc.scale_mode = mode;
      const std::string gname = g == quant::Granularity::per_channel ? "perChannel" : "perTensor";
      rows.push_back({"neural-receiver-ptq-" + gname + "-int" + std::to_string(bits), "int" + std::to_string(bits),
                      quant::to_string(g), model_size_bytes(quantize_model(model, qc))});
    }
  }
  return rows;
}

std::string sizes_csv(const std::vector<SizeRow>& rows) {
  std::ostringstream os;
  os << "variant,precision,granularity,kernel_bytes,scale_bytes,full_precision_bytes,total_bytes,float32_bytes,"
        "reduction\n";
  for (const auto& r : rows) {
    char red[32];
    std::snprintf(red, sizeof(red), "%.4f", r.size.reduction);
    os << r.variant << ',' << r.precision << ',' << r.granularity << ',' << r.size.kernel_bytes << ','
       << r.size.scale_bytes << ',' << r.size.full_precision_bytes << ',' << r.size.total_bytes << ','
       << r.size.float32_bytes << ',' << red << '\n';
  }
  return os.str();
}

std::string histogram_csv(const std::vector<quant::LayerWeightStats>& stats) {
  std::ostringstream os;
  os << "layer,bin,lo,hi,count\n";
  for (const auto& s : stats) {
    for (std::size_t b = 0; b < s.counts.size(); ++b) {
      os << s.layer_name << ',' << b << ',' << format_double(s.bin_edges[b]) << ',' << format_double(s.bin_edges[b + 1])
         << ',' << s.counts[b] << '\n';
    }
  }
  return os.str();
}

std::string stats_summary_csv(const std::vector<quant::LayerWeightStats>& stats) {
  std::ostringstream os;
  os << "layer,count,min,max,mean,std\n";
  for (const auto& s : stats) {
    os << s.layer_name << ',' << s.count << ',' << format_double(s.min) << ',' << format_double(s.max) << ','
       << format_double(s.mean) << ',' << format_double(s.stddev) << '\n';
  }
  return os.str();
}

}  // namespace nrx::harness
