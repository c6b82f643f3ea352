// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "nrx/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace nrx {

static_assert(std::endian::native == std::endian::little, "weight files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'N', 'R', 'X', 'W'};
constexpr std::uint32_t kMaxDim = 1u << 16;

enum class DType : std::uint8_t { f32 = 0, f16 = 1, integer = 2 };

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void f32(float v) { raw(&v, 4); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  float f32() { return get<float>(); }
  std::span<const std::uint8_t> bytes(std::uint64_t n) {
    need(n);
    auto s = in_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return s;
  }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::uint64_t n) const {
    if (n > in_.size() - pos_) throw WeightFormatError("weight file truncated at byte " + std::to_string(pos_));
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct Record {
  DType dtype = DType::f32;
  quant::QuantConfig qc;
  Shape shape;
  std::vector<float> scales;
  std::span<const std::uint8_t> payload;
};

void write_header(Writer& w, WeightFileKind kind, const ReceiverConfig& c, std::size_t records) {
  w.raw(kMagic, 4);
  w.u32(kWeightFileVersion);
  w.u32(static_cast<std::uint32_t>(kind));
  for (std::size_t v : {c.num_blocks, c.channels, c.kernel_h, c.kernel_w, c.dilation_h, c.dilation_w,
                        c.bits_per_symbol, c.num_rx}) {
    w.u32(static_cast<std::uint32_t>(v));
  }
  w.u32(static_cast<std::uint32_t>(records));
}

void write_record_head(Writer& w, const std::string& name, DType dtype, std::uint8_t bits,
                       const quant::QuantConfig* qc, const Shape& shape) {
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.raw(name.data(), name.size());
  w.u8(static_cast<std::uint8_t>(dtype));
  w.u8(bits);
  w.u8(qc && qc->signedness == quant::Signedness::unsigned_int ? 1 : 0);
  w.u8(qc && qc->granularity == quant::Granularity::per_channel ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(qc ? qc->channel_axis : 0));
  w.u8(qc && qc->scale_mode == quant::ScaleMode::max_abs ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(shape.size()));
  for (std::size_t d : shape) w.u32(static_cast<std::uint32_t>(d));
}

void write_float_record(Writer& w, const std::string& name, const Tensor& t) {
  write_record_head(w, name, DType::f32, 32, nullptr, t.shape());
  w.u32(0);
  w.u64(4 * t.size());
  w.raw(t.data().data(), 4 * t.size());
}

void write_kernel_record(Writer& w, const std::string& name, const StoredKernel& k) {
  switch (k.format) {
    case KernelFormat::float32:
      write_float_record(w, name, k.full);
      return;
    case KernelFormat::float16:
      write_record_head(w, name, DType::f16, 16, nullptr, k.shape);
      w.u32(0);
      w.u64(2 * k.half.size());
      w.raw(k.half.data(), 2 * k.half.size());
      return;
    case KernelFormat::integer: {
      const auto& q = k.quantized;
      write_record_head(w, name, DType::integer, static_cast<std::uint8_t>(q.config.bit_width), &q.config, k.shape);
      w.u32(static_cast<std::uint32_t>(q.scales.size()));
      for (float s : q.scales) w.f32(s);
      const auto payload = quant::pack_values(q);
      w.u64(payload.size());
      w.raw(payload.data(), payload.size());
      return;
    }
  }
}

struct Parsed {
  WeightFileKind kind;
  ReceiverConfig config;
  std::map<std::string, Record> records;
};

Parsed parse(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw WeightFormatError("not an nrx weight file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kWeightFileVersion) {
    throw WeightFormatError("unsupported weight file version " + std::to_string(version) + " (expected " +
                            std::to_string(kWeightFileVersion) + ")");
  }
  Parsed p;
  const std::uint32_t kind = r.u32();
  if (kind > 1) throw WeightFormatError("unknown weight file kind " + std::to_string(kind));
  p.kind = static_cast<WeightFileKind>(kind);
  std::size_t* fields[] = {&p.config.num_blocks, &p.config.channels,   &p.config.kernel_h,
                           &p.config.kernel_w,   &p.config.dilation_h, &p.config.dilation_w,
                           &p.config.bits_per_symbol, &p.config.num_rx};
  for (std::size_t* f : fields) {
    const std::uint32_t v = r.u32();
    if (v > kMaxDim) throw WeightFormatError("config echo value " + std::to_string(v) + " out of range");
    *f = v;
  }
  try {
    p.config.validate();
  } catch (const std::invalid_argument& e) {
    throw WeightFormatError(std::string("config echo invalid: ") + e.what());
  }
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    const auto name_bytes = r.bytes(len);
    std::string name(name_bytes.begin(), name_bytes.end());
    Record rec;
    const std::uint8_t dtype = r.u8();
    if (dtype > 2) throw WeightFormatError("record " + name + ": unknown dtype " + std::to_string(dtype));
    rec.dtype = static_cast<DType>(dtype);
    rec.qc.bit_width = r.u8();
    rec.qc.signedness = r.u8() ? quant::Signedness::unsigned_int : quant::Signedness::signed_int;
    rec.qc.granularity = r.u8() ? quant::Granularity::per_channel : quant::Granularity::per_tensor;
    rec.qc.channel_axis = r.u8();
    rec.qc.scale_mode = r.u8() ? quant::ScaleMode::max_abs : quant::ScaleMode::magnitude_span;
    const std::uint8_t rank = r.u8();
    for (std::uint8_t d = 0; d < rank; ++d) {
      const std::uint32_t dim = r.u32();
      if (dim == 0 || dim > kMaxDim) throw WeightFormatError("record " + name + ": bad dimension");
      rec.shape.push_back(dim);
    }
    const std::uint32_t ns = r.u32();
    if (ns > kMaxDim) throw WeightFormatError("record " + name + ": scale count out of range");
    for (std::uint32_t s = 0; s < ns; ++s) rec.scales.push_back(r.f32());
    rec.payload = r.bytes(r.u64());
    if (!p.records.emplace(name, std::move(rec)).second) {
      throw WeightFormatError("duplicate record " + name);
    }
  }
  if (!r.done()) throw WeightFormatError("trailing bytes after the last record");
  return p;
}

const Record& require(const Parsed& p, const std::string& name, const Shape& shape) {
  auto it = p.records.find(name);
  if (it == p.records.end()) throw WeightFormatError("missing record " + name);
  if (it->second.shape != shape) {
    throw WeightFormatError("record " + name + " has shape " + shape_string(it->second.shape) +
                            ", header config implies " + shape_string(shape));
  }
  return it->second;
}

Tensor float_tensor(const std::string& name, const Record& rec) {
  if (rec.dtype != DType::f32) throw WeightFormatError("record " + name + " must be float32");
  Tensor t(rec.shape);
  if (rec.payload.size() != 4 * t.size()) throw WeightFormatError("record " + name + ": payload size mismatch");
  std::memcpy(t.data().data(), rec.payload.data(), rec.payload.size());
  return t;
}

StoredKernel stored_kernel(const std::string& layer, const Record& rec) {
  StoredKernel k;
  k.name = layer;
  k.shape = rec.shape;
  const std::size_t n = shape_numel(rec.shape);
  const std::string name = layer + ".kernel";
  switch (rec.dtype) {
    case DType::f32:
      k.format = KernelFormat::float32;
      k.full = float_tensor(name, rec);
      break;
    case DType::f16:
      k.format = KernelFormat::float16;
      if (rec.payload.size() != 2 * n) throw WeightFormatError("record " + name + ": payload size mismatch");
      k.half.resize(n);
      std::memcpy(k.half.data(), rec.payload.data(), rec.payload.size());
      break;
    case DType::integer: {
      k.format = KernelFormat::integer;
      try {
        rec.qc.validate_for(rec.shape);
      } catch (const std::invalid_argument& e) {
        throw WeightFormatError("record " + name + ": " + e.what());
      }
      const std::size_t want = rec.qc.granularity == quant::Granularity::per_channel ? rec.shape[rec.qc.channel_axis] : 1;
      if (rec.scales.size() != want) throw WeightFormatError("record " + name + ": wrong scale count");
      for (float s : rec.scales) {
        if (!(s > 0.0f)) throw WeightFormatError("record " + name + ": non-positive scale");
      }
      if (rec.payload.size() != quant::packed_size(rec.qc.bit_width, n)) {
        throw WeightFormatError("record " + name + ": payload size mismatch");
      }
      k.quantized.shape = rec.shape;
      k.quantized.config = rec.qc;
      k.quantized.scales = rec.scales;
      try {
        k.quantized.values = quant::unpack_values(rec.payload, rec.qc, n);
      } catch (const std::invalid_argument& e) {
        throw WeightFormatError("record " + name + ": " + e.what());
      }
      break;
    }
  }
  return k;
}

// Fills biases and norm parameters, and kernels when `kernels` is true.
NeuralReceiver assemble(const Parsed& p, bool kernels) {
  NeuralReceiver m = build_receiver(p.config, 0);
  for (ConvLayer* c : m.conv_layers()) {
    if (kernels) c->kernel = float_tensor(c->name + ".kernel", require(p, c->name + ".kernel", c->kernel.shape()));
    c->bias = float_tensor(c->name + ".bias", require(p, c->name + ".bias", c->bias.shape()));
  }
  for (NormLayer* n : m.norm_layers()) {
    n->gamma = float_tensor(n->name + ".gamma", require(p, n->name + ".gamma", n->gamma.shape()));
    n->beta = float_tensor(n->name + ".beta", require(p, n->name + ".beta", n->beta.shape()));
  }
  if (p.records.size() != m.parameters().size()) throw WeightFormatError("weight file has unexpected records");
  return m;
}

}  // namespace

std::vector<std::uint8_t> serialize(const NeuralReceiver& model) {
  Writer w;
  const auto names = model.parameter_names();
  const auto params = model.parameters();
  write_header(w, WeightFileKind::float_model, model.config, names.size());
  for (std::size_t i = 0; i < names.size(); ++i) write_float_record(w, names[i], *params[i]);
  return w.take();
}

std::vector<std::uint8_t> serialize(const QuantizedReceiver& q) {
  Writer w;
  const auto names = q.base.parameter_names();
  const auto params = q.base.parameters();
  write_header(w, WeightFileKind::stored_kernels, q.base.config, names.size());
  const auto convs = q.base.conv_layers();
  for (std::size_t i = 0; i < names.size(); ++i) {
    // Kernel entries sit at even indices of the conv section of parameters().
    if (i < 2 * convs.size() && i % 2 == 0) {
      const std::string& layer = convs[i / 2]->name;
      const StoredKernel* k = q.find(layer);
      if (!k) throw std::invalid_argument("serialize: no stored kernel for layer " + layer);
      write_kernel_record(w, names[i], *k);
    } else {
      write_float_record(w, names[i], *params[i]);
    }
  }
  return w.take();
}

WeightFileKind peek_kind(std::span<const std::uint8_t> bytes) { return parse(bytes).kind; }

NeuralReceiver deserialize_model(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  if (p.kind != WeightFileKind::float_model) throw WeightFormatError("file holds a quantized model, not a float model");
  return assemble(p, true);
}

QuantizedReceiver deserialize_quantized(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  if (p.kind != WeightFileKind::stored_kernels) throw WeightFormatError("file holds a float model, not a quantized model");
  QuantizedReceiver q;
  q.base = assemble(p, false);
  bool first = true;
  for (const ConvLayer* c : q.base.conv_layers()) {
    StoredKernel k = stored_kernel(c->name, require(p, c->name + ".kernel", c->kernel.shape()));
    if (first) {
      q.format = k.format;
      if (k.format == KernelFormat::integer) q.config = k.quantized.config;
      first = false;
    } else if (k.format != q.format) {
      throw WeightFormatError("kernel records mix storage formats");
    }
    q.kernels.push_back(std::move(k));
  }
  return q;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace {

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

void save_weights(const NeuralReceiver& model, const std::string& path) { write_file(path, serialize(model)); }
void save_weights(const QuantizedReceiver& q, const std::string& path) { write_file(path, serialize(q)); }
NeuralReceiver load_weights(const std::string& path) { return deserialize_model(read_file(path)); }
QuantizedReceiver load_quantized(const std::string& path) { return deserialize_quantized(read_file(path)); }

namespace {

std::size_t full_precision_bytes(const NeuralReceiver& m) {
  std::size_t n = 0;
  for (const ConvLayer* c : m.conv_layers()) n += c->bias.size();
  for (const NormLayer* l : m.norm_layers()) n += l->gamma.size() + l->beta.size();
  return 4 * n;
}

void finish(SizeReport& r) {
  r.total_bytes = r.kernel_bytes + r.scale_bytes + r.full_precision_bytes;
  r.reduction = r.total_bytes ? static_cast<double>(r.float32_bytes) / static_cast<double>(r.total_bytes) : 1.0;
}

}  // namespace

SizeReport model_size_bytes(const NeuralReceiver& model) {
  SizeReport r;
  for (const ConvLayer* c : model.conv_layers()) r.kernel_bytes += 4 * c->kernel.size();
  r.full_precision_bytes = full_precision_bytes(model);
  r.float32_bytes = 4 * model.parameter_count();
  finish(r);
  return r;
}

SizeReport model_size_bytes(const QuantizedReceiver& q) {
  SizeReport r;
  for (const StoredKernel& k : q.kernels) {
    r.kernel_bytes += k.payload_bytes();
    r.scale_bytes += 4 * k.num_scales();
  }
  r.full_precision_bytes = full_precision_bytes(q.base);
  r.float32_bytes = 4 * q.base.parameter_count();
  finish(r);
  return r;
}

}  // namespace nrx
