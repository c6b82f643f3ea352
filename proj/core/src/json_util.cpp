// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace nrx::json_util {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_object(const std::string& text, const std::string& what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(what + ": top level must be a JSON object");
  return j;
}

ReceiverConfig receiver_config(const json& j) {
  Object o(j, "receiver");
  ReceiverConfig c;
  c.num_blocks = o.get_or("num_blocks", c.num_blocks);
  c.channels = o.get_or("channels", c.channels);
  c.kernel_h = o.get_or("kernel_h", c.kernel_h);
  c.kernel_w = o.get_or("kernel_w", c.kernel_w);
  c.dilation_h = o.get_or("dilation_h", c.dilation_h);
  c.dilation_w = o.get_or("dilation_w", c.dilation_w);
  c.bits_per_symbol = o.get_or("bits_per_symbol", c.bits_per_symbol);
  c.num_rx = o.get_or("num_rx", c.num_rx);
  o.finish();
  c.validate();
  return c;
}

}  // namespace nrx::json_util
