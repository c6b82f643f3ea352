// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

// Strict JSON config reading: typed lookups with path-qualified errors and
// rejection of unknown keys.

#pragma once

#include "nrx/receiver.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace nrx::json_util {

using json = nlohmann::json;

std::string read_text(const std::string& path);
json parse_object(const std::string& text, const std::string& what);

class Object {
 public:
  Object(const json& j, std::string context) : j_(j), ctx_(std::move(context)) {
    if (!j_.is_object()) throw std::invalid_argument(ctx_ + ": expected a JSON object");
  }

  template <class T>
  std::optional<T> get(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) fail(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) fail(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) fail(key, "a string");
    }
    return v->get<T>();
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    auto v = get<T>(key);
    return v ? *v : fallback;
  }

  std::optional<json> object(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_object()) fail(key, "an object");
    return *v;
  }

  std::optional<json> array(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) fail(key, "an array");
    return *v;
  }

  /// A two-element numeric array [lo, hi].
  std::optional<std::pair<double, double>> range(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
      fail(key, "a [lo, hi] pair");
    }
    return std::make_pair((*v)[0].get<double>(), (*v)[1].get<double>());
  }

  /// Throws if the object holds keys that were never looked up.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw std::invalid_argument(ctx_ + ": unknown key \"" + it.key() + "\"");
    }
  }

 private:
  const json* find(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const std::string& key, const char* want) const {
    throw std::invalid_argument(ctx_ + "." + key + ": expected " + want);
  }

  const json& j_;
  std::string ctx_;
  std::set<std::string> used_;
};

ReceiverConfig receiver_config(const json& j);

}  // namespace nrx::json_util
