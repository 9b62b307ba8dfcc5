// Copyright 2026 The usbench Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared JSON reading helpers (internal).

#ifndef USBENCH_SRC_JSON_UTIL_HPP_
#define USBENCH_SRC_JSON_UTIL_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "usbench/errors.hpp"
#include "usbench/types.hpp"

namespace usbench::json_util {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Bare NaN / Infinity / -Infinity tokens (as written by Python's json
// module) become null so the caller can reject them as values.
inline std::string replace_non_finite_tokens(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < text.size()) {
        out.push_back(text[++i]);
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    auto starts = [&](std::string_view tok) {
      return text.substr(i, tok.size()) == tok;
    };
    if (starts("-Infinity")) {
      out += "null";
      i += 8;
    } else if (starts("Infinity")) {
      out += "null";
      i += 7;
    } else if (starts("NaN")) {
      out += "null";
      i += 2;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

inline Json parse(std::string_view text) {
  try {
    return Json::parse(replace_non_finite_tokens(text));
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

inline OrderedJson parse_ordered(std::string_view text) {
  try {
    return OrderedJson::parse(replace_non_finite_tokens(text));
  } catch (const OrderedJson::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) +
                     ": " + e.what());
  }
}

template <typename J>
const J& field(const J& node, const char* key, const std::string& path) {
  if (!node.is_object()) throw ParseError(path + ": expected an object");
  auto it = node.find(key);
  if (it == node.end()) {
    throw ParseError(path + ": missing field '" + key + "'");
  }
  return *it;
}

template <typename J>
Id read_id(const J& node, const std::string& path) {
  if (node.is_number_integer() || node.is_number_unsigned()) {
    return Id{node.template get<std::int64_t>()};
  }
  if (node.is_string()) return Id{node.template get<std::string>()};
  throw ParseError(path + ": expected an integer or string id");
}

template <typename J>
double read_number(const J& node, const std::string& path) {
  if (!node.is_number()) throw ParseError(path + ": expected a number");
  return node.template get<double>();
}

template <typename J>
std::int64_t read_int(const J& node, const std::string& path) {
  if (node.is_number_integer() || node.is_number_unsigned()) {
    return node.template get<std::int64_t>();
  }
  if (node.is_number_float()) {
    const double v = node.template get<double>();
    if (std::floor(v) == v && std::isfinite(v)) {
      return static_cast<std::int64_t>(v);
    }
  }
  throw ParseError(path + ": expected an integer");
}

inline OrderedJson write_id(const Id& id) {
  if (const auto* i = std::get_if<std::int64_t>(&id)) return *i;
  return std::get<std::string>(id);
}

// Finite numbers as numbers, +/-inf as "inf"/"-inf", undefined as null.
inline OrderedJson write_real(std::optional<double> v) {
  if (!v || std::isnan(*v)) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

template <typename J>
std::optional<double> read_real(const J& node, const std::string& path) {
  if (node.is_null()) return std::nullopt;
  if (node.is_string()) {
    const auto s = node.template get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ParseError(path + ": expected a number, null or \"inf\"");
  }
  return read_number(node, path);
}

}  // namespace usbench::json_util

#endif  // USBENCH_SRC_JSON_UTIL_HPP_
