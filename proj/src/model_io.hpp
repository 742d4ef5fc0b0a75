// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the JSON model documents. Internal to the library.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "alignkit/datamodel.hpp"
#include "alignkit/error.hpp"

namespace alignkit::detail {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kRewardKind = "reward_head";
inline constexpr const char* kRidgeKind = "ridge_head";

inline nlohmann::json to_list(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vector from_list(const nlohmann::json& j) {
  if (!j.is_array()) throw data_error("expected a list of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw data_error("expected a list of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline std::uint64_t parse_hex(const nlohmann::json& j) {
  if (!j.is_string()) throw data_error("expected a hex string");
  const std::string s = j.get<std::string>();
  if (s.empty() || s.size() > 16) throw data_error("bad hex value '" + s + "'");
  std::uint64_t out = 0;
  for (char c : s) {
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else throw data_error("bad hex value '" + s + "'");
    out = (out << 4) | static_cast<std::uint64_t>(digit);
  }
  return out;
}

inline nlohmann::json parse_model_doc(std::string_view text, const char* kind) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw data_error("model file is not a JSON object");
  if (doc.value("format_version", -1) != kModelFormatVersion) {
    throw data_error("unsupported model format_version");
  }
  if (doc.value("kind", std::string()) != kind) {
    throw data_error(std::string("model file is not a ") + kind + " document");
  }
  return doc;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw data_error("I/O error writing '" + path.string() + "'");
}

}  // namespace alignkit::detail
