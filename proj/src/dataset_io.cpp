// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alignkit/error.hpp"
#include "alignkit/hash.hpp"

namespace alignkit {

using nlohmann::json;

std::string_view to_string(ManifestKind kind) {
  switch (kind) {
    case ManifestKind::pointwise: return "pointwise";
    case ManifestKind::pairwise: return "pairwise";
    case ManifestKind::multi_objective: return "multi_objective";
  }
  return "pointwise";
}

std::optional<ManifestKind> parse_manifest_kind(std::string_view text) {
  if (text == "pointwise") return ManifestKind::pointwise;
  if (text == "pairwise") return ManifestKind::pairwise;
  if (text == "multi_objective") return ManifestKind::multi_objective;
  return std::nullopt;
}

std::optional<BoundaryRule> parse_boundary_rule(std::string_view text) {
  if (text == "strict") return BoundaryRule::strict;
  if (text == "inclusive") return BoundaryRule::inclusive;
  return std::nullopt;
}

std::optional<GroupKey> parse_group_key(std::string_view text) {
  if (text == "image_ref") return GroupKey::image_ref;
  if (text == "id_prefix" || text == "id-prefix") return GroupKey::id_prefix;
  return std::nullopt;
}

const ScoreScale& DatasetManifest::scale(std::string_view dimension) const {
  auto it = scales.find(std::string(dimension));
  if (it == scales.end()) {
    throw data_error("manifest has no scale for dimension '" + std::string(dimension) + "'");
  }
  return it->second;
}

std::vector<Violation> validate_manifest(const DatasetManifest& manifest) {
  std::vector<Violation> out = validate_dataset(manifest.records);
  for (const auto& r : manifest.records) {
    if (manifest.kind == ManifestKind::pairwise) {
      if (!r.pair_id || !r.pair_role) {
        out.push_back({ViolationKind::missing_pair_fields, r.id,
                       "pairwise record '" + r.id + "' lacks pair_id or pair_role"});
      }
      continue;
    }
    for (const auto& dim : manifest.dimensions.names()) {
      if (!r.scores.contains(dim)) {
        out.push_back({ViolationKind::missing_score, r.id,
                       "record '" + r.id + "' has no score for dimension '" + dim + "'"});
      }
    }
  }
  return out;
}

namespace {

[[noreturn]] void fail_line(std::string_view source, std::size_t line, const std::string& what) {
  throw data_error(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* key, std::string_view source,
                           std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail_line(source, line, std::string("missing required field \"") + key + "\"");
  if (!it->is_string()) fail_line(source, line, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

ScoreScale parse_scale(const json& j, std::string_view source, std::size_t line) {
  if (!j.is_object() || !j.contains("lo") || !j.contains("hi") || !j["lo"].is_number() ||
      !j["hi"].is_number()) {
    fail_line(source, line, "scale entries must be objects with numeric \"lo\" and \"hi\"");
  }
  ScoreScale scale{j["lo"].get<Real>(), j["hi"].get<Real>(), {}};
  if (j.contains("levels")) {
    if (!j["levels"].is_array()) fail_line(source, line, "\"levels\" must be a list of numbers");
    for (const auto& v : j["levels"]) {
      if (!v.is_number()) fail_line(source, line, "\"levels\" must be a list of numbers");
      scale.admissible_levels.push_back(v.get<Real>());
    }
  }
  try {
    check_scale(scale);
  } catch (const Error& e) {
    fail_line(source, line, e.what());
  }
  return scale;
}

void parse_meta(const json& meta, DatasetManifest& m, std::string_view source, std::size_t line) {
  if (!meta.is_object()) fail_line(source, line, "\"_meta\" must be an object");
  for (const auto& [key, _] : meta.items()) {
    if (key != "kind" && key != "dimensions" && key != "scale" && key != "dataset") {
      fail_line(source, line, "unknown _meta field \"" + key + "\"");
    }
  }
  const std::string kind = require_string(meta, "kind", source, line);
  auto parsed = parse_manifest_kind(kind);
  if (!parsed) fail_line(source, line, "unknown manifest kind \"" + kind + "\"");
  m.kind = *parsed;
  if (meta.contains("dataset")) m.dataset_id = require_string(meta, "dataset", source, line);

  if (!meta.contains("dimensions") || !meta["dimensions"].is_array()) {
    fail_line(source, line, "\"_meta.dimensions\" must be a list of names");
  }
  std::vector<std::string> names;
  for (const auto& v : meta["dimensions"]) {
    if (!v.is_string()) fail_line(source, line, "dimension names must be strings");
    names.push_back(v.get<std::string>());
  }
  try {
    m.dimensions = DimensionSet(std::move(names));
  } catch (const Error& e) {
    fail_line(source, line, e.what());
  }

  const json scale = meta.value("scale", json::object());
  if (!scale.is_object()) fail_line(source, line, "\"_meta.scale\" must be an object");
  for (const auto& [key, _] : scale.items()) {
    if (!m.dimensions.index_of(key)) {
      fail_line(source, line, "scale given for undeclared dimension \"" + key + "\"");
    }
  }
  for (const auto& dim : m.dimensions.names()) {
    if (!scale.contains(dim)) {
      if (m.kind == ManifestKind::pairwise) {
        m.scales[dim] = ScoreScale{};
        continue;
      }
      fail_line(source, line, "missing scale for dimension \"" + dim + "\"");
    }
    m.scales[dim] = parse_scale(scale[dim], source, line);
  }
}

SampleRecord parse_record(const json& obj, std::string_view source, std::size_t line) {
  static constexpr std::string_view kKeys[] = {"id",      "image_ref", "request",  "candidate",
                                               "refs",    "scores",    "pair_id",  "pair_role"};
  for (const auto& [key, _] : obj.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      fail_line(source, line, "unknown field \"" + key + "\"");
    }
  }
  SampleRecord r;
  r.id = require_string(obj, "id", source, line);
  r.image_ref = require_string(obj, "image_ref", source, line);
  r.candidate = require_string(obj, "candidate", source, line);
  if (obj.contains("request") && !obj["request"].is_null()) {
    r.request = require_string(obj, "request", source, line);
  }
  if (obj.contains("refs") && !obj["refs"].is_null()) {
    if (!obj["refs"].is_array()) fail_line(source, line, "\"refs\" must be a list of strings");
    for (const auto& v : obj["refs"]) {
      if (!v.is_string()) fail_line(source, line, "\"refs\" must be a list of strings");
      r.refs.push_back(v.get<std::string>());
    }
  }
  if (obj.contains("scores") && !obj["scores"].is_null()) {
    if (!obj["scores"].is_object()) fail_line(source, line, "\"scores\" must be an object");
    for (const auto& [name, v] : obj["scores"].items()) {
      if (!v.is_number()) fail_line(source, line, "score \"" + name + "\" must be a number");
      r.scores[name] = v.get<Real>();
    }
  }
  if (obj.contains("pair_id") && !obj["pair_id"].is_null()) {
    r.pair_id = require_string(obj, "pair_id", source, line);
  }
  if (obj.contains("pair_role") && !obj["pair_role"].is_null()) {
    const std::string role = require_string(obj, "pair_role", source, line);
    r.pair_role = parse_pair_role(role);
    if (!r.pair_role) fail_line(source, line, "pair_role must be \"chosen\" or \"rejected\"");
  }
  return r;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw data_error("error reading '" + path.string() + "'");
  return std::move(buf).str();
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text, std::string_view source,
                               ManifestCheck check) {
  DatasetManifest m;
  bool have_meta = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) fail_line(source, line_no, "malformed JSON");
    if (!obj.is_object()) fail_line(source, line_no, "each line must be a JSON object");

    if (!have_meta) {
      if (!obj.contains("_meta") || obj.size() != 1) {
        fail_line(source, line_no, "first line must be the \"_meta\" header");
      }
      parse_meta(obj["_meta"], m, source, line_no);
      have_meta = true;
      continue;
    }
    if (obj.contains("_meta")) fail_line(source, line_no, "\"_meta\" may only appear on the first line");
    m.records.push_back(parse_record(obj, source, line_no));
  }
  if (!have_meta) throw data_error(std::string(source) + ": empty manifest (no \"_meta\" header)");
  m.fingerprint = fnv1a64(text);

  if (check == ManifestCheck::full) {
    auto violations = validate_manifest(m);
    if (!violations.empty()) {
      std::string msg = std::string(source) + ": " + std::to_string(violations.size()) +
                        " validation error(s)";
      for (const auto& v : violations) {
        msg += "\n  ";
        msg += to_string(v.kind);
        msg += ": ";
        msg += v.message;
      }
      throw data_error(msg);
    }
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path, ManifestCheck check) {
  const std::string text = read_file(path);
  return parse_manifest(text, path.string(), check);
}

std::string serialize_manifest(const DatasetManifest& m) {
  json meta = json::object();
  if (!m.dataset_id.empty()) meta["dataset"] = m.dataset_id;
  meta["kind"] = to_string(m.kind);
  meta["dimensions"] = m.dimensions.names();
  json scale = json::object();
  for (const auto& dim : m.dimensions.names()) {
    auto it = m.scales.find(dim);
    if (it == m.scales.end()) continue;
    json s = {{"lo", it->second.lo}, {"hi", it->second.hi}};
    if (!it->second.admissible_levels.empty()) s["levels"] = it->second.admissible_levels;
    scale[dim] = s;
  }
  meta["scale"] = scale;

  std::string out = json{{"_meta", meta}}.dump();
  out += '\n';
  for (const auto& r : m.records) {
    json j = json::object();
    j["id"] = r.id;
    j["image_ref"] = r.image_ref;
    if (r.request) j["request"] = *r.request;
    j["candidate"] = r.candidate;
    if (!r.refs.empty()) j["refs"] = r.refs;
    if (!r.scores.empty()) j["scores"] = r.scores;
    if (r.pair_id) j["pair_id"] = *r.pair_id;
    if (r.pair_role) j["pair_role"] = to_string(*r.pair_role);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write '" + path.string() + "'");
  out << serialize_manifest(manifest);
  if (!out) throw data_error("error writing '" + path.string() + "'");
}

void refresh_fingerprint(DatasetManifest& manifest) {
  manifest.fingerprint = fnv1a64(serialize_manifest(manifest));
}

Real normalize_scale(Real score, const ScoreScale& scale) {
  check_scale(scale);
  if (!(score >= scale.lo && score <= scale.hi)) {
    throw data_error("score " + std::to_string(score) + " outside scale [" +
                     std::to_string(scale.lo) + ", " + std::to_string(scale.hi) + "]");
  }
  return (score - scale.lo) / (scale.hi - scale.lo);
}

Real aggregate_annotators(std::span<const Real> ratings, const ScoreScale& scale) {
  if (ratings.empty()) throw data_error("aggregate_annotators: no ratings given");
  for (Real r : ratings) {
    if (!(r >= scale.lo && r <= scale.hi)) {
      throw data_error("rating " + std::to_string(r) + " outside scale [" +
                       std::to_string(scale.lo) + ", " + std::to_string(scale.hi) + "]");
    }
  }
  // Summing in sorted order makes the mean independent of rating order.
  std::vector<Real> sorted(ratings.begin(), ratings.end());
  std::sort(sorted.begin(), sorted.end());
  Real sum = std::accumulate(sorted.begin(), sorted.end(), Real{0});
  Real mean = sum / static_cast<Real>(sorted.size());
  return std::clamp(mean, scale.lo, scale.hi);
}

Real median(std::span<const Real> scores) {
  if (scores.empty()) throw data_error("median of an empty list");
  std::vector<Real> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return sorted[n / 2 - 1] + (sorted[n / 2] - sorted[n / 2 - 1]) / 2;
}

Label binarize_threshold(Real score, Real threshold, BoundaryRule rule) {
  const bool pos = rule == BoundaryRule::strict ? score > threshold : score >= threshold;
  return pos ? Label::positive : Label::negative;
}

std::vector<Label> binarize_median(std::span<const Real> scores, BoundaryRule rule) {
  if (scores.size() < 2) throw data_error("binarize_median needs at least 2 scores");
  std::vector<Real> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const Real low = sorted[(n - 1) / 2];
  const Real high = sorted[n / 2];

  // Compare against the central order statistics rather than a computed
  // midpoint so rounding in (low + high) / 2 can never flip a label. When
  // low < high no score lies strictly between them, so "above the midpoint"
  // and "at least high" coincide.
  std::vector<Label> labels;
  labels.reserve(n);
  for (Real s : scores) {
    Label label = low < high ? (s >= high ? Label::positive : Label::negative)
                             : binarize_threshold(s, low, rule);
    labels.push_back(label);
  }
  return labels;
}

DatasetManifest normalize_dimension(const DatasetManifest& manifest, std::string_view dimension) {
  const ScoreScale& scale = manifest.scale(dimension);
  DatasetManifest out = manifest;
  if (scale.lo == 0.0 && scale.hi == 1.0) return out;
  const std::string dim(dimension);
  for (auto& r : out.records) {
    auto it = r.scores.find(dim);
    if (it != r.scores.end()) it->second = normalize_scale(it->second, scale);
  }
  ScoreScale unit{0.0, 1.0, {}};
  for (Real level : scale.admissible_levels) {
    unit.admissible_levels.push_back(normalize_scale(level, scale));
  }
  out.scales[dim] = unit;
  refresh_fingerprint(out);
  return out;
}

std::string group_of(const SampleRecord& record, GroupKey key) {
  if (key == GroupKey::image_ref) return record.image_ref;
  auto cut = record.id.find(kIdPrefixSeparator);
  return cut == std::string::npos ? record.id : record.id.substr(0, cut);
}

DatasetManifest reformulate_to_pairwise(const DatasetManifest& manifest,
                                        const PairingOptions& options) {
  if (manifest.kind != ManifestKind::pointwise) {
    throw data_error("reformulate_to_pairwise expects a pointwise manifest");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    if (!r.scores.contains(options.score_dimension)) {
      throw data_error("record '" + r.id + "' has no '" + options.score_dimension + "' score");
    }
    groups[group_of(r, options.group_key)].push_back(i);
  }

  DatasetManifest out;
  out.dataset_id = manifest.dataset_id;
  out.kind = ManifestKind::pairwise;
  out.dimensions = manifest.dimensions;
  out.scales = manifest.scales;

  bool any_group_usable = false;
  for (const auto& [group, members] : groups) {
    if (members.size() < 2) continue;
    any_group_usable = true;
    std::vector<Real> scores;
    scores.reserve(members.size());
    for (std::size_t i : members) scores.push_back(manifest.records[i].scores.at(options.score_dimension));
    const auto labels = binarize_median(scores, options.rule);

    std::vector<std::size_t> pos, neg;
    for (std::size_t k = 0; k < members.size(); ++k) {
      (labels[k] == Label::positive ? pos : neg).push_back(members[k]);
    }
    std::size_t emitted = 0;
    for (std::size_t p : pos) {
      for (std::size_t q : neg) {
        if (options.max_pairs_per_group && emitted >= *options.max_pairs_per_group) break;
        const std::string pair_id = group + "/" + std::to_string(emitted);
        for (auto [src, role] : {std::pair{p, PairRole::chosen}, std::pair{q, PairRole::rejected}}) {
          SampleRecord copy = manifest.records[src];
          copy.id = copy.id + kOriginSeparator + pair_id;
          copy.pair_id = pair_id;
          copy.pair_role = role;
          out.records.push_back(std::move(copy));
        }
        ++emitted;
      }
    }
  }
  if (!any_group_usable) {
    throw data_error("reformulate_to_pairwise: every group has fewer than 2 records");
  }
  refresh_fingerprint(out);
  return out;
}

}  // namespace alignkit
