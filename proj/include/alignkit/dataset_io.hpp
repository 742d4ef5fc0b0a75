// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alignkit/datamodel.hpp"

namespace alignkit {

enum class ManifestKind { pointwise, pairwise, multi_objective };

std::string_view to_string(ManifestKind kind);
std::optional<ManifestKind> parse_manifest_kind(std::string_view text);

/// Name of the dimension holding the single overall judgment.
inline constexpr std::string_view kOverall = "overall";

struct DatasetManifest {
  std::string dataset_id;  // optional "_meta.dataset", else empty
  ManifestKind kind = ManifestKind::pointwise;
  DimensionSet dimensions;
  std::map<std::string, ScoreScale> scales;  // one per dimension
  std::vector<SampleRecord> records;
  std::uint64_t fingerprint = 0;  // FNV-1a of the manifest bytes

  std::size_t size() const { return records.size(); }
  const ScoreScale& scale(std::string_view dimension) const;
};

/// Record-level and manifest-level invariant violations.
std::vector<Violation> validate_manifest(const DatasetManifest& manifest);

enum class ManifestCheck { full, parse_only };

/// Parses the line-delimited manifest format. `source` names the input in
/// error messages. Malformed lines raise a data error naming the line
/// number; with ManifestCheck::full, invariant violations raise a data error
/// listing every violation.
DatasetManifest parse_manifest(std::string_view text, std::string_view source = "<memory>",
                               ManifestCheck check = ManifestCheck::full);

DatasetManifest load_manifest(const std::filesystem::path& path,
                              ManifestCheck check = ManifestCheck::full);

/// Canonical serialization: `_meta` header then one record per line.
std::string serialize_manifest(const DatasetManifest& manifest);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Sets `fingerprint` from the canonical serialization.
void refresh_fingerprint(DatasetManifest& manifest);

// --- label transformations -------------------------------------------------

enum class Label { negative, positive };

/// Tie handling at a binarization boundary. strict: score > cut is positive.
/// inclusive: score >= cut is positive.
enum class BoundaryRule { strict, inclusive };

std::optional<BoundaryRule> parse_boundary_rule(std::string_view text);

/// Maps `score` from [lo, hi] affinely onto [0, 1].
Real normalize_scale(Real score, const ScoreScale& scale);

/// Arithmetic mean of per-annotator ratings.
Real aggregate_annotators(std::span<const Real> ratings, const ScoreScale& scale);

/// Median with the midpoint convention for even counts. Requires n >= 1.
Real median(std::span<const Real> scores);

std::vector<Label> binarize_median(std::span<const Real> scores,
                                   BoundaryRule rule = BoundaryRule::strict);

Label binarize_threshold(Real score, Real threshold, BoundaryRule rule = BoundaryRule::strict);

/// Returns a copy with `dimension` rescaled to [0, 1] on every record and its
/// scale replaced by {0, 1}. Dimensions already on [0, 1] are left untouched.
DatasetManifest normalize_dimension(const DatasetManifest& manifest, std::string_view dimension);

enum class GroupKey { image_ref, id_prefix };

std::optional<GroupKey> parse_group_key(std::string_view text);

/// Separator for the id-prefix grouping rule: "img7#c2" groups under "img7".
inline constexpr char kIdPrefixSeparator = '#';
std::string group_of(const SampleRecord& record, GroupKey key);

struct PairingOptions {
  GroupKey group_key = GroupKey::image_ref;
  BoundaryRule rule = BoundaryRule::strict;
  std::optional<std::size_t> max_pairs_per_group;
  std::string score_dimension = std::string(kOverall);
};

/// Median-binarizes each group's scores and emits every (positive, negative)
/// cross pair as a chosen/rejected record pair. Groups are visited in sorted
/// key order; within a group pairs follow source order.
DatasetManifest reformulate_to_pairwise(const DatasetManifest& manifest,
                                        const PairingOptions& options = {});

}  // namespace alignkit
