// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace alignkit {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A d-dimensional multimodal embedding. Entries are finite.
using EmbeddingVector = Eigen::VectorXd;

enum class PairRole { chosen, rejected };

std::string_view to_string(PairRole role);
std::optional<PairRole> parse_pair_role(std::string_view text);

/// One (image, request, candidate, labels) item from a dataset manifest.
///
/// Pointwise records carry `scores`; pairwise records carry `pair_id` and
/// `pair_role`. The human judgment used for single-objective training and
/// evaluation lives under `scores["overall"]` by convention.
struct SampleRecord {
  std::string id;
  std::string image_ref;
  std::optional<std::string> request;
  std::string candidate;
  std::map<std::string, Real> scores;
  std::optional<std::string> pair_id;
  std::optional<PairRole> pair_role;
  std::vector<std::string> refs;

  bool operator==(const SampleRecord&) const = default;
};

/// Raw range of a judgment dimension, e.g. 1..7 or 0..1.
struct ScoreScale {
  Real lo = 0.0;
  Real hi = 1.0;
  std::vector<Real> admissible_levels;  // strictly increasing, within [lo, hi]

  bool operator==(const ScoreScale&) const = default;
};

/// Checks `lo < hi` and level ordering; throws a data error otherwise.
void check_scale(const ScoreScale& scale);

/// Ordered, unique dimension names. K = names.size() >= 1.
class DimensionSet {
 public:
  DimensionSet() = default;
  explicit DimensionSet(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  bool operator==(const DimensionSet&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Separator between a source id and the synthetic pair id of a record
/// produced by pairwise reformulation: "img7#c2~img7/0".
inline constexpr char kOriginSeparator = '~';

/// Id of the record a reformulated record was copied from (identity for
/// records that were not reformulated).
std::string_view origin_id(std::string_view id);

enum class ViolationKind {
  empty_id,
  duplicate_id,
  role_without_pair,
  unbalanced_pair,
  non_finite_score,
  // manifest-level
  missing_score,
  missing_pair_fields,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string id;  // offending record id or pair id
  std::string message;
};

/// Lists every broken SampleRecord invariant across the collection.
/// An empty result means the collection is well formed.
std::vector<Violation> validate_dataset(const std::vector<SampleRecord>& records);

}  // namespace alignkit
