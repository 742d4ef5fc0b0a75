// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "alignkit/datamodel.hpp"
#include "alignkit/dataset_io.hpp"

namespace alignkit {

/// Pair counts over all n(n-1)/2 index pairs. Pairs tied in both x and y
/// are counted in none of the four fields.
struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t ties_x_only = 0;
  std::int64_t ties_y_only = 0;
  std::int64_t ties_both = 0;

  bool operator==(const PairCounts&) const = default;
};

/// O(n log n) pair counting (sort by x, then merge-sort inversion count on y).
/// Requires equal lengths and finite values.
PairCounts count_pairs(std::span<const Real> x, std::span<const Real> y);

/// Kendall tau-b, (C - D) / sqrt((C + D + Tx)(C + D + Ty)). Throws a
/// numerical error when either side is constant.
Real kendall_tau_b(std::span<const Real> x, std::span<const Real> y);

/// Stuart's tau-c, 2m (C - D) / (n^2 (m - 1)) with m the smaller number of
/// distinct values. Throws a numerical error when m < 2.
Real kendall_tau_c(std::span<const Real> x, std::span<const Real> y);

struct PairOutcome {
  Real chosen_score = 0.0;
  Real rejected_score = 0.0;
};

/// Credit for a pair whose two scores are equal.
enum class TieCredit { none, half };

std::optional<TieCredit> parse_tie_credit(std::string_view text);

/// Percentage of pairs where the chosen sample scores strictly higher.
Real pairwise_accuracy(std::span<const PairOutcome> outcomes, TieCredit ties = TieCredit::none);

/// Percentage of predictions whose side of `threshold` (pred > threshold is
/// positive) matches the label.
Real binary_accuracy(std::span<const Real> pred, std::span<const Label> labels, Real threshold);

/// Nearest admissible level to `value`; exact midpoints go to the lower level.
Real snap_to_level(Real value, std::span<const Real> levels);

/// Percentage of predictions that snap to exactly the gold level.
Real level_accuracy(std::span<const Real> pred, std::span<const Real> gold,
                    std::span<const Real> levels);

}  // namespace alignkit
