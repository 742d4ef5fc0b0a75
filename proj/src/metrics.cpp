// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "alignkit/error.hpp"

namespace alignkit {

namespace {

void check_rank_pair(std::span<const Real> x, std::span<const Real> y) {
  if (x.size() != y.size()) {
    throw data_error("shape error: rank correlation needs equal lengths, got " +
                     std::to_string(x.size()) + " and " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw numerical_error("rank correlation needs at least 2 samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw data_error("rank correlation inputs must be finite");
    }
  }
}

std::int64_t choose2(std::int64_t t) { return t * (t - 1) / 2; }

// Sum of t(t-1)/2 over runs of equal values in an already sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq equal) {
  std::int64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += choose2(static_cast<std::int64_t>(run));
      run = 1;
    }
  }
  return total + choose2(static_cast<std::int64_t>(run));
}

// Stable merge sort of `v`, returning the number of strict inversions
// (i < j with v[i] > v[j]).
std::int64_t sort_count_inversions(std::vector<Real>& v, std::vector<Real>& scratch) {
  const std::size_t n = v.size();
  std::int64_t inversions = 0;
  scratch.resize(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += static_cast<std::int64_t>(mid - i);
          scratch[k++] = v[j++];
        } else {
          scratch[k++] = v[i++];
        }
      }
      while (i < mid) scratch[k++] = v[i++];
      while (j < hi) scratch[k++] = v[j++];
    }
    std::swap(v, scratch);
  }
  return inversions;
}

std::size_t distinct_count(std::span<const Real> v) {
  std::vector<Real> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

}  // namespace

PairCounts count_pairs(std::span<const Real> x, std::span<const Real> y) {
  check_rank_pair(x, y);
  const std::size_t n = x.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  // Pairs tied in x (n1) and tied in both (n3), from runs in (x, y) order.
  const std::int64_t n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]];
  });
  const std::int64_t n3 = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });

  // With ties in x broken by ascending y, every strict inversion of y in
  // this order is exactly one discordant pair.
  std::vector<Real> ys(n), scratch;
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t discordant = sort_count_inversions(ys, scratch);

  const std::int64_t n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  PairCounts c;
  c.ties_both = n3;
  c.ties_x_only = n1 - n3;
  c.ties_y_only = n2 - n3;
  c.discordant = discordant;
  c.concordant = choose2(static_cast<std::int64_t>(n)) - n1 - n2 + n3 - discordant;
  return c;
}

Real kendall_tau_b(std::span<const Real> x, std::span<const Real> y) {
  const PairCounts c = count_pairs(x, y);
  const auto untied = static_cast<Real>(c.concordant + c.discordant);
  const Real denom_x = untied + static_cast<Real>(c.ties_x_only);
  const Real denom_y = untied + static_cast<Real>(c.ties_y_only);
  if (denom_x == 0.0 || denom_y == 0.0) {
    throw numerical_error("kendall tau-b undefined: a constant input has no untied pairs");
  }
  return static_cast<Real>(c.concordant - c.discordant) / std::sqrt(denom_x * denom_y);
}

Real kendall_tau_c(std::span<const Real> x, std::span<const Real> y) {
  const PairCounts c = count_pairs(x, y);
  const std::size_t m = std::min(distinct_count(x), distinct_count(y));
  if (m < 2) throw numerical_error("kendall tau-c undefined: fewer than 2 distinct values");
  const auto n = static_cast<Real>(x.size());
  const auto mm = static_cast<Real>(m);
  return 2.0 * mm * static_cast<Real>(c.concordant - c.discordant) / (n * n * (mm - 1.0));
}

std::optional<TieCredit> parse_tie_credit(std::string_view text) {
  if (text == "none" || text == "strict") return TieCredit::none;
  if (text == "half") return TieCredit::half;
  return std::nullopt;
}

Real pairwise_accuracy(std::span<const PairOutcome> outcomes, TieCredit ties) {
  if (outcomes.empty()) throw data_error("pairwise_accuracy: no pairs");
  Real credit = 0.0;
  for (const auto& o : outcomes) {
    if (!std::isfinite(o.chosen_score) || !std::isfinite(o.rejected_score)) {
      throw data_error("pairwise_accuracy: scores must be finite");
    }
    if (o.chosen_score > o.rejected_score) {
      credit += 1.0;
    } else if (o.chosen_score == o.rejected_score && ties == TieCredit::half) {
      credit += 0.5;
    }
  }
  return 100.0 * credit / static_cast<Real>(outcomes.size());
}

Real binary_accuracy(std::span<const Real> pred, std::span<const Label> labels, Real threshold) {
  if (pred.size() != labels.size()) {
    throw data_error("shape error: " + std::to_string(pred.size()) + " predictions but " +
                     std::to_string(labels.size()) + " labels");
  }
  if (pred.empty()) throw data_error("binary_accuracy: no samples");
  std::size_t matches = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Label predicted = pred[i] > threshold ? Label::positive : Label::negative;
    if (predicted == labels[i]) ++matches;
  }
  return 100.0 * static_cast<Real>(matches) / static_cast<Real>(pred.size());
}

Real snap_to_level(Real value, std::span<const Real> levels) {
  if (levels.empty()) throw data_error("snap_to_level: no levels");
  // First level at or above value; compare with its lower neighbour.
  auto it = std::lower_bound(levels.begin(), levels.end(), value);
  if (it == levels.begin()) return *it;
  if (it == levels.end()) return levels.back();
  const Real upper = *it;
  const Real lower = *(it - 1);
  return (upper - value) < (value - lower) ? upper : lower;
}

Real level_accuracy(std::span<const Real> pred, std::span<const Real> gold,
                    std::span<const Real> levels) {
  if (pred.size() != gold.size()) {
    throw data_error("shape error: " + std::to_string(pred.size()) + " predictions but " +
                     std::to_string(gold.size()) + " gold values");
  }
  if (pred.empty()) throw data_error("level_accuracy: no samples");
  if (levels.empty()) throw data_error("level_accuracy: no levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i - 1] < levels[i])) throw data_error("levels must be strictly increasing");
  }
  std::size_t matches = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!std::binary_search(levels.begin(), levels.end(), gold[i])) {
      throw data_error("invalid gold value " + std::to_string(gold[i]) + ": not an admissible level");
    }
    if (snap_to_level(pred[i], levels) == gold[i]) ++matches;
  }
  return 100.0 * static_cast<Real>(matches) / static_cast<Real>(pred.size());
}

}  // namespace alignkit
