// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/datamodel.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "alignkit/error.hpp"

namespace alignkit {

std::string_view to_string(PairRole role) {
  return role == PairRole::chosen ? "chosen" : "rejected";
}

std::optional<PairRole> parse_pair_role(std::string_view text) {
  if (text == "chosen") return PairRole::chosen;
  if (text == "rejected") return PairRole::rejected;
  return std::nullopt;
}

void check_scale(const ScoreScale& scale) {
  if (!std::isfinite(scale.lo) || !std::isfinite(scale.hi) || !(scale.lo < scale.hi)) {
    throw data_error("score scale requires finite lo < hi, got [" + std::to_string(scale.lo) +
                     ", " + std::to_string(scale.hi) + "]");
  }
  for (std::size_t i = 0; i < scale.admissible_levels.size(); ++i) {
    Real level = scale.admissible_levels[i];
    if (level < scale.lo || level > scale.hi) {
      throw data_error("admissible level " + std::to_string(level) + " outside scale range");
    }
    if (i > 0 && !(scale.admissible_levels[i - 1] < level)) {
      throw data_error("admissible levels must be strictly increasing");
    }
  }
}

DimensionSet::DimensionSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw data_error("dimension set must name at least one dimension");
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) throw data_error("duplicate dimension name '" + name + "'");
  }
}

std::optional<std::size_t> DimensionSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view origin_id(std::string_view id) {
  auto cut = id.find(kOriginSeparator);
  return cut == std::string_view::npos ? id : id.substr(0, cut);
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::empty_id: return "empty id";
    case ViolationKind::duplicate_id: return "duplicate id";
    case ViolationKind::role_without_pair: return "role without pair";
    case ViolationKind::unbalanced_pair: return "unbalanced pair";
    case ViolationKind::non_finite_score: return "non-finite score";
    case ViolationKind::missing_score: return "missing score";
    case ViolationKind::missing_pair_fields: return "missing pair fields";
  }
  return "unknown";
}

std::vector<Violation> validate_dataset(const std::vector<SampleRecord>& records) {
  std::vector<Violation> out;

  std::unordered_set<std::string> seen_ids;
  std::unordered_set<std::string> reported_dupes;
  for (const auto& r : records) {
    if (r.id.empty()) {
      out.push_back({ViolationKind::empty_id, r.id, "record has an empty id"});
    } else if (!seen_ids.insert(r.id).second && reported_dupes.insert(r.id).second) {
      out.push_back({ViolationKind::duplicate_id, r.id, "id '" + r.id + "' appears more than once"});
    }
    for (const auto& [dim, value] : r.scores) {
      if (!std::isfinite(value)) {
        out.push_back({ViolationKind::non_finite_score, r.id,
                       "score '" + dim + "' of '" + r.id + "' is not finite"});
      }
    }
    if (r.pair_role && !r.pair_id) {
      out.push_back({ViolationKind::role_without_pair, r.id,
                     "record '" + r.id + "' has a pair_role but no pair_id"});
    }
  }

  // Pair balance, reported in first-seen order of pair ids.
  struct Tally {
    int chosen = 0;
    int rejected = 0;
    int untagged = 0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Tally> tallies;
  for (const auto& r : records) {
    if (!r.pair_id) continue;
    auto [it, inserted] = tallies.try_emplace(*r.pair_id);
    if (inserted) order.push_back(*r.pair_id);
    if (!r.pair_role) {
      ++it->second.untagged;
    } else if (*r.pair_role == PairRole::chosen) {
      ++it->second.chosen;
    } else {
      ++it->second.rejected;
    }
  }
  for (const auto& pid : order) {
    const Tally& t = tallies.at(pid);
    if (t.chosen != 1 || t.rejected != 1 || t.untagged != 0) {
      out.push_back({ViolationKind::unbalanced_pair, pid,
                     "pair '" + pid + "' has " + std::to_string(t.chosen) + " chosen, " +
                         std::to_string(t.rejected) + " rejected, " +
                         std::to_string(t.untagged) + " untagged records"});
    }
  }
  return out;
}

}  // namespace alignkit
