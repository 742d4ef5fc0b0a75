// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "alignkit/dataset_io.hpp"
#include "alignkit/embedding_store.hpp"
#include "alignkit/metrics.hpp"
#include "alignkit/multi_head.hpp"
#include "alignkit/reward_head.hpp"

namespace alignkit {

inline constexpr std::string_view kVersion = "0.1.0";

/// Either trained head, as loaded from a model document.
class Scorer {
 public:
  explicit Scorer(RewardHeadModel model) : model_(std::move(model)) {}
  explicit Scorer(RidgeModel model) : model_(std::move(model)) {}

  /// Detects the document kind and loads it.
  static Scorer load(const std::filesystem::path& path);

  bool is_reward() const { return std::holds_alternative<RewardHeadModel>(model_); }
  std::size_t dim() const;
  /// Output names: {"overall"} for a reward head, the ridge dimensions otherwise.
  std::vector<std::string> outputs() const;
  /// n x outputs().size() scores for rows of `Z`.
  Matrix score(const Matrix& Z) const;
  /// Scores for a single embedding.
  Vector score(const EmbeddingVector& z) const;

  const RewardHeadModel& reward() const { return std::get<RewardHeadModel>(model_); }
  const RidgeModel& ridge() const { return std::get<RidgeModel>(model_); }

 private:
  std::variant<RewardHeadModel, RidgeModel> model_;
};

enum class EvalMode { pointwise, pairwise, multi };
enum class MultiMetric { binary, level };
enum class ReportFormat { json, csv, md };

std::string_view to_string(EvalMode mode);
std::optional<EvalMode> parse_eval_mode(std::string_view text);
std::optional<MultiMetric> parse_multi_metric(std::string_view text);
std::optional<ReportFormat> parse_report_format(std::string_view text);

/// Default gold binarization cut for multi-dimension accuracy (1..4 scale).
inline constexpr double kDefaultLabelThreshold = 2.0;

struct EvalOptions {
  EvalMode mode = EvalMode::pointwise;
  /// Gold dimension for pointwise correlation.
  std::string gold_dimension = std::string(kOverall);
  /// Model output used as the scalar prediction in pointwise and pairwise
  /// modes; empty picks "overall" for reward heads and gold_dimension for
  /// ridge heads.
  std::string score_output;
  TieCredit ties = TieCredit::none;
  MultiMetric multi_metric = MultiMetric::binary;
  /// Gold labels are positive when score > label_threshold (or >= under an
  /// inclusive boundary). Dimensions whose scale does not strictly contain
  /// the threshold use their scale midpoint instead.
  double label_threshold = kDefaultLabelThreshold;
  /// Prediction cut; defaults to the same cut as the gold labels.
  std::optional<double> pred_threshold;
  BoundaryRule boundary = BoundaryRule::strict;
  /// Levels for level accuracy; empty uses each dimension's admissible levels.
  std::vector<double> levels;
};

struct MetricRow {
  std::string name;
  std::optional<double> value;  // nullopt: undefined for this input
  std::size_t count = 0;
  std::string warning;
};

struct Timing {
  double wall_seconds = 0.0;
  double samples_per_second = 0.0;
};

struct EvalReport {
  std::string dataset;
  EvalMode mode = EvalMode::pointwise;
  std::vector<MetricRow> metrics;
  std::size_t sample_count = 0;
  Timing timing;
  std::string config_hash;
  std::string version = std::string(kVersion);

  const MetricRow* find(std::string_view metric) const;
};

/// Runs one evaluation protocol. Correlations are reported x100; degenerate
/// inputs produce a null metric with a warning instead of an error.
EvalReport evaluate(const Scorer& scorer, const EmbeddingStore& store,
                    const DatasetManifest& manifest, const EvalOptions& options);

/// Gold cut used for `dimension` under `options` (see EvalOptions).
double label_cut(const ScoreScale& scale, const EvalOptions& options);

/// Fixed-width human-readable table.
void write_table(std::ostream& out, const EvalReport& report);
/// Machine-readable report: json is one object per line, one line per metric.
void write_report(std::ostream& out, const EvalReport& report, ReportFormat format);

struct BenchReport {
  std::size_t count = 0;
  std::size_t repetitions = 0;
  double mean_latency_us = 0.0;
  double p95_latency_us = 0.0;
  double samples_per_second = 0.0;
  std::string config_hash;
};

/// Times per-sample scoring of every store row, `repetitions` times, after
/// one untimed warm-up pass.
BenchReport run_bench(const Scorer& scorer, const EmbeddingStore& store, std::size_t repetitions);

void write_bench(std::ostream& out, const BenchReport& report, ReportFormat format);

/// Hex FNV-1a of the canonical (sorted-key) dump of a resolved config.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace alignkit
