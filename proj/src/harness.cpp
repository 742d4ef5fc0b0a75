// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "alignkit/error.hpp"
#include "alignkit/hash.hpp"
#include "model_io.hpp"

namespace alignkit {

using nlohmann::json;

Scorer Scorer::load(const std::filesystem::path& path) {
  const std::string text = detail::read_text(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw data_error("'" + path.string() + "' is not a model document");
  }
  const std::string kind = doc.value("kind", std::string());
  if (kind == detail::kRewardKind) return Scorer(parse_reward_model(text));
  if (kind == detail::kRidgeKind) return Scorer(parse_ridge_model(text));
  throw data_error("'" + path.string() + "' has unknown model kind '" + kind + "'");
}

std::size_t Scorer::dim() const {
  return is_reward() ? reward().dim() : ridge().dim();
}

std::vector<std::string> Scorer::outputs() const {
  if (is_reward()) return {std::string(kOverall)};
  return ridge().dimensions.names();
}

Matrix Scorer::score(const Matrix& Z) const {
  if (is_reward()) return predict_reward(reward(), Z);
  return predict_multi(ridge(), Z);
}

Vector Scorer::score(const EmbeddingVector& z) const {
  if (is_reward()) return Vector::Constant(1, predict_reward(reward(), z));
  return predict_multi(ridge(), z);
}

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::pointwise: return "pointwise";
    case EvalMode::pairwise: return "pairwise";
    case EvalMode::multi: return "multi";
  }
  return "pointwise";
}

std::optional<EvalMode> parse_eval_mode(std::string_view text) {
  if (text == "pointwise") return EvalMode::pointwise;
  if (text == "pairwise") return EvalMode::pairwise;
  if (text == "multi") return EvalMode::multi;
  return std::nullopt;
}

std::optional<MultiMetric> parse_multi_metric(std::string_view text) {
  if (text == "binary") return MultiMetric::binary;
  if (text == "level") return MultiMetric::level;
  return std::nullopt;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  if (text == "md") return ReportFormat::md;
  return std::nullopt;
}

const MetricRow* EvalReport::find(std::string_view metric) const {
  for (const auto& row : metrics) {
    if (row.name == metric) return &row;
  }
  return nullptr;
}

double label_cut(const ScoreScale& scale, const EvalOptions& options) {
  if (scale.lo < options.label_threshold && options.label_threshold < scale.hi) {
    return options.label_threshold;
  }
  return scale.lo + (scale.hi - scale.lo) / 2;
}

namespace {

std::size_t output_column(const Scorer& scorer, const std::string& name) {
  const auto names = scorer.outputs();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw data_error("model has no output named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

std::string scalar_output(const Scorer& scorer, const EvalOptions& options) {
  if (!options.score_output.empty()) return options.score_output;
  return scorer.is_reward() ? std::string(kOverall) : options.gold_dimension;
}

std::vector<Real> column(const Matrix& m, std::size_t c) {
  std::vector<Real> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, static_cast<Eigen::Index>(c));
  return out;
}

Real gold_score(const SampleRecord& r, const std::string& dim) {
  auto it = r.scores.find(dim);
  if (it == r.scores.end()) throw data_error("record '" + r.id + "' has no '" + dim + "' score");
  return it->second;
}

MetricRow guarded(std::string name, std::size_t count, auto&& compute) {
  MetricRow row{std::move(name), std::nullopt, count, {}};
  try {
    row.value = compute();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numerical) throw;
    row.warning = e.what();
  }
  return row;
}

void eval_pointwise(const Scorer& scorer, const Matrix& scores, const DatasetManifest& manifest,
                    const EvalOptions& options, EvalReport& report) {
  const auto pred = column(scores, output_column(scorer, scalar_output(scorer, options)));
  std::vector<Real> gold;
  gold.reserve(manifest.size());
  for (const auto& r : manifest.records) gold.push_back(gold_score(r, options.gold_dimension));
  const std::size_t n = gold.size();
  report.metrics.push_back(guarded("tau_b_x100", n, [&] { return 100.0 * kendall_tau_b(pred, gold); }));
  report.metrics.push_back(guarded("tau_c_x100", n, [&] { return 100.0 * kendall_tau_c(pred, gold); }));
}

void eval_pairwise(const Scorer& scorer, const Matrix& scores, const DatasetManifest& manifest,
                   const EvalOptions& options, EvalReport& report) {
  const auto pred = column(scores, output_column(scorer, scalar_output(scorer, options)));
  struct Slots {
    std::optional<Real> chosen, rejected;
  };
  std::vector<std::string> order;
  std::map<std::string, Slots> pairs;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest.records[i];
    if (!r.pair_id || !r.pair_role) throw data_error("record '" + r.id + "' is not part of a pair");
    auto [it, inserted] = pairs.try_emplace(*r.pair_id);
    if (inserted) order.push_back(*r.pair_id);
    (*r.pair_role == PairRole::chosen ? it->second.chosen : it->second.rejected) = pred[i];
  }
  std::vector<PairOutcome> outcomes;
  outcomes.reserve(order.size());
  for (const auto& pid : order) {
    const Slots& s = pairs.at(pid);
    if (!s.chosen || !s.rejected) throw data_error("pair '" + pid + "' is incomplete");
    outcomes.push_back({*s.chosen, *s.rejected});
  }
  report.metrics.push_back(
      guarded("p_acc", outcomes.size(), [&] { return pairwise_accuracy(outcomes, options.ties); }));
}

void eval_multi(const Scorer& scorer, const Matrix& scores, const DatasetManifest& manifest,
                const EvalOptions& options, EvalReport& report) {
  const auto outputs = scorer.outputs();
  Real sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < outputs.size(); ++c) {
    const std::string& dim = outputs[c];
    if (!manifest.dimensions.index_of(dim)) {
      throw data_error("manifest has no dimension '" + dim + "' required by the model");
    }
    const ScoreScale& scale = manifest.scale(dim);
    const auto pred = column(scores, c);
    std::vector<Real> gold;
    gold.reserve(manifest.size());
    for (const auto& r : manifest.records) gold.push_back(gold_score(r, dim));

    MetricRow row;
    if (options.multi_metric == MultiMetric::binary) {
      const double cut = label_cut(scale, options);
      std::vector<Label> labels;
      labels.reserve(gold.size());
      for (Real g : gold) labels.push_back(binarize_threshold(g, cut, options.boundary));
      const double pred_cut = options.pred_threshold.value_or(cut);
      row = guarded("acc/" + dim, gold.size(), [&] { return binary_accuracy(pred, labels, pred_cut); });
    } else {
      const auto& levels = options.levels.empty() ? scale.admissible_levels : options.levels;
      if (levels.empty()) {
        throw usage_error("level accuracy for '" + dim + "' needs --levels or scale levels");
      }
      row = guarded("acc/" + dim, gold.size(), [&] { return level_accuracy(pred, gold, levels); });
    }
    if (row.value) {
      sum += *row.value;
      ++defined;
    }
    report.metrics.push_back(std::move(row));
  }
  MetricRow avg{"acc/Avg", std::nullopt, defined, {}};
  if (defined > 0) {
    avg.value = sum / static_cast<Real>(defined);
  } else {
    avg.warning = "no dimension produced an accuracy";
  }
  report.metrics.push_back(std::move(avg));
}

}  // namespace

EvalReport evaluate(const Scorer& scorer, const EmbeddingStore& store,
                    const DatasetManifest& manifest, const EvalOptions& options) {
  if (scorer.dim() != store.dim()) {
    throw data_error("model expects dim " + std::to_string(scorer.dim()) + ", store has dim " +
                     std::to_string(store.dim()));
  }
  if (manifest.records.empty()) throw data_error("manifest has no records to evaluate");
  if (options.mode == EvalMode::pairwise && manifest.kind != ManifestKind::pairwise) {
    throw data_error("pairwise evaluation needs a pairwise manifest");
  }
  if (options.mode != EvalMode::pairwise && manifest.kind == ManifestKind::pairwise) {
    throw data_error(std::string(to_string(options.mode)) + " evaluation needs scored records");
  }
  if (options.mode == EvalMode::multi && scorer.is_reward()) {
    throw data_error("multi evaluation needs a ridge (multi-objective) model");
  }

  EvalReport report;
  report.dataset = manifest.dataset_id;
  report.mode = options.mode;
  report.sample_count = manifest.size();

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> ids;
  ids.reserve(manifest.size());
  for (const auto& r : manifest.records) ids.push_back(r.id);
  const Matrix scores = scorer.score(store.gather(ids));
  switch (options.mode) {
    case EvalMode::pointwise: eval_pointwise(scorer, scores, manifest, options, report); break;
    case EvalMode::pairwise: eval_pairwise(scorer, scores, manifest, options, report); break;
    case EvalMode::multi: eval_multi(scorer, scores, manifest, options, report); break;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.timing.wall_seconds = secs;
  report.timing.samples_per_second = secs > 0 ? static_cast<double>(manifest.size()) / secs : 0.0;
  return report;
}

namespace {

std::string format_value(const std::optional<double>& v) {
  if (!v) return "null";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << *v;
  return s.str();
}

std::string csv_escape(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_table(std::ostream& out, const EvalReport& report) {
  out << "dataset: " << (report.dataset.empty() ? "-" : report.dataset)
      << "  mode: " << to_string(report.mode) << "  samples: " << report.sample_count
      << "  config: " << report.config_hash << "\n";
  out << std::left << std::setw(32) << "metric" << std::right << std::setw(10) << "value"
      << std::setw(8) << "n" << "\n";
  out << std::string(50, '-') << "\n";
  for (const auto& row : report.metrics) {
    out << std::left << std::setw(32) << row.name << std::right << std::setw(10)
        << format_value(row.value) << std::setw(8) << row.count << "\n";
    if (!row.warning.empty()) out << "  warning: " << row.warning << "\n";
  }
  out << std::fixed << std::setprecision(4) << "wall " << report.timing.wall_seconds << " s, "
      << std::setprecision(1) << report.timing.samples_per_second << " samples/s\n";
  out.unsetf(std::ios::floatfield);
}

void write_report(std::ostream& out, const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::json:
      for (const auto& row : report.metrics) {
        json j = {{"dataset", report.dataset},
                  {"mode", to_string(report.mode)},
                  {"metric", row.name},
                  {"value", row.value ? json(*row.value) : json(nullptr)},
                  {"n", row.count},
                  {"samples", report.sample_count},
                  {"wall_seconds", report.timing.wall_seconds},
                  {"samples_per_second", report.timing.samples_per_second},
                  {"config_hash", report.config_hash},
                  {"version", report.version}};
        if (!row.warning.empty()) j["warning"] = row.warning;
        out << j.dump() << "\n";
      }
      break;
    case ReportFormat::csv:
      out << "dataset,mode,metric,value,n,samples,wall_seconds,samples_per_second,config_hash,"
             "version,warning\n";
      for (const auto& row : report.metrics) {
        out << csv_escape(report.dataset) << ',' << to_string(report.mode) << ','
            << csv_escape(row.name) << ',';
        if (row.value) out << json(*row.value).dump();
        out << ',' << row.count << ',' << report.sample_count << ','
            << json(report.timing.wall_seconds).dump() << ','
            << json(report.timing.samples_per_second).dump() << ',' << report.config_hash << ','
            << report.version << ',' << csv_escape(row.warning) << "\n";
      }
      break;
    case ReportFormat::md:
      out << "| metric | value | n |\n|---|---:|---:|\n";
      for (const auto& row : report.metrics) {
        out << "| " << row.name << " | " << format_value(row.value) << " | " << row.count << " |\n";
      }
      out << "\n" << report.sample_count << " samples, config `" << report.config_hash
          << "`, alignkit " << report.version << "\n";
      break;
  }
}

BenchReport run_bench(const Scorer& scorer, const EmbeddingStore& store, std::size_t repetitions) {
  if (store.count() == 0) throw data_error("bench: embedding store is empty");
  if (repetitions == 0) throw usage_error("bench: repetitions must be positive");
  if (scorer.dim() != store.dim()) {
    throw data_error("model expects dim " + std::to_string(scorer.dim()) + ", store has dim " +
                     std::to_string(store.dim()));
  }
  using Clock = std::chrono::steady_clock;
  const Matrix& rows = store.rows();
  double sink = 0.0;

  // Warm-up: one untimed pass over every row.
  for (Eigen::Index i = 0; i < rows.rows(); ++i) sink += scorer.score(EmbeddingVector(rows.row(i).transpose())).sum();

  std::vector<double> latencies;
  latencies.reserve(store.count() * repetitions);
  const auto begin = Clock::now();
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const auto t0 = Clock::now();
      sink += scorer.score(EmbeddingVector(rows.row(i).transpose())).sum();
      latencies.push_back(std::chrono::duration<double, std::micro>(Clock::now() - t0).count());
    }
  }
  const double total = std::chrono::duration<double>(Clock::now() - begin).count();
  if (!std::isfinite(sink)) throw numerical_error("bench: model produced non-finite scores");

  BenchReport report;
  report.count = store.count();
  report.repetitions = repetitions;
  double sum = 0.0;
  for (double l : latencies) sum += l;
  report.mean_latency_us = sum / static_cast<double>(latencies.size());
  std::sort(latencies.begin(), latencies.end());
  const auto p95 = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(latencies.size())));
  report.p95_latency_us = latencies[std::max<std::size_t>(p95, 1) - 1];
  report.samples_per_second = total > 0 ? static_cast<double>(latencies.size()) / total : 0.0;
  return report;
}

void write_bench(std::ostream& out, const BenchReport& r, ReportFormat format) {
  json j = {{"count", r.count},
            {"repetitions", r.repetitions},
            {"mean_latency_us", r.mean_latency_us},
            {"p95_latency_us", r.p95_latency_us},
            {"samples_per_second", r.samples_per_second},
            {"config_hash", r.config_hash},
            {"version", kVersion}};
  switch (format) {
    case ReportFormat::json: out << j.dump() << "\n"; break;
    case ReportFormat::csv:
      out << "count,repetitions,mean_latency_us,p95_latency_us,samples_per_second,config_hash\n"
          << r.count << ',' << r.repetitions << ',' << j["mean_latency_us"].dump() << ','
          << j["p95_latency_us"].dump() << ',' << j["samples_per_second"].dump() << ','
          << r.config_hash << "\n";
      break;
    case ReportFormat::md:
      out << "| count | repetitions | mean latency (us) | p95 latency (us) | samples/s |\n"
          << "|---:|---:|---:|---:|---:|\n"
          << "| " << r.count << " | " << r.repetitions << " | " << j["mean_latency_us"].dump()
          << " | " << j["p95_latency_us"].dump() << " | " << j["samples_per_second"].dump()
          << " |\n";
      break;
  }
}

std::string config_hash(const json& resolved) { return to_hex(fnv1a64(resolved.dump())); }

}  // namespace alignkit
