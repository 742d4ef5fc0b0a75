// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/multi_head.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "alignkit/error.hpp"
#include "alignkit/hash.hpp"
#include "model_io.hpp"

namespace alignkit {

DimensionSet default_dimensions(std::size_t k) {
  std::vector<std::string> names;
  names.reserve(k);
  for (std::size_t i = 0; i < k; ++i) names.push_back("y" + std::to_string(i));
  return DimensionSet(std::move(names));
}

RidgeModel fit_ridge(const Matrix& Z, const Matrix& Y, double alpha) {
  return fit_ridge(Z, Y, alpha, default_dimensions(static_cast<std::size_t>(Y.cols())));
}

RidgeModel fit_ridge(const Matrix& Z, const Matrix& Y, double alpha, DimensionSet dimensions) {
  if (Z.rows() < 2) throw data_error("fit_ridge: need at least 2 samples");
  if (Z.rows() != Y.rows()) {
    throw data_error("shape error: " + std::to_string(Z.rows()) + " embeddings but " +
                     std::to_string(Y.rows()) + " target rows");
  }
  if (Z.cols() == 0 || Y.cols() == 0) throw data_error("shape error: empty design or targets");
  if (dimensions.size() != static_cast<std::size_t>(Y.cols())) {
    throw data_error("shape error: " + std::to_string(Y.cols()) + " target columns but " +
                     std::to_string(dimensions.size()) + " dimension names");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw usage_error("ridge alpha must be finite and non-negative");
  }

  const Eigen::RowVectorXd z_mean = Z.colwise().mean();
  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const Matrix Zc = Z.rowwise() - z_mean;
  const Matrix Yc = Y.rowwise() - y_mean;

  Matrix gram = Matrix::Zero(Z.cols(), Z.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(Zc.transpose());
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += alpha;

  Eigen::LLT<Matrix> llt(gram);
  const double tiny = 1e3 * std::numeric_limits<double>::epsilon();
  if (llt.info() != Eigen::Success || !(llt.rcond() > tiny)) {
    throw numerical_error(alpha == 0.0
                              ? "singular system: centered design is rank deficient; use alpha > 0"
                              : "singular system at alpha " + std::to_string(alpha));
  }

  RidgeModel model;
  model.W = llt.solve(Zc.transpose() * Yc).transpose();  // K x d
  model.b = (y_mean - z_mean * model.W.transpose()).transpose();
  model.dimensions = std::move(dimensions);
  model.alpha = alpha;
  if (!model.W.allFinite() || !model.b.allFinite()) {
    throw numerical_error("ridge solve produced non-finite parameters");
  }
  return model;
}

namespace {

void check_shapes(const RidgeModel& model, const Matrix& Z, const Matrix& Y) {
  if (static_cast<std::size_t>(Z.cols()) != model.dim() ||
      static_cast<std::size_t>(Y.cols()) != model.outputs() || Z.rows() != Y.rows()) {
    throw data_error("shape error: data do not match a " + std::to_string(model.outputs()) + "x" +
                     std::to_string(model.dim()) + " ridge head");
  }
}

}  // namespace

double ridge_objective(const RidgeModel& model, const Matrix& Z, const Matrix& Y) {
  check_shapes(model, Z, Y);
  const Matrix residual = Y - predict_multi(model, Z);
  return residual.squaredNorm() + model.alpha * model.W.squaredNorm();
}

double ridge_mse(const RidgeModel& model, const Matrix& Z, const Matrix& Y) {
  check_shapes(model, Z, Y);
  if (Y.size() == 0) throw data_error("ridge_mse: no samples");
  return (Y - predict_multi(model, Z)).squaredNorm() / static_cast<double>(Y.size());
}

Vector predict_multi(const RidgeModel& model, const EmbeddingVector& z) {
  if (static_cast<std::size_t>(z.size()) != model.dim()) {
    throw data_error("shape error: embedding has dim " + std::to_string(z.size()) +
                     ", head expects " + std::to_string(model.dim()));
  }
  return model.W * z + model.b;
}

Matrix predict_multi(const RidgeModel& model, const Matrix& Z) {
  if (static_cast<std::size_t>(Z.cols()) != model.dim()) {
    throw data_error("shape error: embeddings have dim " + std::to_string(Z.cols()) +
                     ", head expects " + std::to_string(model.dim()));
  }
  return (Z * model.W.transpose()).rowwise() + model.b.transpose();
}

std::string_view to_string(AlphaSelection selection) {
  return selection == AlphaSelection::cross_val ? "cross_val" : "train_loss";
}

std::optional<AlphaSelection> parse_alpha_selection(std::string_view text) {
  if (text == "cross_val") return AlphaSelection::cross_val;
  if (text == "train_loss") return AlphaSelection::train_loss;
  return std::nullopt;
}

namespace {

// Mean held-out MSE over contiguous folds [k n / F, (k + 1) n / F).
double cross_val_mse(const Matrix& Z, const Matrix& Y, double alpha, const DimensionSet& dims) {
  const Eigen::Index n = Z.rows();
  const auto folds = static_cast<Eigen::Index>(kCrossValFolds);
  if (n < 2 * folds) {
    throw data_error("cross validation needs at least " + std::to_string(2 * folds) +
                     " samples, got " + std::to_string(n));
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < folds; ++k) {
    const Eigen::Index lo = k * n / folds;
    const Eigen::Index hi = (k + 1) * n / folds;
    const Eigen::Index held = hi - lo;
    Matrix Ztr(n - held, Z.cols()), Ytr(n - held, Y.cols());
    Ztr << Z.topRows(lo), Z.bottomRows(n - hi);
    Ytr << Y.topRows(lo), Y.bottomRows(n - hi);
    const RidgeModel fold = fit_ridge(Ztr, Ytr, alpha, dims);
    total += ridge_mse(fold, Z.middleRows(lo, held), Y.middleRows(lo, held));
  }
  return total / static_cast<double>(folds);
}

}  // namespace

AlphaSearchResult alpha_search(const Matrix& Z, const Matrix& Y, std::span<const double> grid,
                               AlphaSelection selection) {
  return alpha_search(Z, Y, grid, selection,
                      default_dimensions(static_cast<std::size_t>(Y.cols())));
}

AlphaSearchResult alpha_search(const Matrix& Z, const Matrix& Y, std::span<const double> grid,
                               AlphaSelection selection, DimensionSet dimensions) {
  if (grid.empty()) throw usage_error("alpha grid is empty");
  const auto min_rows = static_cast<Eigen::Index>(2 * kCrossValFolds);
  if (selection == AlphaSelection::cross_val && Z.rows() < min_rows) {
    throw data_error("cross validation needs at least " + std::to_string(min_rows) +
                     " samples, got " + std::to_string(Z.rows()));
  }

  AlphaSearchResult result;
  std::optional<std::size_t> best;
  std::optional<RidgeModel> best_model;
  double best_score = 0.0;
  std::string first_error;
  for (double alpha : grid) {
    AlphaTrial trial;
    trial.alpha = alpha;
    try {
      RidgeModel model = fit_ridge(Z, Y, alpha, dimensions);
      trial.train_objective = ridge_objective(model, Z, Y);
      trial.train_mse = ridge_mse(model, Z, Y);
      if (selection == AlphaSelection::cross_val) trial.cv_mse = cross_val_mse(Z, Y, alpha, dimensions);
      trial.ok = true;

      const double score = selection == AlphaSelection::cross_val ? *trial.cv_mse
                                                                  : trial.train_objective;
      if (!best || score < best_score) {
        best = result.trace.size();
        best_score = score;
        best_model = std::move(model);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::usage) throw;
      trial.error = e.what();
      if (first_error.empty()) first_error = e.what();
    }
    result.trace.push_back(std::move(trial));
  }
  if (!best) throw numerical_error("alpha search failed for every alpha: " + first_error);
  result.best = *best;
  result.model = std::move(*best_model);
  result.model.meta.selection = std::string(to_string(selection));
  return result;
}

RegressionData regression_data(const EmbeddingStore& store, const DatasetManifest& manifest) {
  const auto n = static_cast<Eigen::Index>(manifest.size());
  const auto k = static_cast<Eigen::Index>(manifest.dimensions.size());
  RegressionData data{Matrix(n, static_cast<Eigen::Index>(store.dim())), Matrix(n, k)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = manifest.records[static_cast<std::size_t>(i)];
    data.Z.row(i) = store.rows().row(static_cast<Eigen::Index>(store.record_row(r.id)));
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto& dim = manifest.dimensions.names()[static_cast<std::size_t>(j)];
      auto it = r.scores.find(dim);
      if (it == r.scores.end()) {
        throw data_error("record '" + r.id + "' has no score for dimension '" + dim + "'");
      }
      data.Y(i, j) = it->second;
    }
  }
  return data;
}

// Serialization --------------------------------------------------------------

using nlohmann::json;

std::string serialize_ridge_model(const RidgeModel& model, std::span<const AlphaTrial> trace) {
  json w = json::array();
  for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.W.cols(); ++j) w.push_back(model.W(i, j));
  }
  json meta = {{"fit_method", model.meta.fit_method},
               {"dataset_fingerprint", to_hex(model.meta.dataset_fingerprint)}};
  if (!model.meta.selection.empty()) meta["selection"] = model.meta.selection;
  if (!trace.empty()) {
    json rows = json::array();
    for (const auto& t : trace) {
      json row = {{"alpha", t.alpha}, {"ok", t.ok}};
      if (t.ok) {
        row["train_objective"] = t.train_objective;
        row["train_mse"] = t.train_mse;
        if (t.cv_mse) row["cv_mse"] = *t.cv_mse;
      } else {
        row["error"] = t.error;
      }
      rows.push_back(row);
    }
    meta["search"] = rows;
  }
  json doc = {{"format_version", detail::kModelFormatVersion},
              {"kind", detail::kRidgeKind},
              {"dim", model.dim()},
              {"K", model.outputs()},
              {"dimensions", model.dimensions.names()},
              {"alpha", model.alpha},
              {"W", w},
              {"b", detail::to_list(model.b)},
              {"meta", meta}};
  return doc.dump(2) + "\n";
}

RidgeModel parse_ridge_model(std::string_view text) {
  const json doc = detail::parse_model_doc(text, detail::kRidgeKind);
  try {
    RidgeModel model;
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto k = doc.at("K").get<std::size_t>();
    model.dimensions = DimensionSet(doc.at("dimensions").get<std::vector<std::string>>());
    if (model.dimensions.size() != k) {
      throw data_error("ridge model: K does not match the dimension names");
    }
    model.alpha = doc.at("alpha").get<double>();
    const Vector flat = detail::from_list(doc.at("W"));
    if (dim == 0 || static_cast<std::size_t>(flat.size()) != k * dim) {
      throw data_error("ridge model: W has " + std::to_string(flat.size()) + " entries, expected " +
                       std::to_string(k * dim));
    }
    model.W.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        model.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            flat[static_cast<Eigen::Index>(i * dim + j)];
      }
    }
    model.b = detail::from_list(doc.at("b"));
    if (static_cast<std::size_t>(model.b.size()) != k) {
      throw data_error("ridge model: b has " + std::to_string(model.b.size()) + " entries, K is " +
                       std::to_string(k));
    }
    if (!model.W.allFinite() || !model.b.allFinite() || !std::isfinite(model.alpha)) {
      throw data_error("ridge model: parameters must be finite");
    }
    const json& meta = doc.at("meta");
    model.meta.fit_method = meta.value("fit_method", std::string("centered_cholesky"));
    model.meta.selection = meta.value("selection", std::string());
    model.meta.dataset_fingerprint = detail::parse_hex(meta.at("dataset_fingerprint"));
    return model;
  } catch (const json::exception& e) {
    throw data_error(std::string("ridge model: ") + e.what());
  }
}

void save_ridge_model(const std::filesystem::path& path, const RidgeModel& model,
                      std::span<const AlphaTrial> trace) {
  detail::write_text(path, serialize_ridge_model(model, trace));
}

RidgeModel load_ridge_model(const std::filesystem::path& path) {
  return parse_ridge_model(detail::read_text(path));
}

}  // namespace alignkit
