// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alignkit/datamodel.hpp"
#include "alignkit/dataset_io.hpp"
#include "alignkit/embedding_store.hpp"

namespace alignkit {

/// Regularization grid searched by default.
inline constexpr std::array<double, 6> kDefaultAlphaGrid = {0.001, 0.01, 0.1, 1.0, 10.0, 100.0};

inline constexpr std::size_t kCrossValFolds = 5;

struct RidgeMeta {
  std::string fit_method = "centered_cholesky";
  std::string selection;  // empty for a direct fit
  std::uint64_t dataset_fingerprint = 0;

  bool operator==(const RidgeMeta&) const = default;
};

/// Multi-output affine head y = W z + b with W in R^{K x d}. Outputs are
/// uncalibrated and never aggregated into a single score.
struct RidgeModel {
  Matrix W;
  Vector b;
  DimensionSet dimensions;
  double alpha = 0.0;
  RidgeMeta meta;

  std::size_t outputs() const { return static_cast<std::size_t>(W.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(W.cols()); }
};

/// Placeholder names "y0", "y1", ... for fits without named dimensions.
DimensionSet default_dimensions(std::size_t k);

/// Exact minimizer of sum_i ||y_i - W z_i - b||^2 + alpha ||W||_F^2 with an
/// unpenalized intercept. Data are centered, then (Zc'Zc + alpha I) W' = Zc'Yc
/// is solved by Cholesky and b = mean(Y) - W mean(Z).
///
/// alpha == 0 requests an unregularized fit and fails with a numerical error
/// when the centered design is rank deficient.
RidgeModel fit_ridge(const Matrix& Z, const Matrix& Y, double alpha);
RidgeModel fit_ridge(const Matrix& Z, const Matrix& Y, double alpha, DimensionSet dimensions);

/// Full penalized objective at the model's (W, b) on (Z, Y).
double ridge_objective(const RidgeModel& model, const Matrix& Z, const Matrix& Y);

/// Mean squared error over all n x K entries.
double ridge_mse(const RidgeModel& model, const Matrix& Z, const Matrix& Y);

Vector predict_multi(const RidgeModel& model, const EmbeddingVector& z);
/// Row i of the result is the prediction for row i of `Z`.
Matrix predict_multi(const RidgeModel& model, const Matrix& Z);

enum class AlphaSelection { train_loss, cross_val };

std::string_view to_string(AlphaSelection selection);
std::optional<AlphaSelection> parse_alpha_selection(std::string_view text);

struct AlphaTrial {
  double alpha = 0.0;
  bool ok = false;
  std::string error;
  double train_objective = 0.0;  // penalized objective of the full-data fit
  double train_mse = 0.0;
  std::optional<double> cv_mse;  // mean held-out MSE (cross_val only)
};

struct AlphaSearchResult {
  RidgeModel model;  // refit on all data at the winning alpha
  std::vector<AlphaTrial> trace;
  std::size_t best = 0;  // index into trace
};

/// Fits one model per alpha and keeps the best under `selection`:
/// train_loss minimizes the penalized training objective, cross_val
/// minimizes mean held-out MSE over kCrossValFolds contiguous folds. Ties go
/// to the earlier grid entry.
AlphaSearchResult alpha_search(const Matrix& Z, const Matrix& Y, std::span<const double> grid,
                               AlphaSelection selection, DimensionSet dimensions);
AlphaSearchResult alpha_search(const Matrix& Z, const Matrix& Y, std::span<const double> grid,
                               AlphaSelection selection = AlphaSelection::cross_val);

struct RegressionData {
  Matrix Z;  // n x d
  Matrix Y;  // n x K, columns in manifest dimension order
};

/// Gathers embeddings and per-dimension scores for every record.
RegressionData regression_data(const EmbeddingStore& store, const DatasetManifest& manifest);

std::string serialize_ridge_model(const RidgeModel& model,
                                  std::span<const AlphaTrial> trace = {});
RidgeModel parse_ridge_model(std::string_view text);
void save_ridge_model(const std::filesystem::path& path, const RidgeModel& model,
                      std::span<const AlphaTrial> trace = {});
RidgeModel load_ridge_model(const std::filesystem::path& path);

}  // namespace alignkit
