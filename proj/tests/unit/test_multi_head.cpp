// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "alignkit/error.hpp"
#include "alignkit/multi_head.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace alignkit {
namespace {

using testing_support::random_matrix;
using testing_support::TempDir;

TEST(FitRidge, HandExampleWithoutPenalty) {
  Matrix Z(3, 1), Y(3, 1);
  Z << 1, 2, 3;
  Y << 2, 4, 6;
  const RidgeModel m = fit_ridge(Z, Y, 0.0);
  EXPECT_NEAR(m.W(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(m.b(0), 0.0, 1e-12);
  EXPECT_EQ(m.dimensions.names(), std::vector<std::string>{"y0"});
}

TEST(FitRidge, HugeAlphaShrinksToMeans) {
  std::mt19937_64 rng(1);
  const Matrix Z = random_matrix(rng, 40, 5), Y = random_matrix(rng, 40, 3);
  const RidgeModel m = fit_ridge(Z, Y, 1e12);
  EXPECT_LT(m.W.norm(), 1e-6 * Y.norm());
  EXPECT_LT((m.b - Y.colwise().mean().transpose()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FitRidge, MatchesIterativeOracle) {
  std::mt19937_64 rng(2);
  const Matrix Z = random_matrix(rng, 50, 5), Y = random_matrix(rng, 50, 3);
  const RidgeModel m = fit_ridge(Z, Y, 1.0);
  const oracle::RidgeOracle o = oracle::ridge_cg(Z, Y, 1.0);
  EXPECT_NEAR(ridge_objective(m, Z, Y) / o.objective, 1.0, 1e-8);
  const auto [gW, gb] = oracle::ridge_gradient(Z, Y, 1.0, m.W, m.b);
  EXPECT_LE(std::max(gW.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff()), 1e-8);
}

TEST(FitRidge, SingularWithoutPenalty) {
  std::mt19937_64 rng(3);
  const Matrix Z = random_matrix(rng, 4, 10), Y = random_matrix(rng, 4, 2);
  try {
    fit_ridge(Z, Y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
  EXPECT_NO_THROW(fit_ridge(Z, Y, 0.1));
}

TEST(FitRidge, BadArguments) {
  EXPECT_THROW(fit_ridge(Matrix::Zero(1, 2), Matrix::Zero(1, 1), 1.0), Error);
  EXPECT_THROW(fit_ridge(Matrix::Zero(5, 2), Matrix::Zero(4, 1), 1.0), Error);
  EXPECT_THROW(fit_ridge(Matrix::Random(5, 2), Matrix::Random(5, 1), -1.0), Error);
}

TEST(PredictMulti, ConstantHeadAndMeanInput) {
  std::mt19937_64 rng(4);
  const Matrix Z = random_matrix(rng, 30, 4), Y = random_matrix(rng, 30, 2);
  const RidgeModel m = fit_ridge(Z, Y, 0.5);
  const Vector zbar = Z.colwise().mean().transpose();
  EXPECT_LT((predict_multi(m, zbar) - Y.colwise().mean().transpose()).cwiseAbs().maxCoeff(), 1e-12);

  RidgeModel c = m;
  c.W.setZero();
  EXPECT_EQ(predict_multi(c, Vector::Random(4).eval()), c.b);
}

TEST(PredictMulti, MatrixRowsMatchSinglePredictions) {
  std::mt19937_64 rng(5);
  const Matrix Z = random_matrix(rng, 12, 3), Y = random_matrix(rng, 12, 2);
  const RidgeModel m = fit_ridge(Z, Y, 0.1);
  const Matrix P = predict_multi(m, Z);
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    EXPECT_LT((P.row(i).transpose() - predict_multi(m, Vector(Z.row(i).transpose()))).norm(), 1e-12);
  }
}

TEST(AlphaSearch, DefaultGrid) {
  const std::vector<double> want = {0.001, 0.01, 0.1, 1, 10, 100};
  EXPECT_EQ(std::vector<double>(kDefaultAlphaGrid.begin(), kDefaultAlphaGrid.end()), want);
  std::mt19937_64 rng(6);
  const Matrix Z = random_matrix(rng, 40, 3), Y = random_matrix(rng, 40, 2);
  const AlphaSearchResult r = alpha_search(Z, Y, kDefaultAlphaGrid);
  EXPECT_EQ(r.trace.size(), 6u);
  for (const auto& t : r.trace) EXPECT_TRUE(t.cv_mse.has_value());
}

TEST(AlphaSearch, NoiselessLinearPicksSmallestAlpha) {
  std::mt19937_64 rng(7);
  const Matrix Z = random_matrix(rng, 60, 4);
  const Matrix W = random_matrix(rng, 2, 4);
  const Matrix Y = (Z * W.transpose()).rowwise() + Eigen::RowVector2d(1.0, -0.5);
  for (AlphaSelection sel : {AlphaSelection::cross_val, AlphaSelection::train_loss}) {
    const AlphaSearchResult r = alpha_search(Z, Y, kDefaultAlphaGrid, sel);
    EXPECT_EQ(r.best, 0u);
    EXPECT_EQ(r.model.alpha, 0.001);
    EXPECT_EQ(r.model.meta.selection, to_string(sel));
  }
}

TEST(AlphaSearch, CrossValMatchesHandComputedFolds) {
  std::mt19937_64 rng(8);
  const Matrix Z = random_matrix(rng, 23, 3), Y = random_matrix(rng, 23, 2);
  const std::vector<double> grid = {0.1, 10.0};
  const AlphaSearchResult r = alpha_search(Z, Y, grid, AlphaSelection::cross_val);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double total = 0.0;
    const Eigen::Index n = Z.rows();
    for (Eigen::Index k = 0; k < 5; ++k) {
      const Eigen::Index lo = k * n / 5, hi = (k + 1) * n / 5;
      Matrix Zt(n - (hi - lo), 3), Yt(n - (hi - lo), 2);
      Eigen::Index row = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i >= lo && i < hi) continue;
        Zt.row(row) = Z.row(i);
        Yt.row(row++) = Y.row(i);
      }
      const RidgeModel m = fit_ridge(Zt, Yt, grid[g]);
      total += ridge_mse(m, Z.middleRows(lo, hi - lo), Y.middleRows(lo, hi - lo));
    }
    EXPECT_NEAR(*r.trace[g].cv_mse, total / 5.0, 1e-12);
  }
}

TEST(AlphaSearch, SingletonGrid) {
  std::mt19937_64 rng(9);
  const Matrix Z = random_matrix(rng, 20, 3), Y = random_matrix(rng, 20, 1);
  const std::vector<double> grid = {3.0};
  EXPECT_EQ(alpha_search(Z, Y, grid).model.alpha, 3.0);
}

TEST(AlphaSearch, AllSingularFails) {
  std::mt19937_64 rng(10);
  const Matrix Z = random_matrix(rng, 12, 30), Y = random_matrix(rng, 12, 1);
  const std::vector<double> grid = {0.0};
  try {
    alpha_search(Z, Y, grid, AlphaSelection::train_loss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(AlphaSearch, CrossValNeedsTenSamples) {
  const std::vector<double> grid = {1.0};
  EXPECT_THROW(alpha_search(Matrix::Random(9, 2), Matrix::Random(9, 1), grid), Error);
}

TEST(RidgeModelIo, RoundTripWithTrace) {
  TempDir dir("ridge");
  std::mt19937_64 rng(11);
  const Matrix Z = random_matrix(rng, 30, 4), Y = random_matrix(rng, 30, 3);
  AlphaSearchResult r = alpha_search(Z, Y, kDefaultAlphaGrid, AlphaSelection::cross_val,
                                     DimensionSet({"safety", "sufficiency", "clarity"}));
  r.model.meta.dataset_fingerprint = 42;
  save_ridge_model(dir / "r.json", r.model, r.trace);
  const RidgeModel back = load_ridge_model(dir / "r.json");
  EXPECT_EQ(back.W, r.model.W);
  EXPECT_EQ(back.b, r.model.b);
  EXPECT_EQ(back.alpha, r.model.alpha);
  EXPECT_EQ(back.dimensions, r.model.dimensions);
  EXPECT_EQ(back.meta, r.model.meta);
  EXPECT_EQ(serialize_ridge_model(back), serialize_ridge_model(r.model));
}

}  // namespace
}  // namespace alignkit
