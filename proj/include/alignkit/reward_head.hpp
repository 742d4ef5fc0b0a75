// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "alignkit/datamodel.hpp"
#include "alignkit/dataset_io.hpp"
#include "alignkit/embedding_store.hpp"

namespace alignkit {

/// Mini-batch gradient descent settings. Defaults follow the reference
/// training protocol: batch 8, accumulation 4, one epoch, lr 2e-6.
struct TrainConfig {
  double learning_rate = 2e-6;
  std::size_t epochs = 1;
  std::size_t batch_size = 8;
  std::size_t grad_accum = 4;
  std::uint64_t seed = 42;
  bool shuffle = true;
};

void check_config(const TrainConfig& cfg);

struct RewardHeadMeta {
  std::uint64_t seed = 0;  // initialization seed
  double learning_rate = 0.0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  std::size_t grad_accum = 0;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t dataset_fingerprint = 0;

  bool operator==(const RewardHeadMeta&) const = default;
};

/// Scalar head r = w . z + b0 over a frozen embedding.
struct RewardHeadModel {
  Vector w;
  double b0 = 0.0;
  RewardHeadMeta meta;

  std::size_t dim() const { return static_cast<std::size_t>(w.size()); }
  bool operator==(const RewardHeadModel& o) const {
    return w.size() == o.w.size() && w == o.w && b0 == o.b0 && meta == o.meta;
  }
};

/// Standard deviation of the initial head weights, 1 / sqrt(dim + 1).
inline double init_stddev(std::size_t dim) { return 1.0 / std::sqrt(static_cast<double>(dim) + 1.0); }

/// w ~ N(0, init_stddev(dim)^2) i.i.d. from an mt19937_64 stream seeded with
/// `seed`; b0 = 0.
RewardHeadModel init_head(std::size_t dim, std::uint64_t seed);

/// (1/n) sum_i (w . z_i + b0 - h_i)^2 over the rows of `Z`.
double mse_loss(const RewardHeadModel& model, const Matrix& Z, const Vector& h);

struct HeadGradient {
  Vector w;
  double b = 0.0;
};

/// Analytic gradient of mse_loss with respect to (w, b0).
HeadGradient mse_grad(const RewardHeadModel& model, const Matrix& Z, const Vector& h);

double predict_reward(const RewardHeadModel& model, const EmbeddingVector& z);
Vector predict_reward(const RewardHeadModel& model, const Matrix& Z);

struct TrainResult {
  RewardHeadModel model;
  /// Mean loss of each optimizer step's samples, measured before the update.
  std::vector<double> step_losses;
  /// Full-data MSE before training (index 0) and after every epoch.
  std::vector<double> epoch_losses;
};

/// Trains on rows of `Z` against `h`. Each optimizer step averages the
/// gradient over grad_accum micro-batches of batch_size samples; the final
/// step of an epoch may be short. Sample order per epoch is a permutation
/// drawn from cfg.seed (or identity when shuffle is off).
TrainResult train_reward(const Matrix& Z, const Vector& h, const TrainConfig& cfg,
                         std::uint64_t init_seed);

/// Trains on the records of `manifest`, with targets taken from
/// `target_dimension`. Targets must already be normalized to [0, 1].
TrainResult train_reward(const EmbeddingStore& store, const DatasetManifest& manifest,
                         const TrainConfig& cfg, std::uint64_t init_seed,
                         std::string_view target_dimension = kOverall);

std::string serialize_reward_model(const RewardHeadModel& model);
RewardHeadModel parse_reward_model(std::string_view text);
void save_reward_model(const std::filesystem::path& path, const RewardHeadModel& model);
RewardHeadModel load_reward_model(const std::filesystem::path& path);

}  // namespace alignkit
