// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/reward_head.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "alignkit/error.hpp"
#include "alignkit/hash.hpp"
#include "model_io.hpp"

namespace alignkit {

void check_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw usage_error("learning rate must be finite and non-negative");
  }
  if (cfg.epochs == 0) throw usage_error("epochs must be positive");
  if (cfg.batch_size == 0) throw usage_error("batch size must be positive");
  if (cfg.grad_accum == 0) throw usage_error("gradient accumulation steps must be positive");
}

RewardHeadModel init_head(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw usage_error("reward head dimension must be positive");
  const double stddev = init_stddev(dim);
  Rng rng(seed);
  RewardHeadModel model;
  model.w.resize(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < model.w.size(); ++i) model.w[i] = stddev * rng.normal();
  model.b0 = 0.0;
  model.meta.seed = seed;
  return model;
}

namespace {

void check_shapes(const RewardHeadModel& model, const Matrix& Z, const Vector& h) {
  if (Z.rows() == 0) throw data_error("reward head: need at least one sample");
  if (static_cast<std::size_t>(Z.cols()) != model.dim()) {
    throw data_error("shape error: embeddings have dim " + std::to_string(Z.cols()) +
                     ", head expects " + std::to_string(model.dim()));
  }
  if (Z.rows() != h.size()) {
    throw data_error("shape error: " + std::to_string(Z.rows()) + " embeddings but " +
                     std::to_string(h.size()) + " targets");
  }
}

}  // namespace

double mse_loss(const RewardHeadModel& model, const Matrix& Z, const Vector& h) {
  check_shapes(model, Z, h);
  const Vector residual = (Z * model.w).array() + model.b0 - h.array();
  return residual.squaredNorm() / static_cast<double>(Z.rows());
}

HeadGradient mse_grad(const RewardHeadModel& model, const Matrix& Z, const Vector& h) {
  check_shapes(model, Z, h);
  const double scale = 2.0 / static_cast<double>(Z.rows());
  const Vector residual = (Z * model.w).array() + model.b0 - h.array();
  return {scale * (Z.transpose() * residual), scale * residual.sum()};
}

double predict_reward(const RewardHeadModel& model, const EmbeddingVector& z) {
  if (z.size() != model.w.size()) {
    throw data_error("shape error: embedding has dim " + std::to_string(z.size()) +
                     ", head expects " + std::to_string(model.dim()));
  }
  return model.w.dot(z) + model.b0;
}

Vector predict_reward(const RewardHeadModel& model, const Matrix& Z) {
  if (static_cast<std::size_t>(Z.cols()) != model.dim()) {
    throw data_error("shape error: embeddings have dim " + std::to_string(Z.cols()) +
                     ", head expects " + std::to_string(model.dim()));
  }
  return (Z * model.w).array() + model.b0;
}

TrainResult train_reward(const Matrix& Z, const Vector& h, const TrainConfig& cfg,
                         std::uint64_t init_seed) {
  check_config(cfg);
  if (Z.rows() == 0) throw data_error("train_reward: empty training set");
  if (Z.rows() != h.size()) {
    throw data_error("shape error: " + std::to_string(Z.rows()) + " embeddings but " +
                     std::to_string(h.size()) + " targets");
  }

  TrainResult result;
  result.model = init_head(static_cast<std::size_t>(Z.cols()), init_seed);
  RewardHeadModel& model = result.model;
  model.meta.learning_rate = cfg.learning_rate;
  model.meta.epochs = cfg.epochs;
  model.meta.batch_size = cfg.batch_size;
  model.meta.grad_accum = cfg.grad_accum;
  model.meta.shuffle_seed = cfg.seed;

  const auto n = static_cast<std::size_t>(Z.rows());
  const std::size_t step_size = cfg.batch_size * cfg.grad_accum;
  Rng order_rng(cfg.seed);
  std::vector<std::size_t> order(n);

  auto check_finite = [&](double loss) {
    if (!std::isfinite(loss)) {
      throw numerical_error("training diverged (non-finite loss); try a lower learning rate than " +
                            std::to_string(cfg.learning_rate));
    }
  };

  result.epoch_losses.push_back(mse_loss(model, Z, h));
  Vector grad_w(Z.cols());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      order = order_rng.permutation(n);
    } else {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
    }

    for (std::size_t start = 0; start < n; start += step_size) {
      const std::size_t stop = std::min(n, start + step_size);
      grad_w.setZero();
      double grad_b = 0.0;
      double loss_sum = 0.0;
      // Micro-batches accumulate unnormalized sums in a fixed order; the
      // update uses their mean over every sample in the step.
      for (std::size_t mb = start; mb < stop; mb += cfg.batch_size) {
        const std::size_t mb_stop = std::min(stop, mb + cfg.batch_size);
        for (std::size_t k = mb; k < mb_stop; ++k) {
          const auto row = static_cast<Eigen::Index>(order[k]);
          const double r = Z.row(row).dot(model.w) + model.b0 - h[row];
          loss_sum += r * r;
          grad_w.noalias() += (2.0 * r) * Z.row(row).transpose();
          grad_b += 2.0 * r;
        }
      }
      const auto count = static_cast<double>(stop - start);
      const double step_loss = loss_sum / count;
      check_finite(step_loss);
      result.step_losses.push_back(step_loss);
      model.w.noalias() -= (cfg.learning_rate / count) * grad_w;
      model.b0 -= cfg.learning_rate * grad_b / count;
    }
    const double epoch_loss = mse_loss(model, Z, h);
    check_finite(epoch_loss);
    result.epoch_losses.push_back(epoch_loss);
  }
  return result;
}

TrainResult train_reward(const EmbeddingStore& store, const DatasetManifest& manifest,
                         const TrainConfig& cfg, std::uint64_t init_seed,
                         std::string_view target_dimension) {
  if (manifest.records.empty()) throw data_error("train_reward: manifest has no records");
  const std::string target(target_dimension);
  Matrix Z(static_cast<Eigen::Index>(manifest.size()), static_cast<Eigen::Index>(store.dim()));
  Vector h(static_cast<Eigen::Index>(manifest.size()));
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest.records[i];
    auto it = r.scores.find(target);
    if (it == r.scores.end()) {
      throw data_error("record '" + r.id + "' has no '" + target + "' score");
    }
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw data_error("record '" + r.id + "' target " + std::to_string(it->second) +
                       " is outside [0, 1]; normalize the dimension first");
    }
    const auto row = static_cast<Eigen::Index>(i);
    Z.row(row) = store.rows().row(static_cast<Eigen::Index>(store.record_row(r.id)));
    h[row] = it->second;
  }
  TrainResult result = train_reward(Z, h, cfg, init_seed);
  result.model.meta.dataset_fingerprint = manifest.fingerprint;
  return result;
}

// Serialization --------------------------------------------------------------

using nlohmann::json;

std::string serialize_reward_model(const RewardHeadModel& model) {
  json meta = {{"seed", model.meta.seed},
               {"lr", model.meta.learning_rate},
               {"epochs", model.meta.epochs},
               {"batch_size", model.meta.batch_size},
               {"grad_accum", model.meta.grad_accum},
               {"shuffle_seed", model.meta.shuffle_seed},
               {"dataset_fingerprint", to_hex(model.meta.dataset_fingerprint)}};
  json doc = {{"format_version", detail::kModelFormatVersion},
              {"kind", detail::kRewardKind},
              {"dim", model.dim()},
              {"w", detail::to_list(model.w)},
              {"b0", model.b0},
              {"meta", meta}};
  return doc.dump(2) + "\n";
}

RewardHeadModel parse_reward_model(std::string_view text) {
  const json doc = detail::parse_model_doc(text, detail::kRewardKind);
  try {
    RewardHeadModel model;
    const auto dim = doc.at("dim").get<std::size_t>();
    model.w = detail::from_list(doc.at("w"));
    if (dim == 0 || static_cast<std::size_t>(model.w.size()) != dim) {
      throw data_error("reward model: w has " + std::to_string(model.w.size()) +
                       " entries, dim is " + std::to_string(dim));
    }
    model.b0 = doc.at("b0").get<double>();
    if (!model.w.allFinite() || !std::isfinite(model.b0)) {
      throw data_error("reward model: parameters must be finite");
    }
    const json& meta = doc.at("meta");
    model.meta.seed = meta.at("seed").get<std::uint64_t>();
    model.meta.learning_rate = meta.at("lr").get<double>();
    model.meta.epochs = meta.at("epochs").get<std::size_t>();
    model.meta.batch_size = meta.at("batch_size").get<std::size_t>();
    model.meta.grad_accum = meta.at("grad_accum").get<std::size_t>();
    model.meta.shuffle_seed = meta.value("shuffle_seed", std::uint64_t{0});
    model.meta.dataset_fingerprint = detail::parse_hex(meta.at("dataset_fingerprint"));
    return model;
  } catch (const json::exception& e) {
    throw data_error(std::string("reward model: ") + e.what());
  }
}

void save_reward_model(const std::filesystem::path& path, const RewardHeadModel& model) {
  detail::write_text(path, serialize_reward_model(model));
}

RewardHeadModel load_reward_model(const std::filesystem::path& path) {
  return parse_reward_model(detail::read_text(path));
}

}  // namespace alignkit
