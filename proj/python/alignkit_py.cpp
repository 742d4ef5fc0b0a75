// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "alignkit/dataset_io.hpp"
#include "alignkit/embedding_store.hpp"
#include "alignkit/error.hpp"
#include "alignkit/harness.hpp"
#include "alignkit/metrics.hpp"
#include "alignkit/multi_head.hpp"
#include "alignkit/reward_head.hpp"

namespace py = pybind11;
using namespace alignkit;

namespace {

template <typename E>
E parse_or_throw(std::optional<E> parsed, const std::string& what, const std::string& text) {
  if (!parsed) throw usage_error("unknown " + what + " '" + text + "'");
  return *parsed;
}

std::vector<Label> to_labels(const std::vector<bool>& flags) {
  std::vector<Label> out;
  out.reserve(flags.size());
  for (bool f : flags) out.push_back(f ? Label::positive : Label::negative);
  return out;
}

std::vector<bool> from_labels(const std::vector<Label>& labels) {
  std::vector<bool> out;
  out.reserve(labels.size());
  for (Label l : labels) out.push_back(l == Label::positive);
  return out;
}

EmbeddingStore store_from(const std::vector<std::string>& ids, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.rows()) != ids.size()) {
    throw data_error("shape error: " + std::to_string(ids.size()) + " ids but " +
                     std::to_string(rows.rows()) + " rows");
  }
  std::vector<EmbeddingEntry> entries;
  entries.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    entries.push_back({ids[i], rows.row(static_cast<Eigen::Index>(i)).transpose()});
  }
  return EmbeddingStore(static_cast<std::size_t>(rows.cols()), entries);
}

}  // namespace

PYBIND11_MODULE(_alignkit, m) {
  m.doc() = "Reward heads, ridge heads, rank metrics and the MTAP embedding store.";
  m.attr("__version__") = std::string(kVersion);
  m.attr("DEFAULT_ALPHA_GRID") =
      std::vector<double>(kDefaultAlphaGrid.begin(), kDefaultAlphaGrid.end());
  m.attr("DEFAULT_LABEL_THRESHOLD") = kDefaultLabelThreshold;

  static py::exception<Error> base(m, "AlignkitError", PyExc_RuntimeError);
  static py::exception<Error> usage(m, "UsageError", base.ptr());
  static py::exception<Error> data(m, "DataError", base.ptr());
  static py::exception<Error> numerical(m, "NumericalError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::usage: py::set_error(usage, e.what()); break;
        case ErrorKind::data: py::set_error(data, e.what()); break;
        case ErrorKind::numerical: py::set_error(numerical, e.what()); break;
      }
    }
  });

  // metrics
  m.def("kendall_tau_b", [](const std::vector<double>& x, const std::vector<double>& y) {
    return kendall_tau_b(x, y);
  });
  m.def("kendall_tau_c", [](const std::vector<double>& x, const std::vector<double>& y) {
    return kendall_tau_c(x, y);
  });
  m.def(
      "pairwise_accuracy",
      [](const std::vector<double>& chosen, const std::vector<double>& rejected,
         const std::string& ties) {
        if (chosen.size() != rejected.size()) throw data_error("shape error: chosen/rejected lengths differ");
        std::vector<PairOutcome> outcomes;
        for (std::size_t i = 0; i < chosen.size(); ++i) outcomes.push_back({chosen[i], rejected[i]});
        return pairwise_accuracy(outcomes, parse_or_throw(parse_tie_credit(ties), "tie credit", ties));
      },
      py::arg("chosen"), py::arg("rejected"), py::arg("ties") = "none");
  m.def(
      "binary_accuracy",
      [](const std::vector<double>& pred, const std::vector<bool>& labels, double threshold) {
        return binary_accuracy(pred, to_labels(labels), threshold);
      },
      py::arg("pred"), py::arg("labels"), py::arg("threshold"));
  m.def("level_accuracy", [](const std::vector<double>& pred, const std::vector<double>& gold,
                             const std::vector<double>& levels) {
    return level_accuracy(pred, gold, levels);
  });

  // labels
  m.def("normalize_scale", [](double score, double lo, double hi) {
    return normalize_scale(score, ScoreScale{lo, hi, {}});
  });
  m.def(
      "binarize_median",
      [](const std::vector<double>& scores, const std::string& rule) {
        return from_labels(binarize_median(scores, parse_or_throw(parse_boundary_rule(rule), "boundary rule", rule)));
      },
      py::arg("scores"), py::arg("rule") = "strict");
  m.def(
      "binarize_threshold",
      [](double score, double threshold, const std::string& rule) {
        return binarize_threshold(score, threshold,
                                  parse_or_throw(parse_boundary_rule(rule), "boundary rule", rule)) ==
               Label::positive;
      },
      py::arg("score"), py::arg("threshold"), py::arg("rule") = "strict");

  // reward head
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("grad_accum", &TrainConfig::grad_accum)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("shuffle", &TrainConfig::shuffle);

  py::class_<RewardHeadModel>(m, "RewardHead")
      .def_readwrite("w", &RewardHeadModel::w)
      .def_readwrite("b0", &RewardHeadModel::b0)
      .def_property_readonly("dim", &RewardHeadModel::dim)
      .def("predict", [](const RewardHeadModel& h, const Matrix& Z) { return predict_reward(h, Z); })
      .def("to_json", &serialize_reward_model)
      .def_static("from_json", [](const std::string& text) { return parse_reward_model(text); })
      .def("save", &save_reward_model)
      .def_static("load", &load_reward_model);

  m.def("init_stddev", &init_stddev);
  m.def("init_head", &init_head, py::arg("dim"), py::arg("seed"));
  m.def("mse_loss", &mse_loss);
  m.def("mse_grad", [](const RewardHeadModel& h, const Matrix& Z, const Vector& y) {
    const HeadGradient g = mse_grad(h, Z, y);
    return py::make_tuple(g.w, g.b);
  });
  m.def(
      "train_reward",
      [](const Matrix& Z, const Vector& h, const TrainConfig& cfg, std::uint64_t init_seed) {
        TrainResult r = train_reward(Z, h, cfg, init_seed);
        return py::make_tuple(r.model, r.epoch_losses, r.step_losses);
      },
      py::arg("Z"), py::arg("h"), py::arg("config") = TrainConfig{}, py::arg("init_seed") = 0);

  // ridge head
  py::class_<RidgeModel>(m, "RidgeHead")
      .def_readonly("W", &RidgeModel::W)
      .def_readonly("b", &RidgeModel::b)
      .def_readonly("alpha", &RidgeModel::alpha)
      .def_property_readonly("dimensions", [](const RidgeModel& r) { return r.dimensions.names(); })
      .def("predict", [](const RidgeModel& r, const Matrix& Z) { return predict_multi(r, Z); })
      .def("objective", &ridge_objective)
      .def("mse", &ridge_mse)
      .def("to_json", [](const RidgeModel& r) { return serialize_ridge_model(r); })
      .def_static("from_json", [](const std::string& text) { return parse_ridge_model(text); })
      .def("save", [](const RidgeModel& r, const std::filesystem::path& p) { save_ridge_model(p, r); })
      .def_static("load", &load_ridge_model);

  m.def("fit_ridge", py::overload_cast<const Matrix&, const Matrix&, double>(&fit_ridge),
        py::arg("Z"), py::arg("Y"), py::arg("alpha"));
  m.def(
      "alpha_search",
      [](const Matrix& Z, const Matrix& Y, std::vector<double> grid, const std::string& selection) {
        AlphaSearchResult r = alpha_search(
            Z, Y, grid, parse_or_throw(parse_alpha_selection(selection), "selection", selection));
        py::list trace;
        for (const auto& t : r.trace) {
          py::dict d;
          d["alpha"] = t.alpha;
          d["ok"] = t.ok;
          d["error"] = t.error;
          d["train_objective"] = t.train_objective;
          d["train_mse"] = t.train_mse;
          d["cv_mse"] = t.cv_mse ? py::cast(*t.cv_mse) : py::none();
          trace.append(d);
        }
        return py::make_tuple(r.model, trace, r.best);
      },
      py::arg("Z"), py::arg("Y"),
      py::arg("grid") = std::vector<double>(kDefaultAlphaGrid.begin(), kDefaultAlphaGrid.end()),
      py::arg("selection") = "cross_val");

  // embedding store
  py::class_<EmbeddingStore>(m, "EmbeddingStore")
      .def(py::init(&store_from), py::arg("ids"), py::arg("rows"))
      .def_property_readonly("dim", &EmbeddingStore::dim)
      .def_property_readonly("count", &EmbeddingStore::count)
      .def_property_readonly("ids", &EmbeddingStore::ids)
      .def_property_readonly("rows", &EmbeddingStore::rows)
      .def("lookup", &EmbeddingStore::lookup)
      .def("__len__", &EmbeddingStore::count)
      .def("__contains__", &EmbeddingStore::contains)
      .def("__eq__", &EmbeddingStore::operator==);

  m.def("encode_store", [](const EmbeddingStore& s) { return py::bytes(encode_store(s)); });
  m.def(
      "decode_store",
      [](const py::bytes& data, const std::string& source) {
        return decode_store(static_cast<std::string_view>(data), source);
      },
      py::arg("data"), py::arg("source") = "<bytes>");
  m.def("write_store", py::overload_cast<const std::filesystem::path&, const EmbeddingStore&>(&write_store));
  m.def("read_store", &read_store);

  m.def(
      "toy_featurize",
      [](const py::bytes& image, const std::string& request, const std::string& candidate,
         std::size_t dim, std::uint64_t seed, std::size_t ngram) {
        const ToyFeaturizerConfig cfg{dim, seed, ngram};
        check_config(cfg);
        return toy_featurize(static_cast<std::string_view>(image), request, candidate, cfg);
      },
      py::arg("image"), py::arg("request"), py::arg("candidate"), py::arg("dim") = 64,
      py::arg("seed") = 0, py::arg("ngram") = 3);
}
