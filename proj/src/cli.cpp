// Copyright 2026 The alignkit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "alignkit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "alignkit/dataset_io.hpp"
#include "alignkit/embedding_store.hpp"
#include "alignkit/error.hpp"
#include "alignkit/harness.hpp"
#include "alignkit/multi_head.hpp"
#include "alignkit/reward_head.hpp"

namespace alignkit {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class OptType { u64, f64, text, f64_list, flag };

struct OptSpec {
  std::string key;  // resolved-config key; the flag is --key with '_' -> '-'
  OptType type;
  json fallback;    // null: no default
  std::string help;
  bool required = false;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<OptSpec> options;
};

json default_grid() {
  json grid = json::array();
  for (double a : kDefaultAlphaGrid) grid.push_back(a);
  return grid;
}

const std::vector<Command>& commands() {
  static const std::vector<Command> kCommands = {
      {"featurize",
       "Embed every manifest record with the hashing featurizer",
       {{"manifest", OptType::text, nullptr, "dataset manifest", true},
        {"dim", OptType::u64, 64, "embedding dimension (>= 8)"},
        {"ngram", OptType::u64, 3, "byte n-gram length"}}},
      {"train-reward",
       "Train the scalar reward head with MSE",
       {{"store", OptType::text, nullptr, "embedding store", true},
        {"manifest", OptType::text, nullptr, "pointwise manifest", true},
        {"lr", OptType::f64, 2e-6, "learning rate"},
        {"epochs", OptType::u64, 1, "passes over the data"},
        {"batch_size", OptType::u64, 8, "micro-batch size"},
        {"grad_accum", OptType::u64, 4, "micro-batches per optimizer step"},
        {"init_seed", OptType::u64, nullptr, "head initialization seed (default: --seed)"},
        {"target", OptType::text, std::string(kOverall), "target dimension"},
        {"normalize", OptType::flag, false, "rescale the target dimension to [0, 1] first"},
        {"shuffle", OptType::flag, true, "shuffle samples each epoch"}}},
      {"train-multi",
       "Fit the multi-objective ridge head with an alpha search",
       {{"store", OptType::text, nullptr, "embedding store", true},
        {"manifest", OptType::text, nullptr, "multi_objective manifest", true},
        {"alphas", OptType::f64_list, default_grid(), "comma-separated alpha grid"},
        {"selection", OptType::text, "cross_val", "cross_val | train_loss"}}},
      {"eval",
       "Evaluate a trained head against human judgments",
       {{"model", OptType::text, nullptr, "model document", true},
        {"store", OptType::text, nullptr, "embedding store", true},
        {"manifest", OptType::text, nullptr, "evaluation manifest", true},
        {"mode", OptType::text, "pointwise", "pointwise | pairwise | multi"},
        {"gold_dim", OptType::text, std::string(kOverall), "gold dimension for pointwise mode"},
        {"score_output", OptType::text, "", "model output used as the scalar score"},
        {"label_threshold", OptType::f64, kDefaultLabelThreshold, "gold binarization cut (multi)"},
        {"pred_threshold", OptType::f64, nullptr, "prediction cut (multi, default: gold cut)"},
        {"boundary", OptType::text, "strict", "strict | inclusive"},
        {"multi_metric", OptType::text, "binary", "binary | level"},
        {"levels", OptType::f64_list, json::array(), "admissible levels for level accuracy"},
        {"ties", OptType::text, "none", "tie credit for pairwise accuracy: none | half"}}},
      {"bench",
       "Measure per-sample scoring latency",
       {{"model", OptType::text, nullptr, "model document", true},
        {"store", OptType::text, nullptr, "embedding store", true},
        {"repetitions", OptType::u64, 10, "timed passes over the store"}}},
      {"validate",
       "Check a manifest and list every invariant violation",
       {{"manifest", OptType::text, nullptr, "dataset manifest", true}}},
  };
  return kCommands;
}

const std::vector<OptSpec> kGlobalOptions = {
    {"seed", OptType::u64, 0, "random seed"},
    {"out", OptType::text, "", "output path"},
    {"format", OptType::text, "json", "report format: json | csv | md"},
};

std::string flag_for(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

json convert(const OptSpec& spec, const std::string& raw) {
  try {
    switch (spec.type) {
      case OptType::u64: {
        if (raw.empty() || raw[0] == '-') throw std::invalid_argument("negative");
        std::size_t used = 0;
        const auto v = std::stoull(raw, &used);
        if (used != raw.size()) throw std::invalid_argument("trailing");
        return v;
      }
      case OptType::f64: {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument("trailing");
        return v;
      }
      case OptType::f64_list: {
        json list = json::array();
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
          if (item.empty()) continue;
          std::size_t used = 0;
          list.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument("trailing");
        }
        return list;
      }
      case OptType::text: return raw;
      case OptType::flag: return raw == "true";
    }
  } catch (const std::exception&) {
  }
  throw usage_error("invalid value '" + raw + "' for " + flag_for(spec.key));
}

void check_type(const OptSpec& spec, const json& v) {
  if (v.is_null()) return;
  bool ok = false;
  switch (spec.type) {
    case OptType::u64: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case OptType::f64: ok = v.is_number(); break;
    case OptType::text: ok = v.is_string(); break;
    case OptType::flag: ok = v.is_boolean(); break;
    case OptType::f64_list:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
      break;
  }
  if (!ok) throw usage_error("config value for '" + spec.key + "' has the wrong type");
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open config file '" + path + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw usage_error("config file '" + path + "' is not a JSON object");
  return j;
}

/// Defaults, then config file (top-level keys and a per-command section),
/// then explicitly given flags.
json resolve(const Command& cmd, const std::string& config_path,
             const std::map<std::string, std::string>& given) {
  std::vector<OptSpec> specs = kGlobalOptions;
  specs.insert(specs.end(), cmd.options.begin(), cmd.options.end());
  auto spec_for = [&](const std::string& key) -> const OptSpec* {
    for (const auto& s : specs) {
      if (s.key == key) return &s;
    }
    return nullptr;
  };
  auto known_anywhere = [&](const std::string& key) {
    if (std::any_of(kGlobalOptions.begin(), kGlobalOptions.end(), [&](const auto& s) { return s.key == key; })) return true;
    for (const auto& c : commands()) {
      if (c.name == key) return true;
      for (const auto& s : c.options) {
        if (s.key == key) return true;
      }
    }
    return false;
  };

  json resolved = json::object();
  resolved["command"] = cmd.name;
  for (const auto& s : specs) resolved[s.key] = s.fallback;

  if (!config_path.empty()) {
    const json file = read_config_file(config_path);
    auto apply = [&](const json& section) {
      for (const auto& [key, value] : section.items()) {
        if (const OptSpec* s = spec_for(key)) {
          check_type(*s, value);
          resolved[key] = value;
        } else if (!known_anywhere(key)) {
          throw usage_error("unknown config key '" + key + "'");
        }
      }
    };
    json top = json::object();
    for (const auto& [key, value] : file.items()) {
      const bool is_section = std::any_of(commands().begin(), commands().end(),
                                          [&](const Command& c) { return c.name == key; });
      if (!is_section) top[key] = value;
    }
    apply(top);
    if (file.contains(cmd.name)) {
      if (!file[cmd.name].is_object()) throw usage_error("config section '" + cmd.name + "' must be an object");
      apply(file[cmd.name]);
    }
  }
  for (const auto& [key, raw] : given) resolved[key] = convert(*spec_for(key), raw);

  for (const auto& s : specs) {
    if (s.required && (resolved[s.key].is_null() || resolved[s.key] == "")) {
      throw usage_error(cmd.name + ": " + flag_for(s.key) + " is required");
    }
  }
  return resolved;
}

template <typename T>
T get(const json& cfg, const char* key) {
  return cfg.at(key).get<T>();
}

std::string require_out(const json& cfg, const std::string& cmd) {
  const auto out = get<std::string>(cfg, "out");
  if (out.empty()) throw usage_error(cmd + ": --out is required");
  for (const char* input : {"manifest", "store", "model"}) {
    if (cfg.contains(input) && cfg[input].is_string() && !cfg[input].get<std::string>().empty()) {
      std::error_code ec;
      if (fs::equivalent(fs::path(out), fs::path(cfg[input].get<std::string>()), ec)) {
        throw usage_error(cmd + ": --out would overwrite the input " + std::string(input));
      }
    }
  }
  return out;
}

ReportFormat report_format(const json& cfg) {
  auto f = parse_report_format(get<std::string>(cfg, "format"));
  if (!f) throw usage_error("--format must be json, csv or md");
  return *f;
}

std::string read_bytes_or_ref(const fs::path& base, const std::string& ref) {
  const fs::path p = fs::path(ref).is_absolute() ? fs::path(ref) : base / ref;
  std::error_code ec;
  if (!ref.empty() && fs::is_regular_file(p, ec)) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in) return std::move(buf).str();
  }
  return ref;
}

int cmd_featurize(const json& cfg, std::ostream& out) {
  const std::string dest = require_out(cfg, "featurize");
  const fs::path manifest_path = get<std::string>(cfg, "manifest");
  const DatasetManifest manifest = load_manifest(manifest_path);
  ToyFeaturizerConfig toy{get<std::size_t>(cfg, "dim"), get<std::uint64_t>(cfg, "seed"),
                          get<std::size_t>(cfg, "ngram")};
  check_config(toy);

  const fs::path base = manifest_path.parent_path();
  std::vector<EmbeddingEntry> entries;
  entries.reserve(manifest.size());
  for (const auto& r : manifest.records) {
    entries.push_back({r.id, toy_featurize(read_bytes_or_ref(base, r.image_ref),
                                           r.request.value_or(""), r.candidate, toy)});
  }
  write_store(dest, toy.dim, entries);
  out << "wrote " << entries.size() << " embeddings of dim " << toy.dim << " to " << dest << "\n";
  return kExitOk;
}

int cmd_train_reward(const json& cfg, std::ostream& out) {
  const std::string dest = require_out(cfg, "train-reward");
  TrainConfig train;
  train.learning_rate = get<double>(cfg, "lr");
  train.epochs = get<std::size_t>(cfg, "epochs");
  train.batch_size = get<std::size_t>(cfg, "batch_size");
  train.grad_accum = get<std::size_t>(cfg, "grad_accum");
  train.seed = get<std::uint64_t>(cfg, "seed");
  train.shuffle = get<bool>(cfg, "shuffle");
  check_config(train);
  const std::uint64_t init_seed =
      cfg["init_seed"].is_null() ? train.seed : get<std::uint64_t>(cfg, "init_seed");
  const auto target = get<std::string>(cfg, "target");

  const EmbeddingStore store = read_store(get<std::string>(cfg, "store"));
  DatasetManifest manifest = load_manifest(get<std::string>(cfg, "manifest"));
  if (manifest.kind == ManifestKind::pairwise) {
    throw data_error("train-reward needs scored (pointwise) records");
  }
  if (get<bool>(cfg, "normalize")) {
    const std::uint64_t source_fingerprint = manifest.fingerprint;
    manifest = normalize_dimension(manifest, target);
    manifest.fingerprint = source_fingerprint;
  }
  const TrainResult result = train_reward(store, manifest, train, init_seed, target);
  save_reward_model(dest, result.model);
  out << "steps " << result.step_losses.size() << "\n";
  out << "final training MSE " << std::setprecision(10) << result.epoch_losses.back() << "\n";
  return kExitOk;
}

int cmd_train_multi(const json& cfg, std::ostream& out) {
  const std::string dest = require_out(cfg, "train-multi");
  const auto selection = parse_alpha_selection(get<std::string>(cfg, "selection"));
  if (!selection) throw usage_error("--selection must be cross_val or train_loss");
  const auto grid = get<std::vector<double>>(cfg, "alphas");
  if (grid.empty()) throw usage_error("--alphas is empty");

  const EmbeddingStore store = read_store(get<std::string>(cfg, "store"));
  const DatasetManifest manifest = load_manifest(get<std::string>(cfg, "manifest"));
  if (manifest.kind != ManifestKind::multi_objective) {
    throw data_error("train-multi needs a multi_objective manifest");
  }
  const RegressionData data = regression_data(store, manifest);
  AlphaSearchResult search = alpha_search(data.Z, data.Y, grid, *selection, manifest.dimensions);
  search.model.meta.dataset_fingerprint = manifest.fingerprint;
  save_ridge_model(dest, search.model, search.trace);

  out << std::left << std::setw(12) << "alpha" << std::setw(20) << "train_objective"
      << std::setw(20) << "cv_mse" << "\n";
  for (std::size_t i = 0; i < search.trace.size(); ++i) {
    const auto& t = search.trace[i];
    out << std::left << std::setw(12) << t.alpha;
    if (t.ok) {
      out << std::setw(20) << t.train_objective << std::setw(20)
          << (t.cv_mse ? std::to_string(*t.cv_mse) : "-");
    } else {
      out << "failed: " << t.error;
    }
    out << (i == search.best ? "  *" : "") << "\n";
  }
  out << "selected alpha " << search.model.alpha << " (" << to_string(*selection) << ")\n";
  return kExitOk;
}

// The output destination does not change any reported value.
std::string settings_hash(json cfg) {
  cfg.erase("out");
  return config_hash(cfg);
}

int cmd_eval(const json& cfg, std::ostream& out) {
  EvalOptions options;
  auto mode = parse_eval_mode(get<std::string>(cfg, "mode"));
  if (!mode) throw usage_error("--mode must be pointwise, pairwise or multi");
  options.mode = *mode;
  options.gold_dimension = get<std::string>(cfg, "gold_dim");
  options.score_output = get<std::string>(cfg, "score_output");
  options.label_threshold = get<double>(cfg, "label_threshold");
  if (!cfg["pred_threshold"].is_null()) options.pred_threshold = get<double>(cfg, "pred_threshold");
  auto boundary = parse_boundary_rule(get<std::string>(cfg, "boundary"));
  if (!boundary) throw usage_error("--boundary must be strict or inclusive");
  options.boundary = *boundary;
  auto metric = parse_multi_metric(get<std::string>(cfg, "multi_metric"));
  if (!metric) throw usage_error("--multi-metric must be binary or level");
  options.multi_metric = *metric;
  options.levels = get<std::vector<double>>(cfg, "levels");
  auto ties = parse_tie_credit(get<std::string>(cfg, "ties"));
  if (!ties) throw usage_error("--ties must be none or half");
  options.ties = *ties;
  const ReportFormat format = report_format(cfg);
  const auto dest = get<std::string>(cfg, "out");
  if (!dest.empty()) require_out(cfg, "eval");

  const Scorer scorer = Scorer::load(get<std::string>(cfg, "model"));
  const EmbeddingStore store = read_store(get<std::string>(cfg, "store"));
  const DatasetManifest manifest = load_manifest(get<std::string>(cfg, "manifest"));

  EvalReport report = evaluate(scorer, store, manifest, options);
  report.config_hash = settings_hash(cfg);
  write_table(out, report);
  if (!dest.empty()) {
    std::ofstream file(dest, std::ios::trunc);
    if (!file) throw data_error("cannot write '" + dest + "'");
    write_report(file, report, format);
  }
  return kExitOk;
}

int cmd_bench(const json& cfg, std::ostream& out) {
  const ReportFormat format = report_format(cfg);
  const Scorer scorer = Scorer::load(get<std::string>(cfg, "model"));
  const EmbeddingStore store = read_store(get<std::string>(cfg, "store"));
  BenchReport report = run_bench(scorer, store, get<std::size_t>(cfg, "repetitions"));
  report.config_hash = settings_hash(cfg);
  write_bench(out, report, format);
  const auto dest = get<std::string>(cfg, "out");
  if (!dest.empty()) {
    require_out(cfg, "bench");
    std::ofstream file(dest, std::ios::trunc);
    if (!file) throw data_error("cannot write '" + dest + "'");
    write_bench(file, report, format);
  }
  return kExitOk;
}

int cmd_validate(const json& cfg, std::ostream& out) {
  const DatasetManifest manifest =
      load_manifest(get<std::string>(cfg, "manifest"), ManifestCheck::parse_only);
  const auto violations = validate_manifest(manifest);
  for (const auto& v : violations) out << to_string(v.kind) << "\t" << v.id << "\t" << v.message << "\n";
  out << manifest.size() << " records, " << violations.size() << " violation(s)\n";
  return violations.empty() ? kExitOk : kExitData;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"alignkit: reward heads and evaluation over frozen multimodal embeddings",
               "alignkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)");

  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, std::vector<std::pair<std::string, CLI::Option*>>> bound;

  std::vector<OptSpec> globals = kGlobalOptions;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "JSON config file (flags override it)");
    subs[cmd.name] = sub;
    std::vector<OptSpec> specs = globals;
    specs.insert(specs.end(), cmd.options.begin(), cmd.options.end());
    for (const auto& s : specs) {
      CLI::Option* opt;
      if (s.type == OptType::flag) {
        const std::string f = flag_for(s.key);
        opt = sub->add_flag(f + ",!--no-" + f.substr(2), flags[cmd.name][s.key], s.help);
      } else {
        opt = sub->add_option(flag_for(s.key), raw[cmd.name][s.key], s.help);
      }
      bound[cmd.name].emplace_back(s.key, opt);
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  for (const auto& cmd : commands()) {
    if (!subs[cmd.name]->parsed()) continue;
    try {
      std::map<std::string, std::string> given;
      for (const auto& [key, opt] : bound[cmd.name]) {
        if (opt->count() == 0) continue;
        auto fit = flags[cmd.name].find(key);
        given[key] = fit != flags[cmd.name].end() ? (fit->second ? "true" : "false")
                                                  : raw[cmd.name][key];
      }
      const json cfg = resolve(cmd, config_path, given);
      report_format(cfg);
      if (cmd.name == "featurize") return cmd_featurize(cfg, out);
      if (cmd.name == "train-reward") return cmd_train_reward(cfg, out);
      if (cmd.name == "train-multi") return cmd_train_multi(cfg, out);
      if (cmd.name == "eval") return cmd_eval(cfg, out);
      if (cmd.name == "bench") return cmd_bench(cfg, out);
      if (cmd.name == "validate") return cmd_validate(cfg, out);
    } catch (const Error& e) {
      err << "alignkit " << cmd.name << ": " << e.what() << "\n";
      switch (e.kind()) {
        case ErrorKind::usage: return kExitUsage;
        case ErrorKind::data: return kExitData;
        case ErrorKind::numerical: return kExitNumerical;
      }
    } catch (const nlohmann::json::exception& e) {
      err << "alignkit " << cmd.name << ": invalid configuration: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "alignkit " << cmd.name << ": " << e.what() << "\n";
      return kExitData;
    }
  }
  return kExitUsage;
}

}  // namespace alignkit
