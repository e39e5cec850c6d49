#include "feduhb/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "feduhb/errors.hpp"

namespace feduhb {

namespace {

using nlohmann::json;

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (allowed.contains(key)) continue;
    std::string best;
    std::size_t best_dist = 1000;
    for (const std::string& cand : allowed) {
      const std::size_t d = edit_distance(key, cand);
      if (d < best_dist) {
        best_dist = d;
        best = cand;
      }
    }
    std::string msg = "unknown key '" + key + "' in " + section;
    if (best_dist <= 3) msg += "; did you mean '" + best + "'?";
    throw ConfigError(msg);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

void parse_dataset(const json& obj, DatasetConfig& out) {
  check_keys(obj, "dataset",
             {"kind", "num_train", "num_test", "rows", "cols", "num_classes", "noise",
              "label_noise", "margin", "duplicates", "dir", "limit_train", "limit_test", "dim", "mu", "lipschitz"});
  read(obj, "kind", out.kind);
  if (out.kind != "synthetic_images" && out.kind != "idx" && out.kind != "quadratic") {
    throw ConfigError("dataset.kind must be synthetic_images, idx or quadratic");
  }
  read(obj, "num_train", out.synthetic.num_train);
  read(obj, "num_test", out.synthetic.num_test);
  read(obj, "rows", out.synthetic.rows);
  read(obj, "cols", out.synthetic.cols);
  read(obj, "num_classes", out.synthetic.num_classes);
  read(obj, "noise", out.synthetic.noise);
  read(obj, "label_noise", out.synthetic.label_noise);
  read(obj, "margin", out.synthetic.margin);
  read(obj, "duplicates", out.synthetic.duplicates);
  read(obj, "dir", out.dir);
  read(obj, "limit_train", out.limit_train);
  read(obj, "limit_test", out.limit_test);
  read(obj, "dim", out.dim);
  read(obj, "mu", out.mu);
  read(obj, "lipschitz", out.lipschitz);
  if (out.kind == "quadratic") {
    if (!(out.mu > 0.0) || out.lipschitz < out.mu) {
      throw ConfigError("dataset requires 0 < mu <= lipschitz");
    }
  }
}

void parse_model(const json& obj, ModelSpec& out) {
  check_keys(obj, "model", {"kind", "hidden_units"});
  std::string kind = to_string(out.kind);
  read(obj, "kind", kind);
  out.kind = model_kind_from_string(kind);
  read(obj, "hidden_units", out.hidden_units);
  if (out.kind == ModelKind::kMlp && out.hidden_units == 0) {
    throw ConfigError("mlp model needs hidden_units >= 1");
  }
}

void parse_federated(const json& obj, FLConfig& out) {
  check_keys(obj, "federated",
             {"num_clients", "local_epochs", "global_rounds", "learning_rate",
              "batch_size", "target_clients", "history_interval"});
  read(obj, "num_clients", out.num_clients);
  read(obj, "local_epochs", out.local_epochs);
  read(obj, "global_rounds", out.global_rounds);
  read(obj, "learning_rate", out.learning_rate);
  read(obj, "batch_size", out.batch_size);
  read(obj, "target_clients", out.target_clients);
  read(obj, "history_interval", out.history_interval);
  if (out.global_rounds < 1) throw ConfigError("global_rounds must be >= 1");
  out.validate();
}

void parse_unlearning(const json& obj, std::string& method, UnlearnConfig& out) {
  check_keys(obj, "unlearning",
             {"method", "step_size", "momentum", "lambda", "epsilon", "window",
              "max_rounds", "dynamic_stop", "local_epochs", "batch_size", "local_lr",
              "lbfgs_memory", "calibration_epochs", "history_interval"});
  read(obj, "method", method);
  if (method != "feduhb" && method != "retrain" && method != "federaser" &&
      method != "fedrecover") {
    throw ConfigError("unlearning.method must be feduhb, retrain, federaser or fedrecover");
  }
  read(obj, "step_size", out.alpha);
  read(obj, "momentum", out.beta);
  read(obj, "lambda", out.stop_lambda);
  read(obj, "epsilon", out.stop_epsilon);
  read(obj, "window", out.stop_window);
  read(obj, "max_rounds", out.max_rounds);
  read(obj, "dynamic_stop", out.dynamic_stop);
  read(obj, "local_epochs", out.local_epochs);
  read(obj, "batch_size", out.batch_size);
  read(obj, "local_lr", out.local_lr);
  read(obj, "lbfgs_memory", out.lbfgs_memory);
  read(obj, "calibration_epochs", out.calibration_epochs);
  read(obj, "history_interval", out.history_interval);
  out.validate(method == "feduhb" && out.beta != 0.0);
}

void parse_backdoor(const json& obj, BackdoorConfig& out) {
  check_keys(obj, "backdoor",
             {"enabled", "row", "col", "height", "width", "value", "target_label",
              "poison_fraction", "relabel"});
  read(obj, "enabled", out.enabled);
  read(obj, "row", out.trigger.row);
  read(obj, "col", out.trigger.col);
  read(obj, "height", out.trigger.height);
  read(obj, "width", out.trigger.width);
  read(obj, "value", out.trigger.value);
  read(obj, "target_label", out.trigger.target_label);
  read(obj, "poison_fraction", out.trigger.poison_fraction);
  read(obj, "relabel", out.trigger.relabel);
  if (out.enabled &&
      (out.trigger.poison_fraction <= 0.0 || out.trigger.poison_fraction > 1.0)) {
    throw ConfigError("backdoor.poison_fraction must lie in (0, 1]");
  }
}

void parse_verify(const json& obj, VerifyConfig& out) {
  check_keys(obj, "verify", {"rounds", "distinct_inits"});
  read(obj, "rounds", out.rounds);
  read(obj, "distinct_inits", out.distinct_inits);
  if (out.rounds < 1) throw ConfigError("verify.rounds must be >= 1");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(root, "config",
             {"seed", "dataset", "model", "federated", "unlearning", "backdoor",
              "verify"});

  ExperimentConfig cfg;
  read(root, "seed", cfg.seed);
  if (root.contains("dataset")) parse_dataset(root["dataset"], cfg.dataset);
  if (root.contains("model")) parse_model(root["model"], cfg.model);
  if (root.contains("federated")) parse_federated(root["federated"], cfg.federated);
  if (root.contains("unlearning")) parse_unlearning(root["unlearning"], cfg.method, cfg.unlearning);
  if (root.contains("backdoor")) parse_backdoor(root["backdoor"], cfg.backdoor);
  if (root.contains("verify")) parse_verify(root["verify"], cfg.verify);

  // Cross-section constraints.
  if (cfg.dataset.kind == "quadratic") {
    cfg.model.kind = ModelKind::kQuadratic;
    if (cfg.backdoor.enabled) {
      throw ConfigError("backdoor attacks require an image dataset");
    }
  } else if (cfg.model.kind == ModelKind::kQuadratic) {
    throw ConfigError("quadratic models require dataset.kind = quadratic");
  }
  cfg.federated.seed = cfg.seed;
  cfg.unlearning.seed = cfg.seed;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

nlohmann::json canonical_json(const ExperimentConfig& cfg) {
  json root;
  root["seed"] = cfg.seed;
  json& ds = root["dataset"];
  ds["kind"] = cfg.dataset.kind;
  if (cfg.dataset.kind == "synthetic_images") {
    ds["num_train"] = cfg.dataset.synthetic.num_train;
    ds["num_test"] = cfg.dataset.synthetic.num_test;
    ds["rows"] = cfg.dataset.synthetic.rows;
    ds["cols"] = cfg.dataset.synthetic.cols;
    ds["num_classes"] = cfg.dataset.synthetic.num_classes;
    ds["noise"] = cfg.dataset.synthetic.noise;
    ds["label_noise"] = cfg.dataset.synthetic.label_noise;
    ds["margin"] = cfg.dataset.synthetic.margin;
    ds["duplicates"] = cfg.dataset.synthetic.duplicates;
  } else if (cfg.dataset.kind == "idx") {
    ds["dir"] = cfg.dataset.dir;
    ds["limit_train"] = cfg.dataset.limit_train;
    ds["limit_test"] = cfg.dataset.limit_test;
  } else {
    ds["dim"] = cfg.dataset.dim;
    ds["mu"] = cfg.dataset.mu;
    ds["lipschitz"] = cfg.dataset.lipschitz;
  }
  root["model"] = {{"kind", to_string(cfg.model.kind)},
                   {"hidden_units", cfg.model.hidden_units}};
  root["federated"] = {{"num_clients", cfg.federated.num_clients},
                       {"local_epochs", cfg.federated.local_epochs},
                       {"global_rounds", cfg.federated.global_rounds},
                       {"learning_rate", cfg.federated.learning_rate},
                       {"batch_size", cfg.federated.batch_size},
                       {"target_clients", cfg.federated.target_clients},
                       {"history_interval", cfg.federated.history_interval}};
  root["unlearning"] = {{"method", cfg.method},
                        {"step_size", cfg.unlearning.alpha},
                        {"momentum", cfg.unlearning.beta},
                        {"lambda", cfg.unlearning.stop_lambda},
                        {"epsilon", cfg.unlearning.stop_epsilon},
                        {"window", cfg.unlearning.stop_window},
                        {"max_rounds", cfg.unlearning.max_rounds},
                        {"dynamic_stop", cfg.unlearning.dynamic_stop},
                        {"local_epochs", cfg.unlearning.local_epochs},
                        {"batch_size", cfg.unlearning.batch_size},
                        {"local_lr", cfg.unlearning.local_lr},
                        {"lbfgs_memory", cfg.unlearning.lbfgs_memory},
                        {"calibration_epochs", cfg.unlearning.calibration_epochs},
                        {"history_interval", cfg.unlearning.history_interval}};
  root["backdoor"] = {{"enabled", cfg.backdoor.enabled},
                      {"row", cfg.backdoor.trigger.row},
                      {"col", cfg.backdoor.trigger.col},
                      {"height", cfg.backdoor.trigger.height},
                      {"width", cfg.backdoor.trigger.width},
                      {"value", cfg.backdoor.trigger.value},
                      {"target_label", cfg.backdoor.trigger.target_label},
                      {"poison_fraction", cfg.backdoor.trigger.poison_fraction},
                      {"relabel", cfg.backdoor.trigger.relabel}};
  root["verify"] = {{"rounds", cfg.verify.rounds},
                    {"distinct_inits", cfg.verify.distinct_inits}};
  return root;
}

std::string canonical_text(const ExperimentConfig& cfg) {
  return canonical_json(cfg).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace feduhb
