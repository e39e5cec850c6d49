#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "feduhb/dataset.hpp"
#include "feduhb/fl_engine.hpp"
#include "feduhb/model.hpp"
#include "feduhb/unlearning.hpp"

namespace feduhb {

struct DatasetConfig {
  std::string kind = "synthetic_images";  // synthetic_images | idx | quadratic
  SyntheticImageSpec synthetic;
  std::string dir;  // idx: directory holding the image/label pairs
  std::size_t limit_train = 0;  // idx: 0 keeps everything
  std::size_t limit_test = 0;
  std::size_t dim = 20;  // quadratic
  double mu = 1.0;
  double lipschitz = 100.0;
};

struct BackdoorConfig {
  bool enabled = false;
  TriggerSpec trigger;
};

struct VerifyConfig {
  std::size_t rounds = 200;
  bool distinct_inits = false;
};

/// Fully validated experiment description. Unknown keys are rejected
/// with a nearest-key suggestion; unset keys take the standard-setup
/// defaults (20 clients, 5 local epochs, 40 rounds, lr 0.005, batch 64,
/// momentum 0.9, lambda 0.6, 2 target clients).
struct ExperimentConfig {
  std::uint64_t seed = 42;
  DatasetConfig dataset;
  ModelSpec model{ModelKind::kLogistic, 0, 0, 64};
  FLConfig federated;
  std::string method = "feduhb";  // feduhb | retrain | federaser | fedrecover
  UnlearnConfig unlearning;
  BackdoorConfig backdoor;
  VerifyConfig verify;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical (sorted-key) JSON form; parse(print(parse(x))) == parse(x).
nlohmann::json canonical_json(const ExperimentConfig& cfg);
std::string canonical_text(const ExperimentConfig& cfg);

/// FNV-1a hash of the canonical form, stable under key reordering.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace feduhb
