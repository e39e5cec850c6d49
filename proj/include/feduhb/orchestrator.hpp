#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "feduhb/attacks.hpp"
#include "feduhb/checkpoint.hpp"
#include "feduhb/config.hpp"
#include "feduhb/objective.hpp"
#include "feduhb/quadratic.hpp"
#include "feduhb/theory.hpp"
#include "feduhb/unlearning.hpp"

namespace feduhb {

inline constexpr const char* kCodeVersion = "0.1.0";

/// Everything an experiment stage needs, reconstructed deterministically
/// from the config alone (data, partition, poisoning, client objectives).
struct ExperimentContext {
  ExperimentConfig cfg;
  ModelSpec model;  // input_dim / num_classes resolved from the data

  // Image pipeline state (empty for quadratic runs).
  Dataset train;
  Dataset test;
  PartitionPlan partition;
  std::vector<std::size_t> poisoned_examples;
  Dataset target_train;  // union of target-client shards, for MIA

  // Quadratic pipeline state.
  QuadraticProblem problem;
  QuadraticProblem remaining_problem;

  std::vector<std::unique_ptr<ClientObjective>> clients;
  std::vector<AccessCounter> access_counters;  // one per client
  std::vector<const ClientObjective*> all_clients;
  std::vector<const ClientObjective*> remaining_clients;
  std::vector<std::size_t> remaining_ids;

  bool is_image() const { return cfg.dataset.kind != "quadratic"; }
  Evaluator train_evaluator() const;
  Evaluator unlearn_evaluator() const;
  ParamVector initial_model() const;   // training initialization
  ParamVector unlearn_initial_model() const;  // fresh, distinct stream
};

ExperimentContext build_context(const ExperimentConfig& cfg);

struct RunManifest {
  std::string code_version;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string created_utc;
  std::vector<std::string> stages;
  std::vector<std::string> files;
};

void run_train_stage(const ExperimentContext& ctx, const std::filesystem::path& out_dir,
                     std::size_t threads);

UnlearnResult run_unlearn_stage(const ExperimentContext& ctx, const std::string& method,
                                const std::optional<std::filesystem::path>& history_file,
                                const std::filesystem::path& out_dir, std::size_t threads);

void run_attack_stage(const ExperimentContext& ctx, const std::string& kind,
                      const std::filesystem::path& pre_model_path,
                      const std::filesystem::path& post_model_path,
                      const std::filesystem::path& out_json);

BoundTrajectory run_verify_stage(const ExperimentContext& ctx,
                                 const std::filesystem::path& out_csv);

/// Executes the requested stages in order under one output directory
/// and writes a manifest listing every produced file. Reruns with the
/// same config produce byte-identical metric files.
RunManifest run_experiment(const ExperimentConfig& cfg, std::vector<std::string> stages,
                           const std::filesystem::path& out_dir, std::size_t threads = 1);

/// Merges completed run directories into plot-ready tables:
/// report.csv (curves), rounds.csv (rounds to threshold) and
/// attacks.csv (method,misr,asr,clean_acc).
void emit_report(std::span<const std::filesystem::path> run_dirs,
                 const std::filesystem::path& out_dir, double accuracy_threshold = 0.85,
                 double loss_threshold = 1e-6);

RunManifest write_manifest(const ExperimentConfig& cfg,
                           std::span<const std::string> stages,
                           const std::filesystem::path& out_dir);

}  // namespace feduhb
