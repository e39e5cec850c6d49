#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "feduhb/objective.hpp"
#include "feduhb/param_vector.hpp"
#include "feduhb/rng.hpp"

namespace feduhb {

struct FLConfig {
  std::size_t num_clients = 20;
  std::size_t local_epochs = 5;      // E
  std::size_t global_rounds = 40;    // T
  double learning_rate = 0.005;      // eta
  std::size_t batch_size = 64;       // B
  std::uint64_t seed = 42;
  std::vector<std::size_t> target_clients = {0, 1};  // C_u
  std::size_t history_interval = 1;

  void validate() const;
};

/// Everything a round leaves behind: the model it started from, every
/// client's delta and the applied aggregate. History-based unlearning
/// baselines replay these records.
struct RoundRecord {
  std::size_t round = 0;
  ParamVector global_model_before;
  std::vector<std::size_t> client_ids;
  std::vector<std::size_t> client_weights;
  std::vector<ParamVector> client_updates;  // model deltas
  ParamVector aggregate_update;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;  // NaN when the problem has no accuracy notion
};
using Evaluator = std::function<EvalResult(const ParamVector&)>;

struct RoundMetrics {
  std::size_t round = 0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double wall_ms = 0.0;  // never part of deterministic outputs
};

struct TrainLog {
  std::vector<RoundMetrics> rounds;
  ParamVector final_model;
};

struct LocalUpdateParams {
  std::size_t epochs = 1;
  std::size_t batch_size = 64;
  double learning_rate = 0.005;
};

/// E epochs of mini-batch SGD from `start`; returns final - start.
/// Batch order is drawn from the given stream (one substream per epoch).
ParamVector local_update(const ClientObjective& client, const ParamVector& start,
                         const LocalUpdateParams& params, const RngStream& stream);

/// Shard-size-weighted mean of deltas in fixed client-index order.
ParamVector aggregate(std::span<const ParamVector> deltas,
                      std::span<const std::size_t> shard_sizes);

/// T rounds of broadcast -> local updates -> weighted aggregation ->
/// apply. Clients may run concurrently; results are bitwise independent
/// of the worker count.
std::pair<TrainLog, std::vector<RoundRecord>> run_training(
    const FLConfig& cfg, std::span<const ClientObjective* const> clients,
    const ParamVector& init, const Evaluator& evaluator, std::size_t threads = 1);

}  // namespace feduhb
