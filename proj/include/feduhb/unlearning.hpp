#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "feduhb/fl_engine.hpp"
#include "feduhb/objective.hpp"
#include "feduhb/param_vector.hpp"
#include "feduhb/stopping.hpp"

namespace feduhb {

struct UnlearnConfig {
  double alpha = 0.005;        // server step size
  double beta = 0.9;           // heavy-ball momentum, (0,1); 0 = plain GD
  double stop_lambda = 0.6;    // lambda
  double stop_epsilon = 1e-4;  // epsilon
  std::size_t stop_window = 5;  // k
  std::size_t max_rounds = 40;
  bool dynamic_stop = true;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 64;
  double local_lr = 0.005;  // client SGD rate; pseudo-gradient = -delta/local_lr
  std::uint64_t seed = 42;
  std::size_t lbfgs_memory = 8;         // fedrecover pair buffer m
  std::size_t calibration_epochs = 1;   // federaser local work per round
  std::size_t history_interval = 1;     // federaser round subsampling

  void validate(bool require_momentum = true) const;
};

enum class StopReason { kCriterion, kMaxRounds };

struct UnlearnRoundLog {
  std::size_t round = 0;
  double delta = 0.0;
  double sigma = 0.0;
  bool stopped = false;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

struct UnlearnResult {
  ParamVector final_model;
  std::size_t rounds_used = 0;
  std::vector<UnlearnRoundLog> log;
  StopReason stop_reason = StopReason::kMaxRounds;
  std::size_t skipped_rounds = 0;  // federaser zero-norm skips, fedrecover pair skips
};

/// Heavy-ball retraining over the remaining clients with the dynamic
/// stop rule. Target-client data is never read: only remaining clients
/// are passed in. The first momentum term is zero (w_prev starts at
/// init).
UnlearnResult run_feduhb(std::span<const ClientObjective* const> remaining_clients,
                         const ParamVector& init, const UnlearnConfig& cfg,
                         const Evaluator& evaluator, std::size_t threads = 1);

/// Retraining from scratch: the same protocol with beta = 0 and the
/// dynamic stop disabled (runs the full round budget).
UnlearnResult run_retrain(std::span<const ClientObjective* const> remaining_clients,
                          const ParamVector& init, const UnlearnConfig& cfg,
                          const Evaluator& evaluator, std::size_t threads = 1);

/// FedEraser-style calibration: per stored round, remaining clients run
/// a short local update and the server applies, per client,
/// ||stored_delta|| * new_delta / ||new_delta||, aggregated as in
/// training. Rounds where a client's new update has zero norm against a
/// nonzero stored one are skipped and logged.
UnlearnResult run_federaser(std::span<const RoundRecord> history,
                            std::span<const ClientObjective* const> remaining_clients,
                            const UnlearnConfig& cfg, const Evaluator& evaluator,
                            std::size_t threads = 1);

/// FedRecover-style replay without periodic correction: each stored
/// round's remaining-client aggregate gradient is corrected by a direct
/// L-BFGS Hessian-vector product over stored (model-difference,
/// update-difference) pairs. `train_lr` is the client SGD rate used
/// when the history was produced.
UnlearnResult run_fedrecover_lbfgs(std::span<const RoundRecord> history,
                                   std::span<const std::size_t> remaining_ids,
                                   double train_lr, const UnlearnConfig& cfg,
                                   const Evaluator& evaluator);

}  // namespace feduhb
