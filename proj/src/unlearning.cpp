#include "feduhb/unlearning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "feduhb/errors.hpp"
#include "feduhb/lbfgs.hpp"
#include "feduhb/threading.hpp"

namespace feduhb {

void UnlearnConfig::validate(bool require_momentum) const {
  if (alpha <= 0.0) throw ConfigError("step size alpha must be positive");
  if (require_momentum) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("momentum must lie in (0,1)");
  } else if (beta < 0.0 || beta >= 1.0) {
    throw ConfigError("momentum must lie in [0,1)");
  }
  if (stop_lambda <= 0.0) throw ConfigError("stop multiplier lambda must be positive");
  if (stop_epsilon <= 0.0) throw ConfigError("minimum threshold epsilon must be positive");
  if (stop_window < 2) throw ConfigError("stop window k must be >= 2");
  if (max_rounds == 0) throw ConfigError("max_rounds must be positive");
  if (local_lr <= 0.0) throw ConfigError("local learning rate must be positive");
  if (local_epochs < 1 || batch_size < 1) {
    throw ConfigError("local_epochs and batch_size must be >= 1");
  }
}

namespace {

std::vector<ParamVector> collect_deltas(std::span<const ClientObjective* const> clients,
                                        const ParamVector& w, const LocalUpdateParams& local,
                                        StreamPurpose purpose, std::uint64_t seed,
                                        std::size_t round, std::size_t threads,
                                        std::vector<std::size_t>& weights) {
  std::vector<ParamVector> deltas(clients.size());
  weights.assign(clients.size(), 0);
  parallel_for(clients.size(), threads, [&](std::size_t i) {
    const ClientObjective& client = *clients[i];
    const RngStream stream(seed, purpose, client.client_id(), round);
    deltas[i] = local_update(client, w, local, stream);
    weights[i] = client.weight();
  });
  return deltas;
}

/// Shared protocol for FedUHB and retrain; retrain forces beta = 0 and
/// no dynamic stop, so the two trajectories are bitwise identical when
/// FedUHB is called with those settings.
UnlearnResult run_heavy_ball(std::span<const ClientObjective* const> clients,
                             const ParamVector& init, const UnlearnConfig& cfg,
                             const Evaluator& evaluator, std::size_t threads,
                             bool momentum_required) {
  cfg.validate(momentum_required);
  if (clients.empty()) throw ProtocolError("unlearning: no remaining clients");

  UnlearnResult result;
  ParamVector w = init;
  ParamVector w_prev = init;  // first momentum term is zero
  StopState stop_state(cfg.stop_window);
  const LocalUpdateParams local{cfg.local_epochs, cfg.batch_size, cfg.local_lr};

  for (std::size_t t = 0; t < cfg.max_rounds; ++t) {
    std::vector<std::size_t> weights;
    const std::vector<ParamVector> deltas = collect_deltas(
        clients, w, local, StreamPurpose::kUnlearnBatch, cfg.seed, t, threads, weights);
    const ParamVector agg = aggregate(deltas, weights);
    const ParamVector pseudo_grad = scaled(agg, -1.0 / cfg.local_lr);
    const ParamVector w_next = heavy_ball_step(w, w_prev, pseudo_grad, cfg.alpha, cfg.beta);

    const double delta = weight_change(w_next, w, cfg.beta);
    if (!std::isfinite(delta)) {
      throw NumericError("unlearning: non-finite weight change at round " +
                         std::to_string(t));
    }
    const RollingStats stats = stop_state.push(delta);
    const bool stopped = cfg.dynamic_stop && stop_state.warmed_up() &&
                         should_stop(delta, stats.stddev, cfg.stop_lambda, cfg.stop_epsilon);

    w_prev = w;
    w = w_next;
    const EvalResult eval = evaluator(w);
    result.log.push_back({t, delta, stats.stddev, stopped, eval.loss, eval.accuracy});
    if (stopped) {
      result.final_model = std::move(w);
      result.rounds_used = t + 1;
      result.stop_reason = StopReason::kCriterion;
      return result;
    }
  }
  result.final_model = std::move(w);
  result.rounds_used = cfg.max_rounds;
  result.stop_reason = StopReason::kMaxRounds;
  return result;
}

}  // namespace

UnlearnResult run_feduhb(std::span<const ClientObjective* const> remaining_clients,
                         const ParamVector& init, const UnlearnConfig& cfg,
                         const Evaluator& evaluator, std::size_t threads) {
  const bool momentum_required = cfg.beta != 0.0;  // beta = 0 is the oracle mode
  return run_heavy_ball(remaining_clients, init, cfg, evaluator, threads,
                        momentum_required);
}

UnlearnResult run_retrain(std::span<const ClientObjective* const> remaining_clients,
                          const ParamVector& init, const UnlearnConfig& cfg,
                          const Evaluator& evaluator, std::size_t threads) {
  UnlearnConfig retrain_cfg = cfg;
  retrain_cfg.beta = 0.0;
  retrain_cfg.dynamic_stop = false;
  return run_heavy_ball(remaining_clients, init, retrain_cfg, evaluator, threads, false);
}

UnlearnResult run_federaser(std::span<const RoundRecord> history,
                            std::span<const ClientObjective* const> remaining_clients,
                            const UnlearnConfig& cfg, const Evaluator& evaluator,
                            std::size_t threads) {
  cfg.validate(false);
  if (history.empty()) throw ProtocolError("federaser: empty history");
  if (remaining_clients.empty()) throw ProtocolError("federaser: no remaining clients");

  UnlearnResult result;
  ParamVector w = history.front().global_model_before;
  const LocalUpdateParams local{cfg.calibration_epochs, cfg.batch_size, cfg.local_lr};
  std::size_t executed = 0;

  for (std::size_t h = 0; h < history.size(); h += std::max<std::size_t>(1, cfg.history_interval)) {
    const RoundRecord& record = history[h];

    // Stored per-client deltas, looked up by client id.
    std::vector<const ParamVector*> stored(remaining_clients.size(), nullptr);
    for (std::size_t i = 0; i < remaining_clients.size(); ++i) {
      const std::size_t id = remaining_clients[i]->client_id();
      for (std::size_t j = 0; j < record.client_ids.size(); ++j) {
        if (record.client_ids[j] == id) {
          stored[i] = &record.client_updates[j];
          break;
        }
      }
      if (stored[i] == nullptr) {
        throw ProtocolError("federaser: history round " + std::to_string(record.round) +
                            " lacks client " + std::to_string(id));
      }
    }

    std::vector<std::size_t> weights;
    const std::vector<ParamVector> fresh =
        collect_deltas(remaining_clients, w, local, StreamPurpose::kEraserBatch, cfg.seed,
                       record.round, threads, weights);

    bool skip = false;
    std::vector<ParamVector> calibrated(remaining_clients.size());
    for (std::size_t i = 0; i < remaining_clients.size(); ++i) {
      const double stored_norm = l2_norm(*stored[i]);
      const double fresh_norm = l2_norm(fresh[i]);
      if (fresh_norm == 0.0) {
        if (stored_norm == 0.0) {
          calibrated[i] = ParamVector(w.dim());
          continue;
        }
        skip = true;
        break;
      }
      calibrated[i] = scaled(fresh[i], stored_norm / fresh_norm);
    }

    double delta = 0.0;
    if (skip) {
      ++result.skipped_rounds;
    } else {
      const ParamVector agg = aggregate(calibrated, weights);
      const ParamVector w_next = add_scaled(w, 1.0, agg);
      delta = weight_change(w_next, w, 1.0);
      w = w_next;
    }
    const EvalResult eval = evaluator(w);
    result.log.push_back({record.round, skip ? 0.0 : delta, 0.0, false, eval.loss,
                          eval.accuracy});
    ++executed;
  }
  result.final_model = std::move(w);
  result.rounds_used = executed;
  result.stop_reason = StopReason::kMaxRounds;
  return result;
}

UnlearnResult run_fedrecover_lbfgs(std::span<const RoundRecord> history,
                                   std::span<const std::size_t> remaining_ids,
                                   double train_lr, const UnlearnConfig& cfg,
                                   const Evaluator& evaluator) {
  cfg.validate(false);
  if (remaining_ids.empty()) throw ProtocolError("fedrecover: no remaining clients");
  if (history.size() < cfg.lbfgs_memory + 1) {
    throw ProtocolError("fedrecover: need at least m+1 = " +
                        std::to_string(cfg.lbfgs_memory + 1) + " history rounds, have " +
                        std::to_string(history.size()));
  }
  if (train_lr <= 0.0) throw ConfigError("fedrecover: training learning rate must be positive");

  // Remaining-client aggregate pseudo-gradient of each stored round.
  auto stored_gradient = [&](const RoundRecord& record) {
    std::vector<ParamVector> deltas;
    std::vector<double> weights;
    for (std::size_t id : remaining_ids) {
      bool found = false;
      for (std::size_t j = 0; j < record.client_ids.size(); ++j) {
        if (record.client_ids[j] == id) {
          deltas.push_back(record.client_updates[j]);
          weights.push_back(double(record.client_weights[j]));
          found = true;
          break;
        }
      }
      if (!found) {
        throw ProtocolError("fedrecover: history round " + std::to_string(record.round) +
                            " lacks client " + std::to_string(id));
      }
    }
    return scaled(mean_weighted(deltas, weights), -1.0 / train_lr);
  };

  UnlearnResult result;
  ParamVector w = history.front().global_model_before;
  LbfgsBuffer buffer(cfg.lbfgs_memory);
  ParamVector prev_model;
  ParamVector prev_grad;

  for (std::size_t t = 0; t < history.size(); ++t) {
    const RoundRecord& record = history[t];
    const ParamVector grad_t = stored_gradient(record);
    if (t > 0) {
      if (!buffer.push(sub(record.global_model_before, prev_model),
                       sub(grad_t, prev_grad))) {
        ++result.skipped_rounds;  // non-positive curvature pair
      }
    }
    const ParamVector drift = sub(w, record.global_model_before);
    const ParamVector correction = lbfgs_hessian_vec(buffer, drift);
    const ParamVector estimated_grad = add_scaled(grad_t, 1.0, correction);
    const ParamVector w_next = add_scaled(w, -cfg.alpha, estimated_grad);

    const double delta = weight_change(w_next, w, 1.0);
    prev_model = record.global_model_before;
    prev_grad = grad_t;
    w = w_next;
    const EvalResult eval = evaluator(w);
    result.log.push_back({record.round, delta, 0.0, false, eval.loss, eval.accuracy});
  }
  result.final_model = std::move(w);
  result.rounds_used = history.size();
  result.stop_reason = StopReason::kMaxRounds;
  return result;
}

}  // namespace feduhb
