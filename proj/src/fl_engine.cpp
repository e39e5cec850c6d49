#include "feduhb/fl_engine.hpp"

#include <chrono>
#include <numeric>
#include <string>

#include "feduhb/errors.hpp"
#include "feduhb/threading.hpp"

namespace feduhb {

void FLConfig::validate() const {
  if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (local_epochs < 1 || batch_size < 1) {
    throw ConfigError("local_epochs and batch_size must be >= 1");
  }
  if (num_clients == 0) throw ConfigError("num_clients must be positive");
  if (target_clients.size() >= num_clients) {
    throw ConfigError("target clients must leave at least one remaining client");
  }
  for (std::size_t c : target_clients) {
    if (c >= num_clients) {
      throw ConfigError("target client id " + std::to_string(c) + " out of range");
    }
  }
}

ParamVector local_update(const ClientObjective& client, const ParamVector& start,
                         const LocalUpdateParams& params, const RngStream& stream) {
  const std::size_t n = client.num_items();
  if (n == 0) {
    throw ProtocolError("client " + std::to_string(client.client_id()) + ": empty shard");
  }
  std::vector<std::size_t> order(n);
  ParamVector w = start;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream epoch_rng = stream.derive(epoch);
    epoch_rng.shuffle(order);
    for (std::size_t begin = 0; begin < n; begin += params.batch_size) {
      const std::size_t end = std::min(begin + params.batch_size, n);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const GradResult g = client.grad_on(w, batch);
      w = add_scaled(w, -params.learning_rate, g.gradient);
    }
  }
  return sub(w, start);
}

ParamVector aggregate(std::span<const ParamVector> deltas,
                      std::span<const std::size_t> shard_sizes) {
  if (deltas.empty()) throw ProtocolError("aggregate: no client updates");
  std::vector<double> weights(shard_sizes.begin(), shard_sizes.end());
  return mean_weighted(deltas, weights);
}

std::pair<TrainLog, std::vector<RoundRecord>> run_training(
    const FLConfig& cfg, std::span<const ClientObjective* const> clients,
    const ParamVector& init, const Evaluator& evaluator, std::size_t threads) {
  cfg.validate();
  if (clients.empty()) throw ProtocolError("run_training: no clients");

  TrainLog log;
  std::vector<RoundRecord> history;
  ParamVector w = init;
  const LocalUpdateParams local{cfg.local_epochs, cfg.batch_size, cfg.learning_rate};

  for (std::size_t t = 0; t < cfg.global_rounds; ++t) {
    const auto start_time = std::chrono::steady_clock::now();
    RoundRecord record;
    record.round = t;
    record.global_model_before = w;

    std::vector<ParamVector> deltas(clients.size());
    std::vector<std::size_t> weights(clients.size());
    parallel_for(clients.size(), threads, [&](std::size_t i) {
      const ClientObjective& client = *clients[i];
      const RngStream stream(cfg.seed, StreamPurpose::kBatchOrder, client.client_id(), t);
      deltas[i] = local_update(client, w, local, stream);
      weights[i] = client.weight();
    });

    ParamVector agg;
    try {
      agg = aggregate(deltas, weights);
    } catch (const std::exception& e) {
      throw ProtocolError("round " + std::to_string(t) + ": " + e.what());
    }

    for (std::size_t i = 0; i < clients.size(); ++i) {
      record.client_ids.push_back(clients[i]->client_id());
      record.client_weights.push_back(weights[i]);
      record.client_updates.push_back(std::move(deltas[i]));
    }
    record.aggregate_update = agg;
    w = add_scaled(w, 1.0, agg);

    if (cfg.history_interval > 0 && t % cfg.history_interval == 0) {
      history.push_back(std::move(record));
    }

    const EvalResult eval = evaluator(w);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                  start_time)
            .count();
    log.rounds.push_back({t, eval.loss, eval.accuracy, wall_ms});
  }
  log.final_model = std::move(w);
  return {std::move(log), std::move(history)};
}

}  // namespace feduhb
