#include "feduhb/objective.hpp"

#include <numeric>

namespace feduhb {

GradResult ClientObjective::full_grad(const ParamVector& params) const {
  std::vector<std::size_t> all(num_items());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return grad_on(params, all);
}

ClassifierClient::ClassifierClient(std::size_t client_id, const ModelSpec& spec,
                                   const Dataset& data, std::vector<std::size_t> shard,
                                   AccessCounter counter)
    : client_id_(client_id),
      spec_(spec),
      data_(&data),
      shard_(std::move(shard)),
      counter_(std::move(counter)) {
  if (shard_.empty()) {
    throw ProtocolError("client " + std::to_string(client_id) + ": empty shard");
  }
}

GradResult ClassifierClient::grad_on(const ParamVector& params,
                                     std::span<const std::size_t> items) const {
  if (counter_) counter_->fetch_add(1, std::memory_order_relaxed);
  std::vector<std::size_t> batch;
  batch.reserve(items.size());
  for (std::size_t i : items) batch.push_back(shard_.at(i));
  return grad(spec_, params, *data_, batch);
}

QuadraticClient::QuadraticClient(std::size_t client_id, const QuadraticProblem& problem,
                                 std::size_t problem_client, AccessCounter counter)
    : client_id_(client_id),
      problem_(&problem),
      problem_client_(problem_client),
      counter_(std::move(counter)) {}

GradResult QuadraticClient::grad_on(const ParamVector& params,
                                    std::span<const std::size_t> /*items*/) const {
  if (counter_) counter_->fetch_add(1, std::memory_order_relaxed);
  GradResult result;
  result.gradient = problem_->client_grad(problem_client_, params);
  result.loss = problem_->client_loss(problem_client_, params);
  result.batch_size = 1;
  return result;
}

double grad_norm_bound_estimate(std::span<const ParamVector> params_trace,
                                std::span<const ClientObjective* const> clients) {
  if (params_trace.empty()) throw MetricError("grad_norm_bound_estimate: empty trace");
  if (clients.empty()) throw MetricError("grad_norm_bound_estimate: no clients");
  double max_norm = 0.0;
  for (const ParamVector& w : params_trace) {
    for (const ClientObjective* client : clients) {
      max_norm = std::max(max_norm, l2_norm(client->full_grad(w).gradient));
    }
  }
  return 1.1 * max_norm;
}

}  // namespace feduhb
