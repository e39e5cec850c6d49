#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <vector>

#include "feduhb/dataset.hpp"
#include "feduhb/errors.hpp"
#include "feduhb/model.hpp"
#include "feduhb/param_vector.hpp"
#include "feduhb/quadratic.hpp"

namespace feduhb {

/// Per-client differentiable objective, the unit both the training and
/// the unlearning engines operate on. Implementations are pure given
/// (params, batch) and safe to evaluate from concurrent workers.
class ClientObjective {
 public:
  virtual ~ClientObjective() = default;
  virtual std::size_t client_id() const = 0;
  /// FedAvg aggregation weight (shard size; 1 for quadratic clients).
  virtual std::size_t weight() const = 0;
  /// Number of batchable items (1 means full-batch only).
  virtual std::size_t num_items() const = 0;
  /// Mean gradient over the given local item ids.
  virtual GradResult grad_on(const ParamVector& params,
                             std::span<const std::size_t> items) const = 0;
  GradResult full_grad(const ParamVector& params) const;
};

/// Counts every gradient/loss evaluation against a client's shard;
/// exact unlearning demands this stays zero for unlearned clients.
using AccessCounter = std::shared_ptr<std::atomic<std::uint64_t>>;

class ClassifierClient : public ClientObjective {
 public:
  ClassifierClient(std::size_t client_id, const ModelSpec& spec, const Dataset& data,
                   std::vector<std::size_t> shard, AccessCounter counter = nullptr);
  std::size_t client_id() const override { return client_id_; }
  std::size_t weight() const override { return shard_.size(); }
  std::size_t num_items() const override { return shard_.size(); }
  GradResult grad_on(const ParamVector& params,
                     std::span<const std::size_t> items) const override;

 private:
  std::size_t client_id_;
  ModelSpec spec_;
  const Dataset* data_;
  std::vector<std::size_t> shard_;
  AccessCounter counter_;
};

class QuadraticClient : public ClientObjective {
 public:
  QuadraticClient(std::size_t client_id, const QuadraticProblem& problem,
                  std::size_t problem_client, AccessCounter counter = nullptr);
  std::size_t client_id() const override { return client_id_; }
  std::size_t weight() const override { return 1; }
  std::size_t num_items() const override { return 1; }
  GradResult grad_on(const ParamVector& params,
                     std::span<const std::size_t> items) const override;

 private:
  std::size_t client_id_;
  const QuadraticProblem* problem_;
  std::size_t problem_client_;
  AccessCounter counter_;
};

/// Safety-inflated bound on client gradient norms:
/// 1.1 * max over (trace x clients) of ||grad L_c||.
double grad_norm_bound_estimate(std::span<const ParamVector> params_trace,
                                std::span<const ClientObjective* const> clients);

}  // namespace feduhb
