#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "feduhb/dataset.hpp"
#include "feduhb/param_vector.hpp"
#include "feduhb/rng.hpp"

namespace feduhb {

enum class ModelKind { kQuadratic, kLogistic, kMlp };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

/// Differentiable model description. Parameters live in one flat
/// ParamVector; layer structure is an indexing view over it.
struct ModelSpec {
  ModelKind kind = ModelKind::kLogistic;
  std::size_t input_dim = 0;
  int num_classes = 0;
  std::size_t hidden_units = 0;  // mlp only
};

std::size_t param_count(const ModelSpec& spec);

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) per layer, seed-reproducible.
ParamVector init_params(const ModelSpec& spec, RngStream rng);

struct GradResult {
  ParamVector gradient;
  double loss = 0.0;
  std::size_t batch_size = 0;
};

/// Mean cross-entropy over the batch (log-sum-exp stabilized).
double loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
            std::span<const std::size_t> batch);

/// Mean gradient and loss over the batch.
GradResult grad(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
                std::span<const std::size_t> batch);

/// Class probabilities for one example (softmax output).
std::vector<double> predict_proba(const ModelSpec& spec, const ParamVector& params,
                                  std::span<const double> x);

/// Argmax class; ties break toward the lowest class index.
int predict(const ModelSpec& spec, const ParamVector& params, std::span<const double> x);

double accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& data);

}  // namespace feduhb
