#include "feduhb/model.hpp"

#include <algorithm>
#include <cmath>

#include "feduhb/errors.hpp"

namespace feduhb {

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "quadratic") return ModelKind::kQuadratic;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model kind '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kQuadratic: return "quadratic";
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kMlp: return "mlp";
  }
  return "?";
}

std::size_t param_count(const ModelSpec& spec) {
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  switch (spec.kind) {
    case ModelKind::kQuadratic:
      return spec.input_dim;
    case ModelKind::kLogistic:
      return (spec.input_dim + 1) * k;
    case ModelKind::kMlp:
      return (spec.input_dim + 1) * spec.hidden_units + (spec.hidden_units + 1) * k;
  }
  return 0;
}

ParamVector init_params(const ModelSpec& spec, RngStream rng) {
  ParamVector params(param_count(spec));
  if (spec.kind == ModelKind::kQuadratic) {
    for (std::size_t i = 0; i < params.dim(); ++i) params[i] = rng.uniform(-1.0, 1.0);
    return params;
  }
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  std::size_t offset = 0;
  auto fill_layer = [&](std::size_t fan_in, std::size_t count) {
    const double bound = 1.0 / std::sqrt(double(fan_in));
    for (std::size_t i = 0; i < count; ++i) params[offset++] = rng.uniform(-bound, bound);
  };
  if (spec.kind == ModelKind::kLogistic) {
    fill_layer(spec.input_dim, (spec.input_dim + 1) * k);
  } else {
    fill_layer(spec.input_dim, (spec.input_dim + 1) * spec.hidden_units);
    fill_layer(spec.hidden_units, (spec.hidden_units + 1) * k);
  }
  return params;
}

namespace {

void check_classifier(const ModelSpec& spec, const ParamVector& params,
                      const Dataset& data) {
  if (spec.kind == ModelKind::kQuadratic) {
    throw ConfigError("quadratic models are evaluated through QuadraticProblem");
  }
  if (params.dim() != param_count(spec)) {
    throw ShapeError("parameter count " + std::to_string(params.dim()) +
                     " does not match spec (" + std::to_string(param_count(spec)) + ")");
  }
  if (data.feature_dim != spec.input_dim) {
    throw ShapeError("feature dim " + std::to_string(data.feature_dim) +
                     " does not match model input dim " + std::to_string(spec.input_dim));
  }
}

// Layer views into the flat parameter vector.
struct LogisticView {
  const double* w;  // num_classes x input_dim, row-major
  const double* b;  // num_classes
};
struct MlpView {
  const double* w1;  // hidden x input
  const double* b1;  // hidden
  const double* w2;  // classes x hidden
  const double* b2;  // classes
};

LogisticView logistic_view(const ModelSpec& spec, const double* p) {
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  return {p, p + k * spec.input_dim};
}

MlpView mlp_view(const ModelSpec& spec, const double* p) {
  const std::size_t h = spec.hidden_units;
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  const double* w1 = p;
  const double* b1 = w1 + h * spec.input_dim;
  const double* w2 = b1 + h;
  const double* b2 = w2 + k * h;
  return {w1, b1, w2, b2};
}

// In-place stable softmax; returns -log p[label] (ignored when label < 0).
double softmax_inplace(std::vector<double>& z, int label) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  double nll = 0.0;
  if (label >= 0) nll = -std::log(z[static_cast<std::size_t>(label)] / sum);
  for (double& v : z) v /= sum;
  return nll;
}

void logits_logistic(const ModelSpec& spec, LogisticView view, std::span<const double> x,
                     std::vector<double>& z) {
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  z.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double* row = view.w + c * spec.input_dim;
    double acc = view.b[c];
    for (std::size_t j = 0; j < spec.input_dim; ++j) acc += row[j] * x[j];
    z[c] = acc;
  }
}

void forward_mlp(const ModelSpec& spec, MlpView view, std::span<const double> x,
                 std::vector<double>& hidden, std::vector<double>& z) {
  const std::size_t h = spec.hidden_units;
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  hidden.assign(h, 0.0);
  for (std::size_t u = 0; u < h; ++u) {
    const double* row = view.w1 + u * spec.input_dim;
    double acc = view.b1[u];
    for (std::size_t j = 0; j < spec.input_dim; ++j) acc += row[j] * x[j];
    hidden[u] = std::tanh(acc);
  }
  z.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double* row = view.w2 + c * h;
    double acc = view.b2[c];
    for (std::size_t u = 0; u < h; ++u) acc += row[u] * hidden[u];
    z[c] = acc;
  }
}

}  // namespace

double loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
            std::span<const std::size_t> batch) {
  check_classifier(spec, params, data);
  if (batch.empty()) throw ProtocolError("loss: empty batch");
  std::vector<double> z, hidden;
  long double acc = 0.0L;
  for (std::size_t idx : batch) {
    const auto x = data.example(idx);
    if (spec.kind == ModelKind::kLogistic) {
      logits_logistic(spec, logistic_view(spec, params.data()), x, z);
    } else {
      forward_mlp(spec, mlp_view(spec, params.data()), x, hidden, z);
    }
    acc += softmax_inplace(z, data.labels[idx]);
  }
  const double mean = static_cast<double>(acc / batch.size());
  if (!std::isfinite(mean)) throw NumericError("loss: non-finite value");
  return mean;
}

GradResult grad(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
                std::span<const std::size_t> batch) {
  check_classifier(spec, params, data);
  if (batch.empty()) throw ProtocolError("grad: empty batch");
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  GradResult result;
  result.gradient = ParamVector(params.dim());
  result.batch_size = batch.size();
  double* g = result.gradient.data();
  std::vector<double> z, hidden, dpre;
  long double loss_acc = 0.0L;

  for (std::size_t idx : batch) {
    const auto x = data.example(idx);
    const int label = data.labels[idx];
    if (spec.kind == ModelKind::kLogistic) {
      const LogisticView view = logistic_view(spec, params.data());
      logits_logistic(spec, view, x, z);
      loss_acc += softmax_inplace(z, label);
      double* gw = g;
      double* gb = g + k * spec.input_dim;
      for (std::size_t c = 0; c < k; ++c) {
        const double dz = z[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
        double* row = gw + c * spec.input_dim;
        for (std::size_t j = 0; j < spec.input_dim; ++j) row[j] += dz * x[j];
        gb[c] += dz;
      }
    } else {
      const MlpView view = mlp_view(spec, params.data());
      forward_mlp(spec, view, x, hidden, z);
      loss_acc += softmax_inplace(z, label);
      const std::size_t h = spec.hidden_units;
      double* gw1 = g;
      double* gb1 = gw1 + h * spec.input_dim;
      double* gw2 = gb1 + h;
      double* gb2 = gw2 + k * h;
      dpre.assign(h, 0.0);
      for (std::size_t c = 0; c < k; ++c) {
        const double dz = z[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
        double* row = gw2 + c * h;
        for (std::size_t u = 0; u < h; ++u) {
          row[u] += dz * hidden[u];
          dpre[u] += dz * view.w2[c * h + u];
        }
        gb2[c] += dz;
      }
      for (std::size_t u = 0; u < h; ++u) {
        const double d = dpre[u] * (1.0 - hidden[u] * hidden[u]);  // tanh'
        double* row = gw1 + u * spec.input_dim;
        for (std::size_t j = 0; j < spec.input_dim; ++j) row[j] += d * x[j];
        gb1[u] += d;
      }
    }
  }

  const double inv = 1.0 / double(batch.size());
  for (std::size_t i = 0; i < result.gradient.dim(); ++i) g[i] *= inv;
  result.loss = static_cast<double>(loss_acc / batch.size());
  if (!std::isfinite(result.loss)) throw NumericError("grad: non-finite loss");
  ensure_finite(result.gradient, "grad");
  return result;
}

std::vector<double> predict_proba(const ModelSpec& spec, const ParamVector& params,
                                  std::span<const double> x) {
  if (x.size() != spec.input_dim) throw ShapeError("predict: feature dim mismatch");
  std::vector<double> z, hidden;
  if (spec.kind == ModelKind::kLogistic) {
    logits_logistic(spec, logistic_view(spec, params.data()), x, z);
  } else if (spec.kind == ModelKind::kMlp) {
    forward_mlp(spec, mlp_view(spec, params.data()), x, hidden, z);
  } else {
    throw ConfigError("predict_proba: not a classifier model");
  }
  softmax_inplace(z, -1);
  return z;
}

int predict(const ModelSpec& spec, const ParamVector& params, std::span<const double> x) {
  const std::vector<double> p = predict_proba(spec, params, x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;  // strict: ties stay at the lowest index
  }
  return static_cast<int>(best);
}

double accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
  if (spec.kind == ModelKind::kQuadratic) {
    throw MetricError("accuracy: unsupported metric for regression models");
  }
  if (data.num_examples() == 0) throw ProtocolError("accuracy: empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.num_examples(); ++i) {
    if (predict(spec, params, data.example(i)) == data.labels[i]) ++correct;
  }
  return double(correct) / double(data.num_examples());
}

}  // namespace feduhb
