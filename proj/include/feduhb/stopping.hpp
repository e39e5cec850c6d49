#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "feduhb/errors.hpp"
#include "feduhb/param_vector.hpp"

namespace feduhb {

/// Polyak heavy-ball update: w - alpha*grad + beta*(w - w_prev).
/// beta == 0 reduces exactly to the plain gradient step.
inline ParamVector heavy_ball_step(const ParamVector& w, const ParamVector& w_prev,
                                   const ParamVector& grad, double alpha, double beta) {
  check_same_dim(w, grad, "heavy_ball_step");
  if (beta == 0.0) return add_scaled(w, -alpha, grad);
  check_same_dim(w, w_prev, "heavy_ball_step");
  ParamVector out(w.dim());
  for (std::size_t i = 0; i < w.dim(); ++i) {
    out[i] = w[i] - alpha * grad[i] + beta * (w[i] - w_prev[i]);
  }
  ensure_finite(out, "heavy_ball_step");
  return out;
}

/// Momentum-scaled norm of the latest weight change:
/// delta = ||beta * (w - w_prev)||_2 = beta * ||w - w_prev||_2.
inline double weight_change(const ParamVector& w, const ParamVector& w_prev, double beta) {
  check_same_dim(w, w_prev, "weight_change");
  return beta * l2_norm(sub(w, w_prev));
}

struct RollingStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Ring buffer of the last k weight-change norms with population
/// (divisor-k) statistics over the min(k, count) most recent values.
class StopState {
 public:
  explicit StopState(std::size_t window) : window_(window) {
    if (window < 2) throw ConfigError("stop window k must be >= 2");
    ring_.reserve(window);
  }

  RollingStats push(double delta) {
    if (!std::isfinite(delta) || delta < 0.0) {
      throw NumericError("StopState: delta must be finite and non-negative");
    }
    if (ring_.size() < window_) {
      ring_.push_back(delta);
    } else {
      ring_[count_ % window_] = delta;
    }
    ++count_;
    return stats();
  }

  RollingStats stats() const {
    if (ring_.empty()) throw ProtocolError("StopState: no values pushed yet");
    long double mean_acc = 0.0L;
    for (double v : ring_) mean_acc += v;
    const long double mean = mean_acc / ring_.size();
    long double var_acc = 0.0L;
    for (double v : ring_) {
      const long double d = v - mean;
      var_acc += d * d;
    }
    const long double var = var_acc / ring_.size();
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
  }

  bool warmed_up() const { return count_ >= window_; }
  std::size_t window() const { return window_; }
  std::size_t count() const { return count_; }
  /// Current window contents (unordered); used to cross-check stats.
  const std::vector<double>& buffer() const { return ring_; }

 private:
  std::size_t window_;
  std::vector<double> ring_;
  std::size_t count_ = 0;
};

/// Dynamic stop rule: stop iff delta < max(epsilon, lambda * sigma).
inline bool should_stop(double delta, double sigma, double lambda, double epsilon) {
  return delta < std::max(epsilon, lambda * sigma);
}

}  // namespace feduhb
