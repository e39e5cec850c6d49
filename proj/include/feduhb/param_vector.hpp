#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "feduhb/errors.hpp"

namespace feduhb {

/// Flat vector of model parameters. The dimension is fixed at
/// construction; arithmetic on mismatched dimensions throws ShapeError.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool operator==(const ParamVector& other) const = default;

 private:
  std::vector<double> values_;
};

inline void check_same_dim(const ParamVector& a, const ParamVector& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw ShapeError(std::string(op) + ": dimension mismatch (" +
                     std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

inline void ensure_finite(const ParamVector& v, const char* context) {
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError(std::string(context) + ": non-finite element at index " +
                         std::to_string(i));
    }
  }
}

/// Euclidean norm, accumulated in the widest available precision.
inline double l2_norm(const ParamVector& v) {
  ensure_finite(v, "l2_norm");
  long double acc = 0.0L;
  for (double x : v) acc += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(acc));
}

/// Elementwise v + a*u.
inline ParamVector add_scaled(const ParamVector& v, double a, const ParamVector& u) {
  check_same_dim(v, u, "add_scaled");
  ParamVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = v[i] + a * u[i];
  ensure_finite(out, "add_scaled");
  return out;
}

inline ParamVector scaled(const ParamVector& v, double a) {
  ParamVector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) out[i] = a * v[i];
  ensure_finite(out, "scaled");
  return out;
}

inline ParamVector sub(const ParamVector& a, const ParamVector& b) {
  return add_scaled(a, -1.0, b);
}

inline double dot(const ParamVector& a, const ParamVector& b) {
  check_same_dim(a, b, "dot");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    acc += static_cast<long double>(a[i]) * b[i];
  }
  return static_cast<double>(acc);
}

/// Weighted mean sum(w_i v_i) / sum(w_i), reduced in ascending index
/// order so results are bitwise reproducible across runs.
inline ParamVector mean_weighted(std::span<const ParamVector> vs,
                                 std::span<const double> weights) {
  if (vs.empty()) throw ProtocolError("mean_weighted: empty vector list");
  if (vs.size() != weights.size()) {
    throw ShapeError("mean_weighted: " + std::to_string(vs.size()) + " vectors vs " +
                     std::to_string(weights.size()) + " weights");
  }
  const std::size_t dim = vs.front().dim();
  long double weight_sum = 0.0L;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) {
      throw ProtocolError("mean_weighted: weights must be finite and non-negative");
    }
    weight_sum += w;
  }
  if (weight_sum <= 0.0L) throw ProtocolError("mean_weighted: zero weight sum");

  std::vector<long double> acc(dim, 0.0L);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    check_same_dim(vs.front(), vs[i], "mean_weighted");
    const long double w = weights[i];
    for (std::size_t j = 0; j < dim; ++j) acc[j] += w * vs[i][j];
  }
  ParamVector out(dim);
  for (std::size_t j = 0; j < dim; ++j) out[j] = static_cast<double>(acc[j] / weight_sum);
  ensure_finite(out, "mean_weighted");
  return out;
}

}  // namespace feduhb
