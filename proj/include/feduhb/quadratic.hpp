#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "feduhb/param_vector.hpp"
#include "feduhb/rng.hpp"

namespace feduhb {

/// Synthetic strongly convex problem with known curvature constants.
/// Client c holds loss L_c(w) = 0.5 (w - b_c)^T A_c (w - b_c); the
/// global loss is the unweighted client mean, whose Hessian has extreme
/// eigenvalues (mu, lipschitz) by construction.
struct QuadraticProblem {
  std::vector<Eigen::MatrixXd> client_hessians;
  std::vector<Eigen::VectorXd> client_optima;
  double mu = 0.0;
  double lipschitz = 0.0;

  std::size_t num_clients() const { return client_hessians.size(); }
  std::size_t dim() const {
    return client_hessians.empty() ? 0 : static_cast<std::size_t>(client_hessians[0].rows());
  }

  Eigen::MatrixXd mean_hessian() const;
  double client_loss(std::size_t client, const ParamVector& w) const;
  ParamVector client_grad(std::size_t client, const ParamVector& w) const;
  double global_loss(const ParamVector& w) const;
  ParamVector global_grad(const ParamVector& w) const;
  /// Minimizer of the global loss.
  ParamVector minimizer() const;
  /// Restriction to a client subset (used for remaining-client losses).
  QuadraticProblem restrict(std::span<const std::size_t> clients) const;
};

/// Builds the problem as Q diag(lambda) Q^T with eigenvalues spanning
/// exactly [mu_target, L_target] on the client mean; per-client spectra
/// are scaled copies whose mean matches the target exactly.
QuadraticProblem gen_quadratic(std::size_t num_clients, std::size_t dim, double mu_target,
                               double L_target, RngStream rng);

inline Eigen::Map<const Eigen::VectorXd> as_eigen(const ParamVector& v) {
  return {v.data(), static_cast<Eigen::Index>(v.dim())};
}

inline ParamVector from_eigen(const Eigen::VectorXd& v) {
  return ParamVector(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace feduhb
