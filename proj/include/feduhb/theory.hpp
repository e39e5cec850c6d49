#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "feduhb/param_vector.hpp"
#include "feduhb/quadratic.hpp"

namespace feduhb {

/// Curvature and gradient-norm constants of a loss: strong convexity
/// mu, smoothness L, gradient bound G.
struct ConvexityConstants {
  double mu = 0.0;
  double lipschitz = 0.0;
  double grad_bound = 0.0;
};

/// Closed-form divergence bound between the heavy-ball and plain-GD
/// trajectories after t rounds:
///   rho^t * d0 + alpha*G*(1 - rho^t) / ((1-beta)*(1-rho)),
/// with rho = sqrt(1 - alpha*mu).
double theorem_bound(std::size_t t, double initial_gap, double alpha, double beta,
                     double mu, double grad_bound);

/// Limit of theorem_bound as t -> infinity:
///   alpha*G / ((1-beta)*(1-sqrt(1-alpha*mu))).
double asymptotic_gap(double alpha, double beta, double mu, double grad_bound);

struct BoundTrajectory {
  std::vector<double> gap;    // measured ||w_bar_t - w_hat_t||
  std::vector<double> bound;  // theorem bound at t
  double rho = 0.0;
  double limit = 0.0;
  double grad_bound_used = 0.0;
  double initial_gap = 0.0;
};

/// Runs the heavy-ball and plain-GD update rules in lockstep on the
/// problem's full-batch global gradient and records the measured gap
/// next to the bound. G is instantiated as the maximum gradient norm
/// observed along both trajectories. Refuses alpha*L > 1 setups.
BoundTrajectory divergence_trace(const QuadraticProblem& problem, double alpha,
                                 double beta, std::size_t rounds,
                                 const ParamVector& heavy_ball_init,
                                 const ParamVector& retrain_init);

/// Largest eigenvalue of a symmetric PD matrix by power iteration.
double power_iteration_max(const Eigen::MatrixXd& a, double tol = 1e-8,
                           std::size_t max_iters = 10000);

/// Smallest eigenvalue by inverse power iteration (Cholesky solves).
double inverse_power_iteration_min(const Eigen::MatrixXd& a, double tol = 1e-8,
                                   std::size_t max_iters = 10000);

/// (mu, L) from power/inverse-power iteration on the mean Hessian; G
/// from the safety-inflated max client gradient norm over the trace.
ConvexityConstants estimate_constants(const QuadraticProblem& problem,
                                      std::span<const ParamVector> params_trace);

}  // namespace feduhb
