#include "feduhb/theory.hpp"

#include <cmath>
#include <string>

#include "feduhb/errors.hpp"
#include "feduhb/objective.hpp"
#include "feduhb/stopping.hpp"

namespace feduhb {

namespace {

void check_bound_domain(double alpha, double beta, double mu) {
  if (alpha <= 0.0 || mu <= 0.0) throw ConfigError("theorem bound: need alpha, mu > 0");
  if (alpha * mu >= 1.0) {
    throw ConfigError("theorem bound: alpha*mu = " + std::to_string(alpha * mu) +
                      " must be < 1");
  }
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("theorem bound: beta must lie in [0,1)");
}

}  // namespace

double theorem_bound(std::size_t t, double initial_gap, double alpha, double beta,
                     double mu, double grad_bound) {
  check_bound_domain(alpha, beta, mu);
  if (initial_gap < 0.0 || grad_bound < 0.0) {
    throw ConfigError("theorem bound: d0 and G must be non-negative");
  }
  const double rho = std::sqrt(1.0 - alpha * mu);
  const double decay = std::pow(rho, double(t));
  return decay * initial_gap +
         alpha * grad_bound * (1.0 - decay) / ((1.0 - beta) * (1.0 - rho));
}

double asymptotic_gap(double alpha, double beta, double mu, double grad_bound) {
  check_bound_domain(alpha, beta, mu);
  if (grad_bound < 0.0) throw ConfigError("theorem bound: G must be non-negative");
  const double rho = std::sqrt(1.0 - alpha * mu);
  return alpha * grad_bound / ((1.0 - beta) * (1.0 - rho));
}

BoundTrajectory divergence_trace(const QuadraticProblem& problem, double alpha,
                                 double beta, std::size_t rounds,
                                 const ParamVector& heavy_ball_init,
                                 const ParamVector& retrain_init) {
  if (alpha * problem.lipschitz > 1.0 + 1e-12) {
    throw ProtocolError("divergence_trace: alpha*L = " +
                        std::to_string(alpha * problem.lipschitz) +
                        " violates the alpha*L <= 1 hypothesis");
  }
  check_bound_domain(alpha, beta, problem.mu);
  check_same_dim(heavy_ball_init, retrain_init, "divergence_trace");
  if (heavy_ball_init.dim() != problem.dim()) {
    throw ShapeError("divergence_trace: init dim does not match problem dim");
  }

  // Lockstep trajectories on the shared full-batch global gradient.
  ParamVector w_bar = heavy_ball_init;
  ParamVector w_bar_prev = heavy_ball_init;
  ParamVector w_hat = retrain_init;

  std::vector<double> gaps;
  double max_grad_norm = 0.0;
  gaps.push_back(l2_norm(sub(w_bar, w_hat)));
  for (std::size_t t = 0; t < rounds; ++t) {
    const ParamVector g_bar = problem.global_grad(w_bar);
    const ParamVector g_hat = problem.global_grad(w_hat);
    max_grad_norm = std::max({max_grad_norm, l2_norm(g_bar), l2_norm(g_hat)});

    const ParamVector w_bar_next = heavy_ball_step(w_bar, w_bar_prev, g_bar, alpha, beta);
    w_hat = add_scaled(w_hat, -alpha, g_hat);
    w_bar_prev = w_bar;
    w_bar = w_bar_next;
    gaps.push_back(l2_norm(sub(w_bar, w_hat)));
  }
  if (max_grad_norm == 0.0) {
    throw MetricError("divergence_trace: degenerate run, gradient norm stayed zero");
  }

  BoundTrajectory trace;
  trace.gap = std::move(gaps);
  trace.rho = std::sqrt(1.0 - alpha * problem.mu);
  trace.grad_bound_used = max_grad_norm;
  trace.initial_gap = trace.gap.front();
  trace.limit = asymptotic_gap(alpha, beta, problem.mu, max_grad_norm);
  trace.bound.reserve(trace.gap.size());
  for (std::size_t t = 0; t < trace.gap.size(); ++t) {
    trace.bound.push_back(
        theorem_bound(t, trace.initial_gap, alpha, beta, problem.mu, max_grad_norm));
  }
  return trace;
}

double power_iteration_max(const Eigen::MatrixXd& a, double tol, std::size_t max_iters) {
  RngStream rng(0x9E1EAF, StreamPurpose::kProbe);
  Eigen::VectorXd v(a.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    Eigen::VectorXd av = a * v;
    const double next = v.dot(av);
    const double norm = av.norm();
    if (norm == 0.0) return 0.0;
    v = av / norm;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
  }
  throw MetricError("power iteration: no convergence within " +
                    std::to_string(max_iters) + " steps");
}

double inverse_power_iteration_min(const Eigen::MatrixXd& a, double tol,
                                   std::size_t max_iters) {
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw MetricError("inverse power iteration: matrix is not positive definite");
  }
  RngStream rng(0x5EEDF00D, StreamPurpose::kProbe);
  Eigen::VectorXd v(a.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next_v = llt.solve(v);
    const double norm = next_v.norm();
    if (norm == 0.0) throw MetricError("inverse power iteration: zero vector");
    next_v /= norm;
    const double next = next_v.dot(a * next_v);  // Rayleigh quotient
    v = next_v;
    if (it > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
  }
  throw MetricError("inverse power iteration: no convergence within " +
                    std::to_string(max_iters) + " steps");
}

ConvexityConstants estimate_constants(const QuadraticProblem& problem,
                                      std::span<const ParamVector> params_trace) {
  const Eigen::MatrixXd mean = problem.mean_hessian();
  ConvexityConstants constants;
  constants.lipschitz = power_iteration_max(mean);
  constants.mu = inverse_power_iteration_min(mean);

  std::vector<QuadraticClient> clients;
  clients.reserve(problem.num_clients());
  std::vector<const ClientObjective*> views;
  for (std::size_t c = 0; c < problem.num_clients(); ++c) {
    clients.emplace_back(c, problem, c);
  }
  for (const auto& c : clients) views.push_back(&c);
  constants.grad_bound = grad_norm_bound_estimate(params_trace, views);
  return constants;
}

}  // namespace feduhb
