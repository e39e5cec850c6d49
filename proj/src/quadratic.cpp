#include "feduhb/quadratic.hpp"

#include <cmath>
#include <string>

#include "feduhb/errors.hpp"

namespace feduhb {

Eigen::MatrixXd QuadraticProblem::mean_hessian() const {
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(client_hessians[0].rows(),
                                               client_hessians[0].cols());
  for (const auto& a : client_hessians) mean += a;
  return mean / double(client_hessians.size());
}

double QuadraticProblem::client_loss(std::size_t client, const ParamVector& w) const {
  const Eigen::VectorXd d = as_eigen(w) - client_optima[client];
  return 0.5 * d.dot(client_hessians[client] * d);
}

ParamVector QuadraticProblem::client_grad(std::size_t client, const ParamVector& w) const {
  const Eigen::VectorXd d = as_eigen(w) - client_optima[client];
  return from_eigen(client_hessians[client] * d);
}

double QuadraticProblem::global_loss(const ParamVector& w) const {
  long double acc = 0.0L;
  for (std::size_t c = 0; c < num_clients(); ++c) acc += client_loss(c, w);
  return static_cast<double>(acc / num_clients());
}

ParamVector QuadraticProblem::global_grad(const ParamVector& w) const {
  std::vector<ParamVector> grads;
  grads.reserve(num_clients());
  for (std::size_t c = 0; c < num_clients(); ++c) grads.push_back(client_grad(c, w));
  const std::vector<double> weights(num_clients(), 1.0);
  return mean_weighted(grads, weights);
}

ParamVector QuadraticProblem::minimizer() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(client_hessians[0].rows(),
                                            client_hessians[0].cols());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(client_hessians[0].rows());
  for (std::size_t c = 0; c < num_clients(); ++c) {
    a += client_hessians[c];
    rhs += client_hessians[c] * client_optima[c];
  }
  return from_eigen(a.llt().solve(rhs));
}

QuadraticProblem QuadraticProblem::restrict(std::span<const std::size_t> clients) const {
  if (clients.empty()) throw ProtocolError("quadratic restrict: empty client subset");
  QuadraticProblem sub;
  for (std::size_t c : clients) {
    sub.client_hessians.push_back(client_hessians.at(c));
    sub.client_optima.push_back(client_optima.at(c));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.mean_hessian());
  sub.mu = es.eigenvalues().minCoeff();
  sub.lipschitz = es.eigenvalues().maxCoeff();
  return sub;
}

QuadraticProblem gen_quadratic(std::size_t num_clients, std::size_t dim, double mu_target,
                               double L_target, RngStream rng) {
  if (!(mu_target > 0.0) || !(L_target >= mu_target)) {
    throw ConfigError("gen_quadratic: need 0 < mu <= L, got mu=" +
                      std::to_string(mu_target) + " L=" + std::to_string(L_target));
  }
  if (dim == 0 || num_clients == 0) {
    throw ConfigError("gen_quadratic: dim and num_clients must be positive");
  }
  if (dim == 1 && mu_target != L_target) {
    throw ConfigError("gen_quadratic: a 1-dimensional spectrum cannot span mu < L");
  }

  // Target eigenvalues linearly spaced over [mu, L].
  Eigen::VectorXd lambda(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    lambda[i] = dim == 1 ? mu_target
                         : mu_target + (L_target - mu_target) * double(i) / double(dim - 1);
  }

  // Random orthogonal basis from a QR factorization.
  Eigen::MatrixXd gauss(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) gauss(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();

  // Per-client eigenvalue scale factors with exact per-direction mean 1,
  // keeping every A_c positive definite and the mean spectrum exact.
  std::vector<Eigen::VectorXd> client_lambda(num_clients, lambda);
  if (num_clients > 1) {
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<double> f(num_clients);
      long double sum = 0.0L;
      for (std::size_t c = 0; c < num_clients; ++c) {
        f[c] = rng.uniform(0.5, 1.5);
        sum += f[c];
      }
      const double mean = static_cast<double>(sum / num_clients);
      for (std::size_t c = 0; c < num_clients; ++c) {
        client_lambda[c][i] = lambda[i] * (f[c] / mean);
      }
    }
  }

  QuadraticProblem problem;
  problem.mu = mu_target;
  problem.lipschitz = L_target;
  problem.client_hessians.reserve(num_clients);
  problem.client_optima.reserve(num_clients);
  for (std::size_t c = 0; c < num_clients; ++c) {
    Eigen::MatrixXd a = q * client_lambda[c].asDiagonal() * q.transpose();
    // Symmetrize away factorization round-off.
    problem.client_hessians.push_back(0.5 * (a + a.transpose()));
    Eigen::VectorXd b(dim);
    for (std::size_t i = 0; i < dim; ++i) b[i] = rng.uniform(-1.0, 1.0);
    problem.client_optima.push_back(b);
  }
  return problem;
}

}  // namespace feduhb
