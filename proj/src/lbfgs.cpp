#include "feduhb/lbfgs.hpp"

#include <vector>

namespace feduhb {

ParamVector lbfgs_two_loop(const LbfgsBuffer& buffer, const ParamVector& v) {
  if (buffer.size() == 0) return v;
  const auto& pairs = buffer.pairs();
  const std::size_t m = pairs.size();

  ParamVector q = v;
  std::vector<double> alpha(m, 0.0);
  for (std::size_t i = m; i-- > 0;) {
    alpha[i] = dot(pairs[i].s, q) / pairs[i].sy;
    q = add_scaled(q, -alpha[i], pairs[i].y);
  }
  const CurvaturePair& newest = pairs.back();
  const double gamma = newest.sy / dot(newest.y, newest.y);
  ParamVector r = scaled(q, gamma);
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = dot(pairs[i].y, r) / pairs[i].sy;
    r = add_scaled(r, alpha[i] - beta, pairs[i].s);
  }
  return r;
}

ParamVector lbfgs_hessian_vec(const LbfgsBuffer& buffer, const ParamVector& v) {
  if (buffer.size() == 0) return v;
  const auto& pairs = buffer.pairs();
  const std::size_t m = pairs.size();
  const CurvaturePair& newest = pairs.back();
  const double sigma = dot(newest.y, newest.y) / newest.sy;

  // B_{k+1} x = B_k x + (y_k y_k'x)/(y_k's_k) - (B_k s_k)(s_k'B_k x)/(s_k'B_k s_k)
  // Precompute bs[k] = B_k s_k so each later application is a plain sum.
  auto apply_prefix = [&](std::size_t k, const ParamVector& x,
                          const std::vector<ParamVector>& bs,
                          const std::vector<double>& sbs) {
    ParamVector out = scaled(x, sigma);
    for (std::size_t j = 0; j < k; ++j) {
      const double yx = dot(pairs[j].y, x);
      const double sbx = dot(bs[j], x);
      for (std::size_t i = 0; i < out.dim(); ++i) {
        out[i] += (yx / pairs[j].sy) * pairs[j].y[i] - (sbx / sbs[j]) * bs[j][i];
      }
    }
    return out;
  };

  std::vector<ParamVector> bs(m);
  std::vector<double> sbs(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    bs[k] = apply_prefix(k, pairs[k].s, bs, sbs);
    sbs[k] = dot(pairs[k].s, bs[k]);
    if (!(sbs[k] > 0.0)) {
      throw NumericError("lbfgs_hessian_vec: update lost positive definiteness");
    }
  }
  return apply_prefix(m, v, bs, sbs);
}

}  // namespace feduhb
