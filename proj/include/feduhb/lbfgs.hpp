#pragma once

#include <cstddef>
#include <deque>

#include "feduhb/errors.hpp"
#include "feduhb/param_vector.hpp"

namespace feduhb {

struct CurvaturePair {
  ParamVector s;  // parameter difference
  ParamVector y;  // gradient (update) difference
  double sy = 0.0;
};

/// Bounded buffer of curvature pairs; pairs with non-positive s'y are
/// rejected so the implied Hessian approximation stays positive
/// definite.
class LbfgsBuffer {
 public:
  explicit LbfgsBuffer(std::size_t capacity) : capacity_(capacity) {}

  /// Returns false when the pair was skipped (s'y <= 0).
  bool push(ParamVector s, ParamVector y) {
    check_same_dim(s, y, "LbfgsBuffer::push");
    const double sy = dot(s, y);
    if (!(sy > 0.0)) {
      ++skipped_;
      return false;
    }
    if (capacity_ == 0) return false;
    pairs_.push_back({std::move(s), std::move(y), sy});
    if (pairs_.size() > capacity_) pairs_.pop_front();
    return true;
  }

  std::size_t size() const { return pairs_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t skipped() const { return skipped_; }
  const std::deque<CurvaturePair>& pairs() const { return pairs_; }

 private:
  std::size_t capacity_;
  std::size_t skipped_ = 0;
  std::deque<CurvaturePair> pairs_;
};

/// Classic two-loop recursion: applies the L-BFGS *inverse* Hessian
/// approximation to v. Initial scaling H0 = (s'y / y'y) I from the most
/// recent pair; an empty buffer falls back to the identity.
ParamVector lbfgs_two_loop(const LbfgsBuffer& buffer, const ParamVector& v);

/// Direct BFGS Hessian-vector product B*v built by recursively applying
/// the rank-two update over the stored pairs. Initial scaling
/// B0 = (y'y / s'y) I from the most recent pair; an empty buffer falls
/// back to the identity.
ParamVector lbfgs_hessian_vec(const LbfgsBuffer& buffer, const ParamVector& v);

}  // namespace feduhb
