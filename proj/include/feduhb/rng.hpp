#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace feduhb {

/// Purpose tag of a random stream. Streams with different tags are
/// independent even under the same (seed, client, round).
enum class StreamPurpose : std::uint64_t {
  kDataGen = 1,
  kPartition = 2,
  kModelInit = 3,
  kUnlearnInit = 4,
  kBatchOrder = 5,
  kUnlearnBatch = 6,
  kEraserBatch = 7,
  kTrigger = 8,
  kAttack = 9,
  kProbe = 10,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

/// Splittable counter-based random stream keyed by
/// (seed, purpose, client, round). Identical keys yield bitwise
/// identical draw sequences on any platform and thread schedule; the
/// generator never touches implementation-defined std:: distributions.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t client = 0,
            std::uint64_t round = 0) {
    std::uint64_t h = detail::mix64(seed + 0x9E3779B97F4A7C15ULL);
    h = detail::mix64(h ^ (static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL + 1));
    h = detail::mix64(h ^ (client * 0x8CB92BA72F3D8DD7ULL + 1));
    h = detail::mix64(h ^ (round * 0xABCC5167CCAD925FULL + 1));
    state_ = h;
  }

  /// Independent substream; used e.g. for per-epoch batch orders.
  RngStream derive(std::uint64_t salt) const {
    RngStream child = *this;
    child.state_ = detail::mix64(state_ ^ (salt * 0x2545F4914F6CDD1DULL + 1));
    child.has_spare_ = false;
    return child;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Unbiased draw in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::uint64_t state_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace feduhb
