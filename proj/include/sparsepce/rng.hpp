#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sparsepce {

/// Named sub-stream purposes. A master seed plus a purpose and up to two
/// counter words identify one independent random stream, so adding trials
/// or sample sizes to an experiment never perturbs streams already drawn.
enum class Stream : std::uint64_t {
  standard_points = 1,
  chain = 2,
  pool = 3,
  selection = 4,
  trial = 5,
  instance = 6,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Derive the seed of sub-stream (purpose, a, b) from a master seed by
/// absorbing each word through SplitMix64.
inline std::uint64_t derive_seed(std::uint64_t master, Stream purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t h = detail::splitmix64(s);
  s = h ^ static_cast<std::uint64_t>(purpose);
  h = detail::splitmix64(s);
  s = h ^ a;
  h = detail::splitmix64(s);
  s = h ^ b;
  return detail::splitmix64(s);
}

/// mt19937_64 with hand-rolled variate transforms. The standard library's
/// distributions are implementation-defined, so sampling through them would
/// not reproduce bit-for-bit across toolchains; these transforms do.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [-1, 1).
  double uniform_pm1() { return 2.0 * uniform01() - 1.0; }

  /// Standard normal via Box-Muller; draws are produced in pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection over the top 64-bit range keeps the draw unbiased.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sparsepce
