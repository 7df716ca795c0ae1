#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace roomsg {

// Deterministic RNG with a platform-independent output sequence.
// std::mt19937 + <random> distributions are implementation-defined, which
// would break byte-identical outputs across standard libraries, so the few
// distributions we need are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  // xorshift* core.
  std::uint64_t next_u64() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dULL;
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller (no cached spare, to keep the draw
  // sequence independent of call sites).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  Eigen::Vector3d normal_vec3(double sigma) {
    return {sigma * normal(), sigma * normal(), sigma * normal()};
  }

  // Uniformly distributed unit vector in R^3.
  Eigen::Vector3d unit_vec3() {
    const double z = uniform(-1.0, 1.0);
    const double a = uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(a), r * std::sin(a), z};
  }

  // Random unit vector in R^d (normalized Gaussian).
  Eigen::VectorXd unit_vec(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    const double n = v.norm();
    return n > 0 ? Eigen::VectorXd(v / n) : unit_vec(dim);
  }

  // Derive an independent stream, e.g. one per room or per object.
  Rng fork(std::uint64_t salt) {
    return Rng(next_u64() ^ (salt * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL));
  }

 private:
  std::uint64_t state_;
};

}  // namespace roomsg
