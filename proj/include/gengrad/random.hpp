#ifndef GENGRAD_RANDOM_HPP_
#define GENGRAD_RANDOM_HPP_

#include <cstdint>
#include <random>

#include "gengrad/network.hpp"

namespace gengrad {

/// Seeded generator shared by every harness; all draws are reproducible from the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine_); }

  VectorXd uniform_vector(Index n, double a, double b) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = uniform(a, b);
    return v;
  }

  /// Uniformly distributed direction on the unit sphere.
  VectorXd unit_direction(Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd v(n);
    do {
      for (Index i = 0; i < n; ++i) v(i) = normal(engine_);
    } while (v.norm() == 0.0);
    return v / v.norm();
  }

  /// Uniform point in the ball of the given radius around `center`.
  VectorXd in_ball(const VectorXd& center, double radius) {
    const auto n = center.size();
    const double r = radius * std::pow(uniform(0.0, 1.0), 1.0 / static_cast<double>(n));
    return center + r * unit_direction(n);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gengrad

#endif  // GENGRAD_RANDOM_HPP_
