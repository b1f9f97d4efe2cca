#ifndef GENGRAD_FIXTURES_HPP_
#define GENGRAD_FIXTURES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gengrad/risk.hpp"

namespace gengrad {

/// A small, fully specified experiment: network, activation, data, loss and a
/// default parameter vector.
struct Fixture {
  std::string name;
  Architecture arch;
  PiecewiseActivation act;
  EmpiricalMeasure measure;
  LossFunction loss;
  ParamVector theta;
  /// Some hidden pre-activation of `theta` sits exactly on a kink at a data point.
  bool kink_pinned = false;
};

std::vector<std::string> fixture_names();
/// Throws std::invalid_argument for unknown names.
Fixture make_fixture(const std::string& name);

/// Seeded uniform draw in [-scale, scale]^d.
ParamVector random_theta(const Architecture& arch, std::uint64_t seed, double scale = 1.0);

}  // namespace gengrad

#endif  // GENGRAD_FIXTURES_HPP_
