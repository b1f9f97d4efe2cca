#include "gengrad/fixtures.hpp"

#include <stdexcept>

#include "gengrad/random.hpp"

namespace gengrad {

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

EmpiricalMeasure one_d_data() {
  return EmpiricalMeasure({{vec({-0.8}), vec({0.3}), 1.0},
                           {vec({-0.3}), vec({-0.2}), 0.5},
                           {vec({0.5}), vec({0.7}), 1.0},
                           {vec({0.9}), vec({0.1}), 0.25}});
}

EmpiricalMeasure two_d_data() {
  return EmpiricalMeasure({{vec({0.25, 0.5}), vec({0.4, -0.1}), 1.0},
                           {vec({-0.6, 0.2}), vec({-0.3, 0.8}), 0.5},
                           {vec({0.7, -0.9}), vec({0.2, 0.5}), 1.0},
                           {vec({-0.4, -0.75}), vec({0.6, -0.4}), 0.75},
                           {vec({0.1, 0.95}), vec({-0.5, 0.3}), 1.0}});
}

// Layer 1 of a 2-3-2 network whose first hidden unit has pre-activation
// `target` at x = (0.25, 0.5); the remaining entries are generic.
ParamVector pinned_232(double target) {
  ParamVector t(17);
  // W1 (3x2), b1 (3)
  t << 1.0, 1.0, -0.7, 0.4, 0.3, -1.1, target - 0.75, 0.15, -0.2,
      // W2 (2x3), b2 (2)
      0.9, -0.6, 0.5, -0.4, 0.8, 1.2, 0.05, -0.1;
  return t;
}

}  // namespace

ParamVector random_theta(const Architecture& arch, std::uint64_t seed, double scale) {
  Rng rng(seed);
  return rng.uniform_vector(arch.param_count(), -scale, scale);
}

std::vector<std::string> fixture_names() {
  return {"affine-1-1",        "relu-1-2-1",         "relu-2-3-2",      "leaky-2-3-2",
          "hardtanh-2-3-2",    "relu-1-2-1-pinned",  "relu-2-3-2-zero", "leaky-2-3-2-pinned",
          "hardtanh-2-3-2-pinned", "smooth-2-3-2"};
}

Fixture make_fixture(const std::string& name) {
  if (name == "affine-1-1") {
    EmpiricalMeasure m({{vec({2.0}), vec({1.0}), 1.0},
                        {vec({-1.0}), vec({0.5}), 1.0},
                        {vec({0.5}), vec({-0.25}), 0.5}});
    return {name, Architecture({1, 1}), relu(), m, mse_loss(), vec({1.0, 0.0}), false};
  }
  if (name == "relu-1-2-1" || name == "relu-1-2-1-pinned") {
    const bool pinned = name == "relu-1-2-1-pinned";
    // Unit 1 has pre-activation 2 * 0.5 - 1 = 0 at x = 0.5 in the pinned variant.
    ParamVector t = pinned ? vec({2.0, -1.0, -1.0, 0.2, 1.5, -0.7, 0.1})
                           : vec({1.3, -0.9, 0.35, 0.2, 1.1, -0.8, 0.05});
    return {name, Architecture({1, 2, 1}), relu(), one_d_data(), mse_loss(), t, pinned};
  }
  if (name == "relu-2-3-2") {
    return {name, Architecture({2, 3, 2}), relu(), two_d_data(), mse_loss(), pinned_232(0.37),
            false};
  }
  if (name == "relu-2-3-2-zero") {
    return {name, Architecture({2, 3, 2}), relu(), two_d_data(), mse_loss(),
            ParamVector::Zero(17), true};
  }
  if (name == "leaky-2-3-2" || name == "leaky-2-3-2-pinned") {
    const bool pinned = name == "leaky-2-3-2-pinned";
    return {name, Architecture({2, 3, 2}), leaky_relu(0.1), two_d_data(), mse_loss(),
            pinned_232(pinned ? 0.0 : -0.29), pinned};
  }
  if (name == "hardtanh-2-3-2" || name == "hardtanh-2-3-2-pinned") {
    const bool pinned = name == "hardtanh-2-3-2-pinned";
    ParamVector t = pinned_232(pinned ? 1.0 : 0.61);
    t(8) = -0.23;  // keeps the third unit off the kink at 1
    return {name, Architecture({2, 3, 2}), hard_tanh(), two_d_data(), mse_loss(), t, pinned};
  }
  if (name == "smooth-2-3-2") {
    return {name, Architecture({2, 3, 2}), softplus(), two_d_data(), mse_loss(), pinned_232(0.37),
            false};
  }
  throw std::invalid_argument("unknown fixture: " + name);
}

}  // namespace gengrad
