#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "gengrad/activation.hpp"

using namespace gengrad;

namespace {

// Independent transcription of the three-zone approximant for a single kink y.
struct OracleApproximant {
  double y, g, delta;
  ScalarFn a, da;
  double (*eta)(double);
  double (*deta)(double);

  double value(long n, double x) const {
    const double d = std::abs(x - y);
    if (d >= delta / n) return a(x);
    const double lin = g * (x - y) + a(y);
    if (d <= delta / (2.0 * n)) return lin;
    const double t = 2.0 * n * d / delta - 1.0;
    return lin + eta(t) * (a(x) - lin);
  }
  double derivative(long n, double x) const {
    const double d = std::abs(x - y);
    if (d >= delta / n) return da(x);
    if (d <= delta / (2.0 * n)) return g;
    const double t = 2.0 * n * d / delta - 1.0;
    const double s = x > y ? 1.0 : -1.0;
    return g + eta(t) * (da(x) - g) + deta(t) * (2.0 * n / delta) * s * (a(x) - g * (x - y) - a(y));
  }
};

double cubic(double t) { return t <= 0 ? 0 : t >= 1 ? 1 : 3 * t * t - 2 * t * t * t; }
double dcubic(double t) { return t <= 0 || t >= 1 ? 0 : 6 * t - 6 * t * t; }

std::vector<PiecewiseActivation> builtins() {
  return {relu(), leaky_relu(0.1), abs_activation(), hard_tanh(),
          custom_pwl({{-0.5, 0.0}, {0.0, 0.25}, {1.0, 0.5}}, 0.1, 2.0)};
}

}  // namespace

TEST(KinkSet, RejectsUnsortedPoints) {
  EXPECT_THROW(KinkSet({1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(KinkSet({0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(KinkSet({std::nan("")}), std::invalid_argument);
}

TEST(GeneralizedDerivative, ReluKinkValue) {
  const auto r = relu();
  EXPECT_EQ(generalized_derivative(r, 0.0), 0.0);
  EXPECT_EQ(generalized_derivative(r, 2.5), 1.0);
  EXPECT_EQ(generalized_derivative(r, -1e-300), 0.0);
  EXPECT_EQ(generalized_derivative(r.with_kink_values({0.3}), 0.0), 0.3);
}

TEST(GeneralizedDerivative, LeakyAndAbs) {
  EXPECT_EQ(generalized_derivative(leaky_relu(0.1), 0.0), 0.1);
  EXPECT_EQ(generalized_derivative(leaky_relu(0.1), -3.0), 0.1);
  EXPECT_EQ(generalized_derivative(abs_activation(), 0.0), -1.0);
  EXPECT_EQ(generalized_derivative(abs_activation(1.0), 0.0), 1.0);
  EXPECT_EQ(abs_activation(1.0).approach_side(), ApproachSide::right);
}

TEST(HalfGap, Examples) {
  EXPECT_EQ(half_gap(KinkSet({0.0})), 0.5);
  EXPECT_EQ(half_gap(KinkSet{}), 0.5);
  EXPECT_EQ(half_gap(KinkSet({-1.0, 1.0})), 0.5);
  EXPECT_DOUBLE_EQ(half_gap(KinkSet({0.0, 0.2, 5.0})), 0.1);
}

TEST(NearestKink, InsideAndOutsideNeighbourhood) {
  const KinkSet k({0.0, 1.0});
  EXPECT_EQ(nearest_kink_index(k, 0.2), 0u);
  EXPECT_EQ(nearest_kink_index(k, 0.9), 1u);
  EXPECT_THROW(nearest_kink_index(k, 0.5), std::domain_error);
  EXPECT_THROW(nearest_kink_index(KinkSet{}, 0.0), std::domain_error);
}

TEST(Blending, BoundaryConditions) {
  for (const auto& eta : {smoothstep(), bump_blend()}) {
    const auto r = validate_blending(eta);
    EXPECT_TRUE(r.ok()) << eta.name;
  }
  EXPECT_THROW(blending_by_name("cosine"), std::invalid_argument);
}

TEST(Blending, BumpDerivativeMatchesDifferences) {
  const auto eta = bump_blend();
  for (double t = 0.05; t < 1.0; t += 0.05) {
    const double h = 1e-6;
    const double fd = (eta.value(t + h) - eta.value(t - h)) / (2 * h);
    EXPECT_NEAR(eta.derivative(t), fd, 1e-7) << t;
  }
}

TEST(Approximant, ReluZones) {
  const ApproximantFamily fam(relu(), smoothstep());
  EXPECT_EQ(fam.delta(), 0.5);
  for (long n : {1L, 4L, 16L}) {
    EXPECT_EQ(approximant_value(fam, n, 1.0), 1.0);
    EXPECT_EQ(approximant_value(fam, n, 0.0), 0.0);
    EXPECT_EQ(approximant_derivative(fam, n, 0.0), 0.0);
    EXPECT_EQ(approximant_zone(fam, n, 0.5 / n), Zone::outer);
    EXPECT_EQ(approximant_zone(fam, n, 0.25 / n), Zone::inner);
    EXPECT_EQ(approximant_zone(fam, n, 0.3 / n), Zone::annulus);
  }
  // Left of the ReLU kink the linearization and the function coincide.
  EXPECT_EQ(approximant_value(fam, 2, -0.2), 0.0);
  EXPECT_THROW(approximant_value(fam, 0, 0.0), std::invalid_argument);
}

TEST(Approximant, MatchesIndependentFormula) {
  const auto act = leaky_relu(0.1);
  const ApproximantFamily fam(act, smoothstep());
  const OracleApproximant o{0.0, 0.1, 0.5, [&](double x) { return act.value(x); },
                            [&](double x) { return act.offkink_derivative(x); }, cubic, dcubic};
  for (long n : {1L, 3L, 8L}) {
    for (int i = -400; i <= 400; ++i) {
      const double x = i / 400.0;
      EXPECT_NEAR(approximant_value(fam, n, x), o.value(n, x), 1e-15);
      EXPECT_NEAR(approximant_derivative(fam, n, x), o.derivative(n, x), 1e-12);
    }
  }
}

TEST(Approximant, C1AcrossPatchBoundaries) {
  for (const auto& act : builtins()) {
    for (const auto& eta : {smoothstep(), bump_blend()}) {
      const ApproximantFamily fam(act, eta);
      for (long n = 1; n <= 1024; n *= 2) {
        const double h = 1e-4 * fam.delta() / (2.0 * n);
        for (double b : patch_boundaries(fam, n)) {
          auto f = [&](double x) { return approximant_value(fam, n, x); };
          const double right = (-3 * f(b) + 4 * f(b + h) - f(b + 2 * h)) / (2 * h);
          const double left = (3 * f(b) - 4 * f(b - h) + f(b - 2 * h)) / (2 * h);
          EXPECT_NEAR(left, right, 1e-6) << act.kind() << " " << eta.name << " n=" << n << " b=" << b;
        }
      }
    }
  }
}

TEST(Approximant, StabilizesAwayFromKinks) {
  const ApproximantFamily fam(relu(), smoothstep());
  const auto r = validate_approximant_conditions(fam, {-0.3, 0.0, 0.01, 0.7}, 128);
  EXPECT_TRUE(r.ok());
  ASSERT_EQ(r.entries.size(), 4u);
  EXPECT_EQ(r.entries[0].index, 1L);
  EXPECT_EQ(r.entries[1].index, 1L);
  EXPECT_LE(*r.entries[2].index, 50L);
  EXPECT_GT(*r.entries[2].index, 1L);
  EXPECT_TRUE(std::isfinite(r.sup_bound));
}

TEST(Approximant, UnstabilizedWhenScheduleTooShort) {
  const ApproximantFamily fam(relu(), smoothstep());
  const auto r = validate_approximant_conditions(fam, {0.01}, 10);
  EXPECT_FALSE(r.ok());
}

TEST(ValidateActivation, BuiltinsPass) {
  for (const auto& act : builtins()) EXPECT_TRUE(validate_activation(act).ok()) << act.kind();
  EXPECT_TRUE(validate_activation(softplus()).ok());
}

TEST(ValidateActivation, WrongSideKinkValueFlagged) {
  const auto r = validate_activation(relu().with_kink_values({-1.0}));
  EXPECT_FALSE(r.one_sided_continuous);
  EXPECT_FALSE(r.ok());
  // g(0) = 1 is the right limit: valid once the side is switched.
  EXPECT_FALSE(validate_activation(relu().with_kink_values({1.0})).ok());
  EXPECT_TRUE(validate_activation(relu().with_kink_values({1.0}).with_approach_side(ApproachSide::right)).ok());
}

TEST(ValidateActivation, OscillatingFlaggedAsUnbounded) {
  const auto r = validate_activation(oscillating_activation());
  EXPECT_FALSE(r.locally_bounded);
  EXPECT_GT(r.derivative_growth, 1e3);
  EXPECT_FALSE(r.findings.empty());
}

TEST(PathologicalProbe, GrowsLikeKPi) {
  const auto samples = pathological_derivative_probe(100);
  ASSERT_EQ(samples.size(), 100u);
  for (int k = 1; k <= 100; ++k) {
    const double expected = k * std::numbers::pi;
    EXPECT_NEAR(samples[k - 1].magnitude, expected, 1e-12 * expected);
  }
  EXPECT_THROW(pathological_derivative_probe(0), std::invalid_argument);
}

TEST(CustomPwl, InterpolatesKnots) {
  const auto act = custom_pwl({{-0.5, 0.0}, {0.0, 0.25}, {1.0, 0.5}}, 0.1, 2.0);
  EXPECT_EQ(act.kinks().size(), 3u);
  EXPECT_DOUBLE_EQ(act.value(-0.25), 0.125);
  EXPECT_DOUBLE_EQ(act.value(2.0), 2.5);
  EXPECT_DOUBLE_EQ(act.value(-1.5), -0.1);
  EXPECT_EQ(act.kink_values(), (std::vector<double>{0.1, 0.5, 0.25}));
}
