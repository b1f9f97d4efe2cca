#ifndef GENGRAD_ACTIVATION_HPP_
#define GENGRAD_ACTIVATION_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gengrad {

using ScalarFn = std::function<double(double)>;

/// Strictly increasing finite set of kink points.
class KinkSet {
 public:
  KinkSet() = default;
  /// Throws std::invalid_argument unless the points are finite and strictly increasing.
  explicit KinkSet(std::vector<double> points);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  double operator[](std::size_t i) const { return points_[i]; }

  /// Index of x in the set when x is exactly a kink.
  std::optional<std::size_t> find(double x) const;
  /// Distance from x to the closest kink (+inf for the empty set).
  double distance(double x) const;

 private:
  std::vector<double> points_;
};

/// delta = 1/2 min({|v - w| : v != w in S} u {1}).
double half_gap(const KinkSet& kinks);

/// Unique nearest kink for x in O_delta; throws std::domain_error outside.
std::size_t nearest_kink_index(const KinkSet& kinks, double x);

enum class ApproachSide { left, right };

/// -1 for left, +1 for right.
inline int approach_sign(ApproachSide side) { return side == ApproachSide::left ? -1 : 1; }

/// Constructor parameters of the built-in activations, kept for serialization.
struct ActivationParams {
  std::string kind;  // relu | leaky_relu | abs | hard_tanh | custom_pwl | softplus | xsin
  double gamma = 0.0;
  std::vector<std::pair<double, double>> knots;
  double left_slope = 0.0;
  double right_slope = 0.0;
};

/// Continuous activation that is C^1 off a finite kink set, together with the
/// prescribed derivative values on the kinks.
class PiecewiseActivation {
 public:
  PiecewiseActivation(ActivationParams params, ScalarFn value, ScalarFn offkink_derivative,
                      KinkSet kinks, std::vector<double> kink_values, ApproachSide side);

  double value(double x) const { return value_(x); }
  double offkink_derivative(double x) const { return derivative_(x); }
  const KinkSet& kinks() const { return kinks_; }
  const std::vector<double>& kink_values() const { return kink_values_; }
  ApproachSide approach_side() const { return side_; }
  const ActivationParams& params() const { return params_; }
  const std::string& kind() const { return params_.kind; }

  /// Same function with a different kink-value map.
  PiecewiseActivation with_kink_values(std::vector<double> kink_values) const;
  PiecewiseActivation with_approach_side(ApproachSide side) const;

 private:
  ActivationParams params_;
  ScalarFn value_;
  ScalarFn derivative_;
  KinkSet kinks_;
  std::vector<double> kink_values_;
  ApproachSide side_;
};

/// d_g A: the off-kink derivative away from S and the kink value on S.
double generalized_derivative(const PiecewiseActivation& act, double x);

// Built-ins. Kink values default to the one-sided derivative limit on the
// stored approach side.
PiecewiseActivation relu();
PiecewiseActivation leaky_relu(double gamma);
PiecewiseActivation abs_activation(double kink_value = -1.0);
/// clamp(x, -1, 1); kinks at -1 and 1.
PiecewiseActivation hard_tanh();
/// Continuous piecewise-linear interpolant of `knots` (x strictly increasing)
/// with linear extension by the given end slopes. Every knot is a kink.
/// Empty `kink_values` selects the one-sided slope on `side`.
PiecewiseActivation custom_pwl(std::vector<std::pair<double, double>> knots, double left_slope,
                               double right_slope, std::vector<double> kink_values = {},
                               ApproachSide side = ApproachSide::left);
/// log(1 + e^x); empty kink set.
PiecewiseActivation softplus();
/// x sin(1/x) for x > 0 and 0 otherwise. Continuous, but the derivative is
/// unbounded near 0.
PiecewiseActivation oscillating_activation();

/// Blending ramp eta with eta(0) = eta'(0) = eta'(1) = 0 and eta(1) = 1.
struct BlendingFunction {
  std::string name;
  double (*value)(double);
  double (*derivative)(double);
};

/// 3t^2 - 2t^3 on [0,1], clamped outside.
BlendingFunction smoothstep();
/// exp(1 - 1/(1 - (t-1)^2)) on (0,2), 0 elsewhere.
BlendingFunction bump_blend();
/// Looks up "smoothstep" or "bump"; throws std::invalid_argument otherwise.
BlendingFunction blending_by_name(const std::string& name);

struct BlendingReport {
  bool boundary_ok = false;
  bool range_ok = false;
  double worst_boundary_error = 0.0;
  bool ok() const { return boundary_ok && range_ok; }
};

BlendingReport validate_blending(const BlendingFunction& eta, std::size_t grid_points = 10000);

enum class Zone { outer, annulus, inner };

/// Sequence of C^1 approximants G_n: the activation itself away from the kinks,
/// the kink linearization g(y)(x - y) + A(y) within delta/(2n) of a kink y,
/// and an eta-blend of the two in between.
class ApproximantFamily {
 public:
  ApproximantFamily(PiecewiseActivation base, BlendingFunction eta);

  const PiecewiseActivation& base() const { return base_; }
  const BlendingFunction& eta() const { return eta_; }
  double delta() const { return delta_; }

 private:
  PiecewiseActivation base_;
  BlendingFunction eta_;
  double delta_;
};

Zone approximant_zone(const ApproximantFamily& fam, long n, double x);
double approximant_value(const ApproximantFamily& fam, long n, double x);
double approximant_derivative(const ApproximantFamily& fam, long n, double x);

/// The four patch boundaries y -+ delta/n, y -+ delta/(2n) for every kink, sorted.
std::vector<double> patch_boundaries(const ApproximantFamily& fam, long n);

struct StabilizationEntry {
  double x = 0.0;
  std::optional<long> index;  // smallest m with G_n(x), G_n'(x) exact for all tested n >= m
  double sup_value = 0.0;     // sup_n |G_n(x)|
  double sup_derivative = 0.0;
};

struct StabilizationReport {
  long n_max = 0;
  std::vector<StabilizationEntry> entries;
  double sup_bound = 0.0;  // sup over n and grid of |G_n| + |G_n'|
  std::vector<double> unstabilized;
  bool ok() const { return unstabilized.empty(); }
};

StabilizationReport validate_approximant_conditions(const ApproximantFamily& fam,
                                                    const std::vector<double>& grid, long n_max);

/// Sampled checks of the hypotheses placed on the activation.
struct ActivationReport {
  bool continuous = true;
  bool derivative_consistent = true;
  bool one_sided_continuous = true;
  bool locally_bounded = true;
  double derivative_growth = 1.0;  // sup |a| near kinks over sup |a| at coarse scale
  std::vector<std::string> findings;
  bool ok() const {
    return continuous && derivative_consistent && one_sided_continuous && locally_bounded;
  }
};

ActivationReport validate_activation(const PiecewiseActivation& act, double m = 4.0);

struct DerivativeSample {
  double x = 0.0;
  double magnitude = 0.0;
};

/// |g'(x_k)| of x sin(1/x) at x_k = 1/(k pi), k = 1..k_max, evaluated from the
/// derivative formula.
std::vector<DerivativeSample> pathological_derivative_probe(int k_max);

}  // namespace gengrad

#endif  // GENGRAD_ACTIVATION_HPP_
