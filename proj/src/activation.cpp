#include "gengrad/activation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gengrad {

KinkSet::KinkSet(std::vector<double> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw std::invalid_argument("kink points must be finite");
    if (i > 0 && !(points_[i - 1] < points_[i]))
      throw std::invalid_argument("kink points must be strictly increasing");
  }
}

std::optional<std::size_t> KinkSet::find(double x) const {
  auto it = std::lower_bound(points_.begin(), points_.end(), x);
  if (it != points_.end() && *it == x) return static_cast<std::size_t>(it - points_.begin());
  return std::nullopt;
}

double KinkSet::distance(double x) const {
  double best = std::numeric_limits<double>::infinity();
  for (double p : points_) best = std::min(best, std::abs(x - p));
  return best;
}

double half_gap(const KinkSet& kinks) {
  double m = 1.0;
  const auto& p = kinks.points();
  // Sorted, so the minimal pairwise distance is between neighbours.
  for (std::size_t i = 1; i < p.size(); ++i) m = std::min(m, p[i] - p[i - 1]);
  return 0.5 * m;
}

namespace {

std::size_t closest_index(const std::vector<double>& p, double x) {
  auto it = std::lower_bound(p.begin(), p.end(), x);
  if (it == p.begin()) return 0;
  if (it == p.end()) return p.size() - 1;
  const auto hi = static_cast<std::size_t>(it - p.begin());
  return (std::abs(x - p[hi - 1]) <= std::abs(p[hi] - x)) ? hi - 1 : hi;
}

}  // namespace

std::size_t nearest_kink_index(const KinkSet& kinks, double x) {
  if (kinks.empty()) throw std::domain_error("nearest_kink_index: empty kink set");
  const std::size_t i = closest_index(kinks.points(), x);
  if (!(std::abs(x - kinks[i]) < half_gap(kinks)))
    throw std::domain_error("nearest_kink_index: point outside the delta-neighbourhood of S");
  return i;
}

PiecewiseActivation::PiecewiseActivation(ActivationParams params, ScalarFn value,
                                         ScalarFn offkink_derivative, KinkSet kinks,
                                         std::vector<double> kink_values, ApproachSide side)
    : params_(std::move(params)),
      value_(std::move(value)),
      derivative_(std::move(offkink_derivative)),
      kinks_(std::move(kinks)),
      kink_values_(std::move(kink_values)),
      side_(side) {
  if (kink_values_.size() != kinks_.size())
    throw std::invalid_argument("one kink value per kink point required");
}

PiecewiseActivation PiecewiseActivation::with_kink_values(std::vector<double> kink_values) const {
  return PiecewiseActivation(params_, value_, derivative_, kinks_, std::move(kink_values), side_);
}

PiecewiseActivation PiecewiseActivation::with_approach_side(ApproachSide side) const {
  return PiecewiseActivation(params_, value_, derivative_, kinks_, kink_values_, side);
}

double generalized_derivative(const PiecewiseActivation& act, double x) {
  if (auto i = act.kinks().find(x)) return act.kink_values()[*i];
  return act.offkink_derivative(x);
}

namespace {

ActivationParams named(const char* kind, double gamma = 0.0) {
  ActivationParams p;
  p.kind = kind;
  p.gamma = gamma;
  return p;
}

}  // namespace

PiecewiseActivation relu() {
  return PiecewiseActivation(named("relu"), [](double x) { return x > 0.0 ? x : 0.0; },
                             [](double x) { return x > 0.0 ? 1.0 : 0.0; }, KinkSet({0.0}), {0.0},
                             ApproachSide::left);
}

PiecewiseActivation leaky_relu(double gamma) {
  return PiecewiseActivation(named("leaky_relu", gamma),
                             [gamma](double x) { return x > 0.0 ? x : gamma * x; },
                             [gamma](double x) { return x > 0.0 ? 1.0 : gamma; }, KinkSet({0.0}),
                             {gamma}, ApproachSide::left);
}

PiecewiseActivation abs_activation(double kink_value) {
  const ApproachSide side = kink_value == 1.0 ? ApproachSide::right : ApproachSide::left;
  return PiecewiseActivation(named("abs"), [](double x) { return std::abs(x); },
                             [](double x) { return x > 0.0 ? 1.0 : -1.0; }, KinkSet({0.0}),
                             {kink_value}, side);
}

PiecewiseActivation hard_tanh() {
  return PiecewiseActivation(named("hard_tanh"),
                             [](double x) { return std::clamp(x, -1.0, 1.0); },
                             [](double x) { return (x > -1.0 && x < 1.0) ? 1.0 : 0.0; },
                             KinkSet({-1.0, 1.0}), {0.0, 1.0}, ApproachSide::left);
}

PiecewiseActivation custom_pwl(std::vector<std::pair<double, double>> knots, double left_slope,
                               double right_slope, std::vector<double> kink_values,
                               ApproachSide side) {
  if (knots.empty()) throw std::invalid_argument("custom_pwl: at least one knot required");
  std::vector<double> xs;
  std::vector<double> slopes;  // slopes[i] is the slope left of knot i; slopes[size] right of last
  slopes.push_back(left_slope);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    xs.push_back(knots[i].first);
    if (i + 1 < knots.size()) {
      const double dx = knots[i + 1].first - knots[i].first;
      if (!(dx > 0.0)) throw std::invalid_argument("custom_pwl: knots must be strictly increasing");
      slopes.push_back((knots[i + 1].second - knots[i].second) / dx);
    }
  }
  slopes.push_back(right_slope);
  KinkSet kinks(xs);
  if (kink_values.empty()) {
    for (std::size_t i = 0; i < knots.size(); ++i)
      kink_values.push_back(side == ApproachSide::left ? slopes[i] : slopes[i + 1]);
  }
  auto value = [knots, slopes](double x) {
    if (x <= knots.front().first) return knots.front().second + slopes.front() * (x - knots.front().first);
    if (x >= knots.back().first) return knots.back().second + slopes.back() * (x - knots.back().first);
    auto it = std::upper_bound(knots.begin(), knots.end(), x,
                               [](double v, const auto& k) { return v < k.first; });
    const auto hi = static_cast<std::size_t>(it - knots.begin());
    return knots[hi - 1].second + slopes[hi] * (x - knots[hi - 1].first);
  };
  auto deriv = [xs, slopes](double x) {
    const auto idx = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    return slopes[idx];
  };
  ActivationParams params{.kind = "custom_pwl",
                          .knots = knots,
                          .left_slope = left_slope,
                          .right_slope = right_slope};
  return PiecewiseActivation(std::move(params), value, deriv, std::move(kinks),
                             std::move(kink_values), side);
}

PiecewiseActivation softplus() {
  return PiecewiseActivation(
      named("softplus"),
      [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
      [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, KinkSet{}, {}, ApproachSide::left);
}

PiecewiseActivation oscillating_activation() {
  return PiecewiseActivation(
      named("xsin"), [](double x) { return x > 0.0 ? x * std::sin(1.0 / x) : 0.0; },
      [](double x) { return x > 0.0 ? std::sin(1.0 / x) - std::cos(1.0 / x) / x : 0.0; },
      KinkSet({0.0}), {0.0}, ApproachSide::left);
}

// ---------------------------------------------------------------------------
// Blending functions

namespace {

double smoothstep_value(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * (3.0 - 2.0 * t);
}

double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 6.0 * t * (1.0 - t);
}

double bump_value(double t) {
  if (t <= 0.0 || t >= 2.0) return 0.0;
  const double q = t * (2.0 - t);  // 1 - (t-1)^2 without cancellation
  return std::exp(1.0 - 1.0 / q);
}

double bump_derivative(double t) {
  if (t <= 0.0 || t >= 2.0) return 0.0;
  const double q = t * (2.0 - t);
  return bump_value(t) * (2.0 - 2.0 * t) / (q * q);
}

}  // namespace

BlendingFunction smoothstep() { return {"smoothstep", &smoothstep_value, &smoothstep_derivative}; }

BlendingFunction bump_blend() { return {"bump", &bump_value, &bump_derivative}; }

BlendingFunction blending_by_name(const std::string& name) {
  if (name == "smoothstep") return smoothstep();
  if (name == "bump") return bump_blend();
  throw std::invalid_argument("unknown blending function: " + name);
}

BlendingReport validate_blending(const BlendingFunction& eta, std::size_t grid_points) {
  BlendingReport r;
  r.worst_boundary_error = std::max({std::abs(eta.value(0.0)), std::abs(eta.value(1.0) - 1.0),
                                     std::abs(eta.derivative(0.0)), std::abs(eta.derivative(1.0))});
  r.boundary_ok = r.worst_boundary_error <= 1e-12;
  r.range_ok = true;
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_points + 1);
    const double v = eta.value(t);
    if (!(v >= 0.0 && v <= 1.0)) r.range_ok = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Approximants

ApproximantFamily::ApproximantFamily(PiecewiseActivation base, BlendingFunction eta)
    : base_(std::move(base)), eta_(std::move(eta)), delta_(half_gap(base_.kinks())) {}

namespace {

struct ZoneInfo {
  Zone zone = Zone::outer;
  std::size_t kink = 0;
  double dist = 0.0;
};

ZoneInfo locate(const ApproximantFamily& fam, long n, double x) {
  if (n < 1) throw std::invalid_argument("approximant index n must be >= 1");
  ZoneInfo z;
  const auto& p = fam.base().kinks().points();
  if (p.empty()) return z;
  z.kink = closest_index(p, x);
  z.dist = std::abs(x - p[z.kink]);
  const double outer = fam.delta() / static_cast<double>(n);
  const double inner = fam.delta() / (2.0 * static_cast<double>(n));
  if (z.dist >= outer) {
    z.zone = Zone::outer;
  } else if (z.dist <= inner) {
    z.zone = Zone::inner;
  } else {
    z.zone = Zone::annulus;
  }
  return z;
}

double blend_parameter(const ApproximantFamily& fam, long n, double dist) {
  return (2.0 * static_cast<double>(n) * dist - fam.delta()) / fam.delta();
}

}  // namespace

Zone approximant_zone(const ApproximantFamily& fam, long n, double x) {
  return locate(fam, n, x).zone;
}

double approximant_value(const ApproximantFamily& fam, long n, double x) {
  const ZoneInfo z = locate(fam, n, x);
  const auto& act = fam.base();
  if (z.zone == Zone::outer) return act.value(x);
  const double y = act.kinks()[z.kink];
  const double gamma = act.kink_values()[z.kink];
  const double lin = gamma * (x - y) + act.value(y);
  if (z.zone == Zone::inner) return lin;
  const double eta = fam.eta().value(blend_parameter(fam, n, z.dist));
  return (1.0 - eta) * lin + eta * act.value(x);
}

double approximant_derivative(const ApproximantFamily& fam, long n, double x) {
  const ZoneInfo z = locate(fam, n, x);
  const auto& act = fam.base();
  if (z.zone == Zone::outer) return generalized_derivative(act, x);
  const double gamma = act.kink_values()[z.kink];
  if (z.zone == Zone::inner) return gamma;
  const double y = act.kinks()[z.kink];
  const double t = blend_parameter(fam, n, z.dist);
  const double eta = fam.eta().value(t);
  const double deta = fam.eta().derivative(t);
  const double side = x > y ? 1.0 : -1.0;
  const double gap = act.value(x) - act.value(y) - gamma * (x - y);
  return (2.0 * static_cast<double>(n) / fam.delta()) * side * deta * gap + (1.0 - eta) * gamma +
         act.offkink_derivative(x) * eta;
}

std::vector<double> patch_boundaries(const ApproximantFamily& fam, long n) {
  std::vector<double> out;
  const double outer = fam.delta() / static_cast<double>(n);
  const double inner = fam.delta() / (2.0 * static_cast<double>(n));
  for (double y : fam.base().kinks().points()) {
    out.insert(out.end(), {y - outer, y - inner, y + inner, y + outer});
  }
  return out;
}

StabilizationReport validate_approximant_conditions(const ApproximantFamily& fam,
                                                    const std::vector<double>& grid, long n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  StabilizationReport report;
  report.n_max = n_max;
  const auto& act = fam.base();
  for (double x : grid) {
    StabilizationEntry e;
    e.x = x;
    const double a = act.value(x);
    const double da = generalized_derivative(act, x);
    long last_mismatch = 0;
    for (long n = 1; n <= n_max; ++n) {
      const double v = approximant_value(fam, n, x);
      const double d = approximant_derivative(fam, n, x);
      e.sup_value = std::max(e.sup_value, std::abs(v));
      e.sup_derivative = std::max(e.sup_derivative, std::abs(d));
      report.sup_bound = std::max(report.sup_bound, std::abs(v) + std::abs(d));
      if (v != a || d != da) last_mismatch = n;
    }
    if (last_mismatch < n_max) {
      e.index = last_mismatch + 1;
    } else {
      report.unstabilized.push_back(x);
    }
    report.entries.push_back(e);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Hypothesis checks

ActivationReport validate_activation(const PiecewiseActivation& act, double m) {
  ActivationReport r;
  const auto& kinks = act.kinks();
  const double delta = half_gap(kinks);
  const int z = approach_sign(act.approach_side());
  auto finding = [&r](const std::string& msg, double where) {
    std::ostringstream os;
    os << msg << " at x=" << where;
    r.findings.push_back(os.str());
  };

  for (std::size_t i = 0; i < kinks.size(); ++i) {
    const double y = kinks[i];
    const double ay = act.value(y);
    const double gy = act.kink_values()[i];
    double jump = 0.0;
    double side_gap = 0.0;
    for (int j = 30; j <= 40; ++j) {
      const double h = std::ldexp(1.0, -j);
      jump = std::max({jump, std::abs(act.value(y + h) - ay), std::abs(act.value(y - h) - ay)});
      side_gap = std::max(side_gap, std::abs(generalized_derivative(act, y + z * h) - gy));
    }
    if (!(jump <= 1e-6 * std::max(1.0, std::abs(ay)))) {
      r.continuous = false;
      finding("activation value jumps", y);
    }
    if (!(side_gap <= 1e-6 * std::max(1.0, std::abs(gy)))) {
      r.one_sided_continuous = false;
      finding("kink value is not the one-sided derivative limit on the stored side", y);
    }
  }

  const int grid = 2001;
  double coarse_sup = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = (-m * (grid - 1 - i) + m * i) / (grid - 1);
    if (kinks.distance(x) < 0.25 * delta) continue;
    const double a = act.offkink_derivative(x);
    const double h = 1e-6 * std::max(1.0, std::abs(x));
    const double fd = (act.value(x + h) - act.value(x - h)) / (2.0 * h);
    if (!std::isfinite(a) || !(std::abs(fd - a) <= 1e-5 * std::max(1.0, std::abs(a)))) {
      if (r.derivative_consistent) finding("off-kink derivative disagrees with finite differences", x);
      r.derivative_consistent = false;
    }
    coarse_sup = std::max(coarse_sup, std::abs(a));
  }

  // Sup of |a| over shrinking bands around each kink against the coarse scale.
  double fine_sup = 0.0;
  bool finite = true;
  for (double y : kinks.points()) {
    for (double g : act.kink_values()) coarse_sup = std::max(coarse_sup, std::abs(g));
    for (int j = 1; j <= 45; ++j) {
      for (int s = 0; s < 16; ++s) {
        const double h = std::ldexp(1.0 + s / 16.0, -j) * delta;
        for (double x : {y - h, y + h}) {
          const double a = act.offkink_derivative(x);
          if (!std::isfinite(a)) finite = false;
          if (j <= 4) {
            coarse_sup = std::max(coarse_sup, std::abs(a));
          } else {
            fine_sup = std::max(fine_sup, std::abs(a));
          }
        }
      }
    }
  }
  r.derivative_growth = fine_sup / std::max(coarse_sup, 1.0);
  if (!finite || r.derivative_growth > 1e3) {
    r.locally_bounded = false;
    std::ostringstream os;
    os << "off-kink derivative is not locally bounded (growth factor " << r.derivative_growth
       << " towards the kinks)";
    r.findings.push_back(os.str());
  }
  return r;
}

std::vector<DerivativeSample> pathological_derivative_probe(int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const auto act = oscillating_activation();
  std::vector<DerivativeSample> out;
  for (int k = 1; k <= k_max; ++k) {
    const double x = 1.0 / (k * std::numbers::pi);
    out.push_back({x, std::abs(act.offkink_derivative(x))});
  }
  return out;
}

}  // namespace gengrad
