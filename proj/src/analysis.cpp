#include "gengrad/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gengrad/random.hpp"

namespace gengrad {

GradientVector fd_gradient(const std::function<double(const ParamVector&)>& f,
                           const ParamVector& theta, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  GradientVector g(theta.size());
  ParamVector p = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    p(i) = theta(i) + h;
    const double up = f(p);
    p(i) = theta(i) - h;
    const double down = f(p);
    p(i) = theta(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------

std::vector<long> doubling_schedule(int max_power) {
  std::vector<long> s;
  for (int p = 0; p <= max_power; ++p) s.push_back(1L << p);
  return s;
}

ConvergenceReport convergence_experiment(const ParamVector& theta, const Architecture& arch,
                                         const EmpiricalMeasure& measure, const LossFunction& loss,
                                         const ApproximantFamily& fam,
                                         const std::vector<long>& n_schedule) {
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    if (n_schedule[i] < 1 || (i > 0 && n_schedule[i] <= n_schedule[i - 1]))
      throw std::invalid_argument("n schedule must be positive and strictly increasing");
  }
  ConvergenceReport report;
  report.theta = theta;
  report.eta = fam.eta().name;
  report.limit = backprop_generalized(theta, arch, measure, loss, fam.base());
  report.risk = risk(theta, arch, measure, loss, fam.base());
  for (long n : n_schedule) {
    ConvergenceRecord rec;
    rec.n = n;
    rec.gradient = backprop_smoothed(theta, arch, measure, loss, fam, n);
    rec.discrepancy = (rec.gradient - report.limit).norm();
    rec.risk_gap = std::abs(risk_smoothed(theta, arch, measure, loss, fam, n) - report.risk);
    report.history.push_back(std::move(rec));
  }
  for (auto it = report.history.rbegin(); it != report.history.rend(); ++it) {
    if (it->gradient != report.limit) break;
    report.stabilization_index = it->n;
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

template <typename Visit>
void for_each_hidden_preact(const ParamVector& theta, const Architecture& arch,
                            const EmpiricalMeasure& measure, const PiecewiseActivation& act,
                            Visit&& visit) {
  for (const auto& s : measure.samples()) {
    const auto trace = forward(theta, arch, s.x, act);
    for (Index k = 1; k < arch.depth(); ++k) {
      const auto& pre = trace.preacts[static_cast<std::size_t>(k - 1)];
      for (Index i = 0; i < pre.size(); ++i) visit(pre(i));
    }
  }
}

}  // namespace

std::vector<int> kink_pattern(const ParamVector& theta, const Architecture& arch,
                              const EmpiricalMeasure& measure, const PiecewiseActivation& act) {
  std::vector<int> pattern;
  const auto& p = act.kinks().points();
  for_each_hidden_preact(theta, arch, measure, act, [&](double v) {
    const auto it = std::lower_bound(p.begin(), p.end(), v);
    const int m = static_cast<int>(it - p.begin());
    pattern.push_back((it != p.end() && *it == v) ? 2 * m + 1 : 2 * m);
  });
  return pattern;
}

double min_kink_distance(const ParamVector& theta, const Architecture& arch,
                         const EmpiricalMeasure& measure, const PiecewiseActivation& act) {
  double best = std::numeric_limits<double>::infinity();
  for_each_hidden_preact(theta, arch, measure, act,
                         [&](double v) { best = std::min(best, act.kinks().distance(v)); });
  return best;
}

std::vector<VectorXd> box_inputs(Index dim, double a, double b, std::size_t count,
                                 std::uint64_t seed) {
  std::vector<VectorXd> out;
  if (dim <= 10) {
    for (long mask = 0; mask < (1L << dim); ++mask) {
      VectorXd c(dim);
      for (Index j = 0; j < dim; ++j) c(j) = (mask >> j) & 1 ? b : a;
      out.push_back(c);
    }
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) out.push_back(rng.uniform_vector(dim, a, b));
  return out;
}

std::vector<Eigen::MatrixXd> preactivation_jacobians(const ParamVector& theta,
                                                     const Architecture& arch, const VectorXd& x,
                                                     const ScalarFn& value, const ScalarFn& deriv) {
  const auto trace = forward(theta, arch, x, value);
  std::vector<Eigen::MatrixXd> jac;
  for (Index k = 1; k <= arch.depth(); ++k) {
    Eigen::MatrixXd j(arch.width(k), arch.param_count());
    if (k == 1) {
      j.setZero();
    } else {
      const auto& pre = trace.preacts[static_cast<std::size_t>(k - 2)];
      const VectorXd d = pre.unaryExpr(deriv);
      j = weight_matrix(theta, arch, k) * d.asDiagonal() * jac.back();
    }
    const auto& in = trace.layer_input(k);
    for (Index i = 1; i <= arch.width(k); ++i) {
      for (Index c = 1; c <= arch.width(k - 1); ++c) j(i - 1, arch.weight_index(k, i, c)) += in(c - 1);
      j(i - 1, arch.bias_index(k, i)) += 1.0;
    }
    jac.push_back(std::move(j));
  }
  return jac;
}

double realization_lipschitz_estimate(const ParamVector& theta, const Architecture& arch,
                                      const PiecewiseActivation& act, double a, double b,
                                      double radius, std::size_t n_pairs, std::uint64_t seed) {
  // |N^k_i(T) - N^k_i(T')| <= ||d N^k_i / d theta||_1 max_j |T_j - T'_j|; take the
  // sup of the l1 row norms over sampled parameters near theta.
  Rng rng(seed);
  const auto inputs = box_inputs(arch.input_dim(), a, b, 16, seed + 1);
  const ScalarFn value = [&act](double v) { return act.value(v); };
  const ScalarFn deriv = [&act](double v) { return generalized_derivative(act, v); };
  double sup = 0.0;
  for (std::size_t p = 0; p <= n_pairs; ++p) {
    const ParamVector t =
        p == 0 ? theta : ParamVector(theta + rng.uniform_vector(theta.size(), -radius, radius));
    for (const auto& x : inputs) {
      for (const auto& j : preactivation_jacobians(t, arch, x, value, deriv))
        sup = std::max(sup, j.cwiseAbs().rowwise().sum().maxCoeff());
    }
  }
  return sup;
}

ApproachSequence left_approach_sequence(const ParamVector& theta, const Architecture& arch,
                                        double a, double b, const std::vector<double>& epsilons,
                                        const PiecewiseActivation& act, std::uint64_t seed) {
  if (!(std::isfinite(a) && std::isfinite(b) && a <= b))
    throw std::invalid_argument("input box must be a non-empty finite interval");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw std::invalid_argument("epsilons must be positive");
  }
  ApproachSequence out;
  out.direction = -approach_sign(act.approach_side());
  out.epsilons = epsilons;
  const double d = static_cast<double>(arch.param_count());
  const double eps_max = epsilons.empty() ? 1.0 : *std::max_element(epsilons.begin(), epsilons.end());
  const double estimate = realization_lipschitz_estimate(theta, arch, act, a, b, eps_max / d, 64, seed);
  out.lipschitz = 2.0 * estimate;
  if (!std::isfinite(out.lipschitz)) throw std::runtime_error("Lipschitz estimate is not finite");

  const double l0 = static_cast<double>(arch.input_dim());
  out.layer_constants.push_back(std::max({l0 * std::abs(a), l0 * std::abs(b), 1.0}));
  for (Index k = 2; k <= arch.depth(); ++k)
    out.layer_constants.push_back(2.0 * out.layer_constants.back() * std::max(1.0, out.lipschitz));
  const double c_last = out.layer_constants.back();

  for (double eps : epsilons) {
    const double step = std::min(1.0, eps / (2.0 * c_last * d));
    ParamVector v = theta;
    for (Index k = 1; k <= arch.depth(); ++k) {
      const double shift = 1.5 * out.layer_constants[static_cast<std::size_t>(k - 1)] * step;
      for (Index i = 1; i <= arch.width(k); ++i) v(arch.bias_index(k, i)) -= out.direction * shift;
    }
    out.sequence.push_back(std::move(v));
  }
  return out;
}

double approach_sign_excess(const ParamVector& theta, const ParamVector& vartheta,
                            const Architecture& arch, const PiecewiseActivation& act, int direction,
                            const std::vector<VectorXd>& inputs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& x : inputs) {
    const auto t0 = forward(theta, arch, x, act);
    const auto t1 = forward(vartheta, arch, x, act);
    for (std::size_t k = 0; k < t0.preacts.size(); ++k)
      worst = std::max(worst, (direction * (t1.preacts[k] - t0.preacts[k])).maxCoeff());
  }
  return worst;
}

std::vector<FrechetSample> frechet_quotients(const std::function<double(const ParamVector&)>& f,
                                             const ParamVector& theta, const GradientVector& g,
                                             std::size_t n_dirs, const std::vector<double>& radii,
                                             const std::function<bool(const ParamVector&)>& same_region,
                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VectorXd> dirs;
  for (std::size_t i = 0; i < n_dirs; ++i) dirs.push_back(rng.unit_direction(theta.size()));
  const double f0 = f(theta);
  std::vector<FrechetSample> out;
  for (double r : radii) {
    FrechetSample s;
    s.radius = r;
    s.effective_radius = r;
    s.min_quotient = std::numeric_limits<double>::infinity();
    for (const auto& u : dirs) {
      double re = r;
      for (int halvings = 0; halvings < 60 && !same_region(theta + re * u); ++halvings) re *= 0.5;
      const double q = (f(theta + re * u) - f0 - re * g.dot(u)) / re;
      s.min_quotient = std::min(s.min_quotient, q);
      s.effective_radius = std::min(s.effective_radius, re);
    }
    // Allowance for cancellation in f(theta + r u) - f(theta).
    s.tolerance = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0)) /
                  s.effective_radius;
    out.push_back(s);
  }
  return out;
}

bool SubgradientWitness::distances_decreasing() const {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (!(steps[i].distance < steps[i - 1].distance)) return false;
  }
  return true;
}

namespace {

std::vector<double> hidden_generalized_derivatives(const ParamVector& theta,
                                                   const Architecture& arch,
                                                   const EmpiricalMeasure& measure,
                                                   const PiecewiseActivation& act) {
  std::vector<double> out;
  for_each_hidden_preact(theta, arch, measure, act,
                         [&](double v) { out.push_back(generalized_derivative(act, v)); });
  return out;
}

// Per-coordinate difference quotient that never leaves the kink region of
// theta: central when both sides stay, otherwise second-order one-sided
// towards the side that stays. Returns the gradient and the smallest step used.
std::pair<GradientVector, double> region_fd_gradient(
    const std::function<double(const ParamVector&)>& f, const ParamVector& theta,
    const std::vector<int>& pattern,
    const std::function<std::vector<int>(const ParamVector&)>& pattern_of) {
  GradientVector g(theta.size());
  double smallest = 1e-6;
  const double f0 = f(theta);
  ParamVector p = theta;
  auto at = [&](Index i, double s) {
    p(i) = theta(i) + s;
    const bool same = pattern_of(p) == pattern;
    const double v = same ? f(p) : 0.0;
    p(i) = theta(i);
    return std::pair{same, v};
  };
  for (Index i = 0; i < theta.size(); ++i) {
    double h = 1e-6;
    bool done = false;
    for (int attempt = 0; attempt < 80 && !done; ++attempt, h *= 0.5) {
      const auto [up_ok, up] = at(i, h);
      const auto [down_ok, down] = at(i, -h);
      if (up_ok && down_ok) {
        g(i) = (up - down) / (2.0 * h);
        done = true;
        break;
      }
      for (double s : {h, -h}) {
        const auto [ok1, v1] = at(i, s);
        const auto [ok2, v2] = at(i, 2.0 * s);
        if (ok1 && ok2) {
          g(i) = (-3.0 * f0 + 4.0 * v1 - v2) / (2.0 * s);
          done = true;
          break;
        }
      }
      if (done) break;
    }
    smallest = std::min(smallest, h);
  }
  return {g, smallest};
}

long stabilizing_index(const ApproximantFamily& fam, double kink_distance) {
  if (!(kink_distance > 0.0) || !std::isfinite(kink_distance)) return 1;
  const double n = std::ceil(2.0 * fam.delta() / kink_distance);
  return static_cast<long>(std::min(n, 1e15));
}

std::string describe(const char* what, std::size_t step, double value) {
  std::ostringstream os;
  os << what << " at step " << step << " (" << value << ")";
  return os.str();
}

}  // namespace

SubgradientWitness limiting_subgradient_check(const ParamVector& theta, const Architecture& arch,
                                              const EmpiricalMeasure& measure,
                                              const LossFunction& loss,
                                              const PiecewiseActivation& act,
                                              const ApproximantFamily& fam, std::size_t n_dirs,
                                              const std::vector<double>& radii,
                                              const WitnessOptions& options) {
  if (n_dirs < 1) throw std::invalid_argument("n_dirs must be >= 1");
  if (radii.empty()) throw std::invalid_argument("at least one radius required");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1])))
      throw std::invalid_argument("radii must be positive and strictly decreasing");
  }
  measure.check_compatible(arch);

  SubgradientWitness w;
  w.theta = theta;
  w.seed = options.seed;
  w.gradient = backprop_generalized(theta, arch, measure, loss, act);

  const auto f = [&](const ParamVector& p) { return risk(p, arch, measure, loss, act); };
  const auto pattern_of = [&](const ParamVector& p) { return kink_pattern(p, arch, measure, act); };

  const auto base_pattern = pattern_of(theta);
  w.smooth_at_theta = std::none_of(base_pattern.begin(), base_pattern.end(),
                                   [](int c) { return c % 2 == 1; });
  if (w.smooth_at_theta) {
    w.frechet_at_theta =
        frechet_quotients(f, theta, w.gradient, n_dirs, radii,
                          [&](const ParamVector& p) { return pattern_of(p) == base_pattern; },
                          options.seed);
    const auto& last = w.frechet_at_theta.back();
    w.frechet_at_theta_ok = last.min_quotient >= -(options.frechet_tolerance + last.tolerance);
    if (!w.frechet_at_theta_ok) w.findings.push_back("G(theta) fails the Frechet quotient test");
  }

  auto [a, b] = measure.input_box();
  std::vector<double> eps;
  for (int k = 0; k < 200; ++k) eps.push_back(std::ldexp(options.initial_epsilon, -k));
  auto approach = left_approach_sequence(theta, arch, a, b, eps, act, options.seed);
  w.direction = approach.direction;

  const auto inputs = box_inputs(arch.input_dim(), a, b, options.sign_inputs, options.seed);
  const auto dg_theta = hidden_generalized_derivatives(theta, arch, measure, act);

  for (std::size_t s = 0; s < approach.sequence.size(); ++s) {
    WitnessStep st;
    st.epsilon = eps[s];
    st.theta = approach.sequence[s];
    st.distance = (st.theta - theta).norm();
    st.gradient = backprop_generalized(st.theta, arch, measure, loss, act);
    st.grad_gap = (st.gradient - w.gradient).norm();

    const auto pattern = pattern_of(st.theta);
    const auto [fd, fd_step] = region_fd_gradient(f, st.theta, pattern, pattern_of);
    st.fd_step = fd_step;
    st.fd_discrepancy = (fd - st.gradient).norm() / std::max(1.0, st.gradient.norm());
    st.sign_excess = approach_sign_excess(theta, st.theta, arch, act, w.direction, inputs);

    const auto dg = hidden_generalized_derivatives(st.theta, arch, measure, act);
    for (std::size_t i = 0; i < dg.size(); ++i)
      st.derivative_gap = std::max(st.derivative_gap, std::abs(dg[i] - dg_theta[i]));

    const long n_big = stabilizing_index(fam, min_kink_distance(st.theta, arch, measure, act));
    st.smoothed_limit_agrees =
        backprop_smoothed(st.theta, arch, measure, loss, fam, n_big) == st.gradient;

    st.frechet = frechet_quotients(
        f, st.theta, st.gradient, n_dirs, radii,
        [&](const ParamVector& p) { return pattern_of(p) == pattern; }, options.seed + s + 1);
    const auto& last = st.frechet.back();
    st.frechet_ok = last.min_quotient >= -(options.frechet_tolerance + last.tolerance);

    if (st.fd_discrepancy > options.fd_tolerance)
      w.findings.push_back(describe("finite differences disagree with G", s, st.fd_discrepancy));
    if (st.sign_excess > 0.0)
      w.findings.push_back(describe("pre-activation moved against the approach side", s, st.sign_excess));
    if (!st.smoothed_limit_agrees)
      w.findings.push_back(describe("smoothed gradient limit differs from G", s, st.grad_gap));
    if (!st.frechet_ok)
      w.findings.push_back(describe("Frechet quotient below tolerance", s, last.min_quotient));

    const bool done = st.distance <= options.final_distance && st.grad_gap <= options.gap_tolerance;
    w.steps.push_back(std::move(st));
    if (done) break;
  }

  if (!w.distances_decreasing()) w.findings.push_back("witness distances are not strictly decreasing");
  if (w.steps.empty() || w.steps.back().distance > options.final_distance)
    w.findings.push_back("witness sequence did not reach the final distance");
  if (!w.steps.empty() && w.steps.back().grad_gap > options.gap_tolerance)
    w.findings.push_back(describe("G does not converge along the witness", w.steps.size() - 1,
                                  w.steps.back().grad_gap));
  return w;
}

// ---------------------------------------------------------------------------

SmoothRegionReport smooth_region_agreement(const ParamVector& theta, const Architecture& arch,
                                           const EmpiricalMeasure& measure,
                                           const LossFunction& loss, const PiecewiseActivation& act,
                                           double h) {
  SmoothRegionReport r;
  r.min_kink_distance = min_kink_distance(theta, arch, measure, act);
  r.required_margin = 10.0 * h * std::max(1.0, theta.norm());
  r.margin_ok = r.min_kink_distance >= r.required_margin;
  if (!r.margin_ok) {
    std::ostringstream os;
    os << "kink margin " << r.min_kink_distance << " below " << r.required_margin
       << "; finite differences may straddle a kink";
    r.warning = os.str();
  }
  const auto g = backprop_generalized(theta, arch, measure, loss, act);
  const auto fd = fd_gradient([&](const ParamVector& p) { return risk(p, arch, measure, loss, act); },
                              theta, h);
  r.discrepancy = (fd - g).norm() / std::max(1.0, g.norm());
  return r;
}

LipschitzReport lipschitz_probe(const Architecture& arch, const EmpiricalMeasure& measure,
                                const LossFunction& loss, const PiecewiseActivation& act,
                                const ParamVector& center, double radius, std::size_t n_pairs,
                                std::uint64_t seed) {
  if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (center.size() != arch.param_count()) throw std::invalid_argument("center has wrong length");
  LipschitzReport r;
  r.pairs = n_pairs;
  r.seed = seed;
  Rng rng(seed);
  const double step = 1e-3 * radius;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    // Both points stay inside the ball.
    const ParamVector t = rng.in_ball(center, radius - step);
    const ParamVector v = t + step * rng.unit_direction(center.size());
    const double q = std::abs(risk(t, arch, measure, loss, act) - risk(v, arch, measure, loss, act)) /
                     (t - v).norm();
    r.constant = std::max(r.constant, q);
  }
  return r;
}

UniformBoundReport uniform_bound_probe(const Architecture& arch, const ApproximantFamily& fam,
                                       const ParamVector& center, double radius, double a,
                                       double b, const std::vector<long>& n_schedule,
                                       std::size_t theta_samples, std::size_t input_samples,
                                       std::uint64_t seed) {
  if (center.size() != arch.param_count()) throw std::invalid_argument("center has wrong length");
  if (!(radius >= 0.0)) throw std::invalid_argument("radius must be nonnegative");
  Rng rng(seed);
  std::vector<ParamVector> thetas{center};
  if (radius > 0.0) {
    for (std::size_t i = 0; i < theta_samples; ++i) thetas.push_back(rng.in_ball(center, radius));
  }
  const auto inputs = a == b ? std::vector<VectorXd>{VectorXd::Constant(arch.input_dim(), a)}
                             : box_inputs(arch.input_dim(), a, b, input_samples, seed + 1);

  UniformBoundReport report;
  report.n_schedule = n_schedule;
  const auto layers = static_cast<std::size_t>(arch.depth());
  report.layers.assign(layers, {});
  for (long n : n_schedule) {
    std::vector<LayerBounds> per(layers);
    const ScalarFn value = [&fam, n](double v) { return approximant_value(fam, n, v); };
    const ScalarFn deriv = [&fam, n](double v) { return approximant_derivative(fam, n, v); };
    for (const auto& t : thetas) {
      for (const auto& x : inputs) {
        ++report.evaluations;
        const auto trace = forward(t, arch, x, value);
        const auto jac = preactivation_jacobians(t, arch, x, value, deriv);
        for (std::size_t k = 0; k < layers; ++k) {
          const auto& pre = trace.preacts[k];
          auto& lb = per[k];
          lb.preact = std::max(lb.preact, pre.cwiseAbs().maxCoeff());
          lb.activation = std::max(lb.activation, pre.unaryExpr(value).cwiseAbs().maxCoeff());
          lb.activation_derivative =
              std::max(lb.activation_derivative, pre.unaryExpr(deriv).cwiseAbs().maxCoeff());
          lb.jacobian = std::max(lb.jacobian, jac[k].cwiseAbs().maxCoeff());
        }
      }
    }
    for (std::size_t k = 0; k < layers; ++k) {
      auto& all = report.layers[k];
      all.preact = std::max(all.preact, per[k].preact);
      all.activation = std::max(all.activation, per[k].activation);
      all.activation_derivative = std::max(all.activation_derivative, per[k].activation_derivative);
      all.jacobian = std::max(all.jacobian, per[k].jacobian);
    }
    report.per_n.push_back(std::move(per));
  }
  return report;
}

}  // namespace gengrad
