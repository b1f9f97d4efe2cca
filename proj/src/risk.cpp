#include "gengrad/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gengrad/random.hpp"

namespace gengrad {

EmpiricalMeasure::EmpiricalMeasure(std::vector<Sample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) return;
  input_dim_ = samples_.front().x.size();
  output_dim_ = samples_.front().y.size();
  for (const auto& s : samples_) {
    if (s.x.size() != input_dim_ || s.y.size() != output_dim_)
      throw std::invalid_argument("samples have inconsistent dimensions");
    if (!std::isfinite(s.w) || s.w < 0.0)
      throw std::invalid_argument("sample masses must be finite and nonnegative");
    if (!s.x.allFinite() || !s.y.allFinite()) throw std::invalid_argument("samples must be finite");
  }
}

double EmpiricalMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& s : samples_) m += s.w;
  return m;
}

std::pair<double, double> EmpiricalMeasure::input_box() const {
  if (samples_.empty()) return {0.0, 0.0};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : samples_) {
    lo = std::min(lo, s.x.minCoeff());
    hi = std::max(hi, s.x.maxCoeff());
  }
  return {lo, hi};
}

EmpiricalMeasure EmpiricalMeasure::scaled(double c) const {
  auto copy = samples_;
  for (auto& s : copy) s.w *= c;
  return EmpiricalMeasure(std::move(copy));
}

void EmpiricalMeasure::check_compatible(const Architecture& arch) const {
  if (samples_.empty()) return;
  if (input_dim_ != arch.input_dim() || output_dim_ != arch.output_dim())
    throw std::invalid_argument("measure dimensions do not match the architecture");
}

LossFunction mse_loss() {
  LossFunction loss;
  loss.kind = "mse";
  loss.value = [](const VectorXd& z, const VectorXd& y, const ParamVector&) {
    return (z - y).squaredNorm();
  };
  loss.grad_z = [](const VectorXd& z, const VectorXd& y, const ParamVector&) -> VectorXd {
    return 2.0 * (z - y);
  };
  return loss;
}

LossFunction weighted_mse_loss(VectorXd weights) {
  LossFunction loss;
  loss.kind = "weighted_mse";
  loss.weights = weights;
  loss.value = [weights](const VectorXd& z, const VectorXd& y, const ParamVector&) {
    if (weights.size() != z.size()) throw std::invalid_argument("loss weights have wrong length");
    return (weights.array() * (z - y).array().square()).sum();
  };
  loss.grad_z = [weights](const VectorXd& z, const VectorXd& y, const ParamVector&) -> VectorXd {
    if (weights.size() != z.size()) throw std::invalid_argument("loss weights have wrong length");
    return 2.0 * (weights.array() * (z - y).array()).matrix();
  };
  return loss;
}

LossFunction ridge_loss(double lambda) {
  LossFunction loss;
  loss.kind = "ridge";
  loss.lambda = lambda;
  loss.value = [lambda](const VectorXd& z, const VectorXd& y, const ParamVector& theta) {
    return (z - y).squaredNorm() + lambda * theta.squaredNorm();
  };
  loss.grad_z = [](const VectorXd& z, const VectorXd& y, const ParamVector&) -> VectorXd {
    return 2.0 * (z - y);
  };
  loss.grad_theta = [lambda](const VectorXd&, const VectorXd&, const ParamVector& theta) -> VectorXd {
    return 2.0 * lambda * theta;
  };
  return loss;
}

double risk(const ParamVector& theta, const Architecture& arch, const EmpiricalMeasure& measure,
            const LossFunction& loss, const PiecewiseActivation& act) {
  return risk_with(theta, arch, measure, loss, [&act](double v) { return act.value(v); });
}

double risk_smoothed(const ParamVector& theta, const Architecture& arch,
                     const EmpiricalMeasure& measure, const LossFunction& loss,
                     const ApproximantFamily& fam, long n) {
  if (n < 1) throw std::invalid_argument("approximant index n must be >= 1");
  return risk_with(theta, arch, measure, loss,
                   [&fam, n](double v) { return approximant_value(fam, n, v); });
}

LossGrowthReport loss_growth_probe(const LossFunction& loss, const Architecture& arch,
                                   const EmpiricalMeasure& measure, double r, std::uint64_t seed,
                                   std::size_t theta_samples) {
  if (!(r > 0.0)) throw std::invalid_argument("probe radius must be positive");
  LossGrowthReport report;
  report.radius = r;
  report.seed = seed;
  Rng rng(seed);

  const Index out = arch.output_dim();
  std::vector<VectorXd> zs;
  constexpr int per_dim = 11;
  if (std::pow(per_dim, static_cast<double>(out)) <= 4096.0) {
    std::vector<int> counter(static_cast<std::size_t>(out), 0);
    while (true) {
      VectorXd z(out);
      for (Index h = 0; h < out; ++h)
        z(h) = (-r * (per_dim - 1 - counter[h]) + r * counter[h]) / (per_dim - 1);
      zs.push_back(z);
      Index h = 0;
      while (h < out && ++counter[h] == per_dim) counter[h++] = 0;
      if (h == out) break;
    }
  } else {
    for (int i = 0; i < 4096; ++i) zs.push_back(rng.uniform_vector(out, -r, r));
  }

  std::vector<ParamVector> thetas;
  thetas.push_back(ParamVector::Zero(arch.param_count()));
  thetas.push_back(ParamVector::Constant(arch.param_count(), r));
  for (std::size_t i = 0; i < theta_samples; ++i)
    thetas.push_back(rng.uniform_vector(arch.param_count(), -r, r));

  std::vector<VectorXd> ys;
  for (const auto& s : measure.samples()) ys.push_back(s.y);
  if (ys.empty()) ys.push_back(VectorXd::Zero(out));

  double inf_value = std::numeric_limits<double>::infinity();
  for (const auto& y : ys) {
    for (const auto& theta : thetas) {
      for (const auto& z : zs) {
        ++report.evaluations;
        const double v = loss.value(z, y, theta);
        double num = loss.grad_z(z, y, theta).norm();
        if (loss.grad_theta) num += loss.grad_theta(z, y, theta).norm();
        if (!std::isfinite(v) || !std::isfinite(num)) {
          ++report.nonfinite;
          continue;
        }
        report.sup_numerator = std::max(report.sup_numerator, num);
        inf_value = std::min(inf_value, std::abs(v));
      }
    }
  }
  report.inf_value = std::isfinite(inf_value) ? inf_value : 0.0;
  report.empirical_sup = report.sup_numerator / (1.0 + report.inf_value);
  report.flagged = report.nonfinite > 0 || report.empirical_sup > kLossGrowthThreshold;
  return report;
}

}  // namespace gengrad
