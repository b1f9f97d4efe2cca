#ifndef GENGRAD_RISK_HPP_
#define GENGRAD_RISK_HPP_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gengrad/network.hpp"

namespace gengrad {

struct Sample {
  VectorXd x;
  VectorXd y;
  double w = 1.0;
};

/// Finite linear combination of Dirac masses at (x, y) pairs.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  /// Throws std::invalid_argument on inconsistent dimensions or negative/non-finite mass.
  explicit EmpiricalMeasure(std::vector<Sample> samples);

  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return output_dim_; }
  double total_mass() const;
  /// Smallest [a, b] with every input coordinate inside.
  std::pair<double, double> input_box() const;

  EmpiricalMeasure scaled(double c) const;
  /// Throws std::invalid_argument unless dimensions match the architecture.
  void check_compatible(const Architecture& arch) const;

 private:
  std::vector<Sample> samples_;
  Index input_dim_ = 0;
  Index output_dim_ = 0;
};

/// C^1 loss H(z, y, theta) with its partial gradients.
struct LossFunction {
  using ValueFn = std::function<double(const VectorXd&, const VectorXd&, const ParamVector&)>;
  using GradFn = std::function<VectorXd(const VectorXd&, const VectorXd&, const ParamVector&)>;

  std::string kind;
  double lambda = 0.0;
  VectorXd weights;
  ValueFn value;
  GradFn grad_z;
  GradFn grad_theta;  // empty when H does not depend on theta
};

/// ||z - y||^2
LossFunction mse_loss();
/// sum_h c_h (z_h - y_h)^2
LossFunction weighted_mse_loss(VectorXd weights);
/// ||z - y||^2 + lambda ||theta||^2
LossFunction ridge_loss(double lambda);

/// sum_i w_i H(N(x_i), y_i, theta) in sample order, with `act` on hidden layers.
template <typename Act>
double risk_with(const ParamVector& theta, const Architecture& arch,
                 const EmpiricalMeasure& measure, const LossFunction& loss, Act&& act) {
  measure.check_compatible(arch);
  double acc = 0.0;
  for (const auto& s : measure.samples()) {
    const auto trace = forward(theta, arch, s.x, act);
    acc += s.w * loss.value(trace.output(), s.y, theta);
  }
  return acc;
}

double risk(const ParamVector& theta, const Architecture& arch, const EmpiricalMeasure& measure,
            const LossFunction& loss, const PiecewiseActivation& act);

double risk_smoothed(const ParamVector& theta, const Architecture& arch,
                     const EmpiricalMeasure& measure, const LossFunction& loss,
                     const ApproximantFamily& fam, long n);

struct LossGrowthReport {
  double radius = 0.0;
  std::size_t evaluations = 0;
  std::size_t nonfinite = 0;
  double sup_numerator = 0.0;  // sup (||grad_z H|| + ||grad_theta H||)
  double inf_value = 0.0;      // inf |H|
  double empirical_sup = 0.0;  // sup_numerator / (1 + inf_value)
  bool flagged = false;
  std::uint64_t seed = 0;
};

/// Spot-checks the growth quotient of the loss over z in [-r, r]^{l_L},
/// theta in [-r, r]^d and the y values of the measure. Flags when the
/// empirical sup exceeds 1e9 or any evaluation is non-finite.
LossGrowthReport loss_growth_probe(const LossFunction& loss, const Architecture& arch,
                                   const EmpiricalMeasure& measure, double r,
                                   std::uint64_t seed = 0, std::size_t theta_samples = 64);

inline constexpr double kLossGrowthThreshold = 1e9;

}  // namespace gengrad

#endif  // GENGRAD_RISK_HPP_
