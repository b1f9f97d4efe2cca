#ifndef GENGRAD_GRADIENTS_HPP_
#define GENGRAD_GRADIENTS_HPP_

#include <stdexcept>

#include "gengrad/network.hpp"
#include "gengrad/parallel.hpp"
#include "gengrad/risk.hpp"

namespace gengrad {

/// Flat gradient aligned with the parameter layout.
using GradientVector = VectorXd;

namespace detail {

template <typename Value, typename Deriv>
GradientVector sample_gradient(const ParamVector& theta, const Architecture& arch,
                               const Sample& s, const LossFunction& loss, Value& value,
                               Deriv& deriv) {
  const auto trace = forward(theta, arch, s.x, value);
  GradientVector g = GradientVector::Zero(arch.param_count());
  VectorXd delta = loss.grad_z(trace.output(), s.y, theta);
  for (Index k = arch.depth(); k >= 1; --k) {
    const auto& a = trace.layer_input(k);
    const Index rows = arch.width(k);
    const Index cols = arch.width(k - 1);
    const Index base = arch.offset(k - 1);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) g(base + i * cols + j) = delta(i) * a(j);
      g(base + rows * cols + i) = delta(i);
    }
    if (k == 1) break;
    const auto w = weight_matrix(theta, arch, k);
    const auto& pre = trace.preacts[static_cast<std::size_t>(k - 2)];
    VectorXd prev(cols);
    for (Index j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (Index i = 0; i < rows; ++i) acc += w(i, j) * delta(i);
      prev(j) = deriv(pre(j)) * acc;
    }
    delta = std::move(prev);
  }
  if (loss.grad_theta) g += loss.grad_theta(trace.output(), s.y, theta);
  return g;
}

}  // namespace detail

/// Reverse accumulation of sum_i w_i grad_theta H(N(x_i), y_i, theta), where
/// the backward pass multiplies by `deriv` evaluated at the stored
/// pre-activations. Per-sample gradients may be computed concurrently; the
/// weighted sum is always folded in sample order.
template <typename Value, typename Deriv>
GradientVector backprop(const ParamVector& theta, const Architecture& arch,
                        const EmpiricalMeasure& measure, const LossFunction& loss, Value&& value,
                        Deriv&& deriv) {
  if (theta.size() != arch.param_count()) throw std::invalid_argument("theta has wrong length");
  measure.check_compatible(arch);
  const auto& samples = measure.samples();
  auto one = [&](std::size_t s) {
    return detail::sample_gradient(theta, arch, samples[s], loss, value, deriv);
  };
  GradientVector g = GradientVector::Zero(arch.param_count());
  if (samples.size() * static_cast<std::size_t>(arch.param_count()) < (1u << 14)) {
    for (std::size_t s = 0; s < samples.size(); ++s) g += samples[s].w * one(s);
    return g;
  }
  const auto parts = parallel_map(samples.size(), one);
  for (std::size_t s = 0; s < samples.size(); ++s) g += samples[s].w * parts[s];
  return g;
}

/// The generalized gradient: backprop with the activation and d_g.
GradientVector backprop_generalized(const ParamVector& theta, const Architecture& arch,
                                    const EmpiricalMeasure& measure, const LossFunction& loss,
                                    const PiecewiseActivation& act);

/// Exact gradient of the risk with G_n as activation.
GradientVector backprop_smoothed(const ParamVector& theta, const Architecture& arch,
                                 const EmpiricalMeasure& measure, const LossFunction& loss,
                                 const ApproximantFamily& fam, long n);

/// Upper bound on the number of index chains the path-sum oracle will enumerate.
inline constexpr double kPathSumLimit = 1e6;

/// d N^K_h / d W^k_{i,j} by explicit enumeration of index chains
/// (1-based indices). Throws std::length_error for oversized architectures.
double pathsum_partial_weight(const ParamVector& theta, const Architecture& arch, const VectorXd& x,
                              const ScalarFn& act_value, const ScalarFn& act_deriv, Index k,
                              Index i, Index j, Index K, Index h);

/// d N^K_h / d b^k_i by explicit enumeration of index chains.
double pathsum_partial_bias(const ParamVector& theta, const Architecture& arch, const VectorXd& x,
                            const ScalarFn& act_value, const ScalarFn& act_deriv, Index k, Index i,
                            Index K, Index h);

/// Risk gradient assembled entry by entry from the path sums and the chain rule.
GradientVector pathsum_risk_gradient(const ParamVector& theta, const Architecture& arch,
                                     const EmpiricalMeasure& measure, const LossFunction& loss,
                                     const ScalarFn& act_value, const ScalarFn& act_deriv);

/// ||a - b|| / max(||a||, ||b||), zero when both vanish.
double relative_distance(const VectorXd& a, const VectorXd& b);

}  // namespace gengrad

#endif  // GENGRAD_GRADIENTS_HPP_
