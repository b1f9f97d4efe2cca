#include "gengrad/gradients.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace gengrad {

GradientVector backprop_generalized(const ParamVector& theta, const Architecture& arch,
                                    const EmpiricalMeasure& measure, const LossFunction& loss,
                                    const PiecewiseActivation& act) {
  return backprop(
      theta, arch, measure, loss, [&act](double v) { return act.value(v); },
      [&act](double v) { return generalized_derivative(act, v); });
}

GradientVector backprop_smoothed(const ParamVector& theta, const Architecture& arch,
                                 const EmpiricalMeasure& measure, const LossFunction& loss,
                                 const ApproximantFamily& fam, long n) {
  if (n < 1) throw std::invalid_argument("approximant index n must be >= 1");
  return backprop(
      theta, arch, measure, loss, [&fam, n](double v) { return approximant_value(fam, n, v); },
      [&fam, n](double v) { return approximant_derivative(fam, n, v); });
}

double relative_distance(const VectorXd& a, const VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

namespace {

// Pre-activations N[k][i] (1-based k and i; row 0 unused), evaluated
// straight from the scalar parameter accessors.
using Table = std::vector<std::vector<double>>;

Table scalar_preactivations(const ParamVector& theta, const Architecture& arch, const VectorXd& x,
                            const ScalarFn& act_value) {
  if (x.size() != arch.input_dim()) throw std::invalid_argument("input has wrong dimension");
  const Index L = arch.depth();
  Table n(static_cast<std::size_t>(L + 1));
  for (Index k = 1; k <= L; ++k) {
    auto& row = n[static_cast<std::size_t>(k)];
    row.assign(static_cast<std::size_t>(arch.width(k) + 1), 0.0);
    for (Index i = 1; i <= arch.width(k); ++i) {
      double acc = bias(theta, arch, k, i);
      for (Index j = 1; j <= arch.width(k - 1); ++j) {
        const double in = k == 1 ? x(j - 1) : act_value(n[static_cast<std::size_t>(k - 1)][j]);
        acc += weight(theta, arch, k, i, j) * in;
      }
      row[static_cast<std::size_t>(i)] = acc;
    }
  }
  return n;
}

void guard_size(const Architecture& arch, Index from, Index to) {
  double paths = 1.0;
  for (Index p = from; p <= to; ++p) paths *= static_cast<double>(arch.width(p));
  if (paths > kPathSumLimit)
    throw std::length_error("path-sum oracle: architecture too large for explicit enumeration");
}

// Sum over chains v_k = i, v_{k+1}, ..., v_{K-1}, v_K = h of
// prod_{p=k+1}^{K} W^p_{v_p, v_{p-1}} A'(N^{p-1}_{v_{p-1}}).
// Chains whose endpoints violate the indicators 1{i}(v_k) 1{h}(v_K) contribute
// zero and are not enumerated.
double chain_sum(const ParamVector& theta, const Architecture& arch, const Table& n,
                 const ScalarFn& act_deriv, Index k, Index i, Index K, Index h) {
  if (k > K) return 0.0;
  if (k == K) return i == h ? 1.0 : 0.0;
  const auto len = static_cast<std::size_t>(K - k + 1);
  std::vector<Index> v(len, 1);  // v[q] is the unit on layer k + q
  v.front() = i;
  v.back() = h;
  double total = 0.0;
  while (true) {
    double prod = 1.0;
    for (std::size_t q = 1; q < len; ++q) {
      const Index p = k + static_cast<Index>(q);
      prod *= weight(theta, arch, p, v[q], v[q - 1]) *
              act_deriv(n[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(v[q - 1])]);
    }
    total += prod;
    // Odometer over the interior layers k+1..K-1.
    std::size_t q = 1;
    while (q + 1 < len) {
      if (++v[q] <= arch.width(k + static_cast<Index>(q))) break;
      v[q] = 1;
      ++q;
    }
    if (q + 1 >= len) break;
  }
  return total;
}

double layer_input(const Table& n, const VectorXd& x, const ScalarFn& act_value, Index k, Index j) {
  return k == 1 ? x(j - 1) : act_value(n[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j)]);
}

void check_ranges(const Architecture& arch, Index k, Index i, Index K, Index h) {
  if (K < 1 || K > arch.depth() || h < 1 || h > arch.width(K))
    throw std::out_of_range("output unit index out of range");
  if (k < 1 || k > arch.depth() || i < 1 || i > arch.width(k))
    throw std::out_of_range("parameter index out of range");
}

}  // namespace

double pathsum_partial_weight(const ParamVector& theta, const Architecture& arch, const VectorXd& x,
                              const ScalarFn& act_value, const ScalarFn& act_deriv, Index k,
                              Index i, Index j, Index K, Index h) {
  check_ranges(arch, k, i, K, h);
  if (j < 1 || j > arch.width(k - 1)) throw std::out_of_range("parameter index out of range");
  guard_size(arch, k, K);
  const Table n = scalar_preactivations(theta, arch, x, act_value);
  return layer_input(n, x, act_value, k, j) * chain_sum(theta, arch, n, act_deriv, k, i, K, h);
}

double pathsum_partial_bias(const ParamVector& theta, const Architecture& arch, const VectorXd& x,
                            const ScalarFn& act_value, const ScalarFn& act_deriv, Index k, Index i,
                            Index K, Index h) {
  check_ranges(arch, k, i, K, h);
  guard_size(arch, k, K);
  const Table n = scalar_preactivations(theta, arch, x, act_value);
  return chain_sum(theta, arch, n, act_deriv, k, i, K, h);
}

GradientVector pathsum_risk_gradient(const ParamVector& theta, const Architecture& arch,
                                     const EmpiricalMeasure& measure, const LossFunction& loss,
                                     const ScalarFn& act_value, const ScalarFn& act_deriv) {
  if (theta.size() != arch.param_count()) throw std::invalid_argument("theta has wrong length");
  measure.check_compatible(arch);
  guard_size(arch, 1, arch.depth());
  const Index L = arch.depth();
  GradientVector g = GradientVector::Zero(arch.param_count());
  for (const auto& s : measure.samples()) {
    const Table n = scalar_preactivations(theta, arch, s.x, act_value);
    VectorXd out(arch.output_dim());
    for (Index h = 1; h <= arch.output_dim(); ++h)
      out(h - 1) = n[static_cast<std::size_t>(L)][static_cast<std::size_t>(h)];
    const VectorXd dz = loss.grad_z(out, s.y, theta);
    const VectorXd dtheta =
        loss.grad_theta ? loss.grad_theta(out, s.y, theta) : VectorXd::Zero(arch.param_count());
    for (Index k = 1; k <= L; ++k) {
      for (Index i = 1; i <= arch.width(k); ++i) {
        for (Index j = 1; j <= arch.width(k - 1); ++j) {
          const Index l = arch.weight_index(k, i, j);
          const double in = layer_input(n, s.x, act_value, k, j);
          double entry = dtheta(l);
          for (Index h = 1; h <= arch.output_dim(); ++h)
            entry += dz(h - 1) * in * chain_sum(theta, arch, n, act_deriv, k, i, L, h);
          g(l) += s.w * entry;
        }
        const Index l = arch.bias_index(k, i);
        double entry = dtheta(l);
        for (Index h = 1; h <= arch.output_dim(); ++h)
          entry += dz(h - 1) * chain_sum(theta, arch, n, act_deriv, k, i, L, h);
        g(l) += s.w * entry;
      }
    }
  }
  return g;
}

}  // namespace gengrad
