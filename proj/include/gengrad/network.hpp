#ifndef GENGRAD_NETWORK_HPP_
#define GENGRAD_NETWORK_HPP_

#include <Eigen/Core>

#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gengrad/activation.hpp"

namespace gengrad {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using VectorXd = Vector<double>;

/// Flat parameter vector theta of length param_count().
using ParamVector = VectorXd;

/// Fully connected layer widths (l_0, ..., l_L).
///
/// Parameters are stored layer by layer; within layer k the l_k x l_{k-1}
/// weight matrix comes first in row-major order, followed by the l_k biases.
/// Public accessors take 1-based (k, i, j) and return 0-based flat positions:
///
///   weight(k, i, j) -> (i-1) l_{k-1} + (j-1) + d_{k-1}
///   bias(k, i)      ->  l_k l_{k-1} + (i-1) + d_{k-1}
///
/// with d_k = sum_{n<=k} l_n (l_{n-1} + 1).
class Architecture {
 public:
  explicit Architecture(std::vector<Index> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw std::invalid_argument("architecture needs at least two layers");
    for (Index w : widths_) {
      if (w < 1) throw std::invalid_argument("layer widths must be positive");
    }
    offsets_.assign(widths_.size(), 0);
    for (std::size_t k = 1; k < widths_.size(); ++k)
      offsets_[k] = offsets_[k - 1] + widths_[k] * (widths_[k - 1] + 1);
  }

  const std::vector<Index>& widths() const { return widths_; }
  /// L, the number of affine layers.
  Index depth() const { return static_cast<Index>(widths_.size()) - 1; }
  Index width(Index k) const { return widths_.at(static_cast<std::size_t>(k)); }
  Index input_dim() const { return widths_.front(); }
  Index output_dim() const { return widths_.back(); }
  Index param_count() const { return offsets_.back(); }
  /// d_k for k = 0..L.
  Index offset(Index k) const { return offsets_.at(static_cast<std::size_t>(k)); }

  Index weight_index(Index k, Index i, Index j) const {
    check_layer(k);
    if (i < 1 || i > width(k) || j < 1 || j > width(k - 1))
      throw std::out_of_range("weight index out of range");
    return (i - 1) * width(k - 1) + (j - 1) + offset(k - 1);
  }

  Index bias_index(Index k, Index i) const {
    check_layer(k);
    if (i < 1 || i > width(k)) throw std::out_of_range("bias index out of range");
    return width(k) * width(k - 1) + (i - 1) + offset(k - 1);
  }

  bool operator==(const Architecture& other) const { return widths_ == other.widths_; }

 private:
  void check_layer(Index k) const {
    if (k < 1 || k > depth()) throw std::out_of_range("layer index out of range");
  }

  std::vector<Index> widths_;
  std::vector<Index> offsets_;
};

inline std::string to_string(const Architecture& arch) {
  std::string s;
  for (std::size_t k = 0; k < arch.widths().size(); ++k) {
    if (k) s += '-';
    s += std::to_string(arch.widths()[k]);
  }
  return s;
}

template <typename Derived>
typename Derived::Scalar weight(const Eigen::MatrixBase<Derived>& theta, const Architecture& arch,
                                Index k, Index i, Index j) {
  if (theta.size() != arch.param_count()) throw std::invalid_argument("theta has wrong length");
  return theta(arch.weight_index(k, i, j));
}

template <typename Derived>
typename Derived::Scalar bias(const Eigen::MatrixBase<Derived>& theta, const Architecture& arch,
                              Index k, Index i) {
  if (theta.size() != arch.param_count()) throw std::invalid_argument("theta has wrong length");
  return theta(arch.bias_index(k, i));
}

template <typename Scalar>
using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Read-only view of layer k's weight matrix inside theta.
template <typename Scalar>
Eigen::Map<const RowMajorMatrix<Scalar>> weight_matrix(const Vector<Scalar>& theta,
                                                       const Architecture& arch, Index k) {
  return Eigen::Map<const RowMajorMatrix<Scalar>>(theta.data() + arch.offset(k - 1), arch.width(k),
                                                  arch.width(k - 1));
}

/// Read-only view of layer k's bias vector inside theta.
template <typename Scalar>
Eigen::Map<const Vector<Scalar>> bias_vector(const Vector<Scalar>& theta, const Architecture& arch,
                                             Index k) {
  return Eigen::Map<const Vector<Scalar>>(
      theta.data() + arch.offset(k - 1) + arch.width(k) * arch.width(k - 1), arch.width(k));
}

/// Pre-activations of every layer for one input.
template <typename Scalar>
struct ForwardTrace {
  Vector<Scalar> input;
  std::vector<Vector<Scalar>> preacts;      // layers 1..L at positions 0..L-1
  std::vector<Vector<Scalar>> activations;  // hidden layers 1..L-1 at positions 0..L-2

  const Vector<Scalar>& output() const { return preacts.back(); }
  /// Input to layer k (1-based): x for k = 1, otherwise the layer k-1 activations.
  const Vector<Scalar>& layer_input(Index k) const {
    return k == 1 ? input : activations[static_cast<std::size_t>(k - 2)];
  }

  bool operator==(const ForwardTrace& o) const {
    return input == o.input && preacts == o.preacts && activations == o.activations;
  }
};

/// b^k + W^k a, accumulated bias first and then in ascending column order.
template <typename Scalar>
Vector<Scalar> affine_layer(const Vector<Scalar>& theta, const Architecture& arch, Index k,
                            const Vector<Scalar>& a) {
  const auto w = weight_matrix(theta, arch, k);
  const auto b = bias_vector(theta, arch, k);
  Vector<Scalar> out(arch.width(k));
  for (Index i = 0; i < out.size(); ++i) {
    Scalar acc = b(i);
    for (Index j = 0; j < a.size(); ++j) acc += w(i, j) * a(j);
    out(i) = acc;
  }
  return out;
}

/// Realization with `act` applied on hidden layers only; the output layer is affine.
template <typename Scalar, typename Act>
  requires std::invocable<Act&, Scalar>
ForwardTrace<Scalar> forward(const Vector<Scalar>& theta, const Architecture& arch,
                             const Vector<Scalar>& x, Act&& act) {
  if (theta.size() != arch.param_count()) throw std::invalid_argument("theta has wrong length");
  if (x.size() != arch.input_dim()) throw std::invalid_argument("input has wrong dimension");
  ForwardTrace<Scalar> trace;
  trace.input = x;
  trace.preacts.reserve(static_cast<std::size_t>(arch.depth()));
  for (Index k = 1; k <= arch.depth(); ++k) {
    trace.preacts.push_back(affine_layer(theta, arch, k, trace.layer_input(k)));
    if (k < arch.depth()) trace.activations.push_back(trace.preacts.back().unaryExpr(act));
  }
  return trace;
}

inline ForwardTrace<double> forward(const ParamVector& theta, const Architecture& arch,
                                    const VectorXd& x, const PiecewiseActivation& act) {
  return forward(theta, arch, x, [&act](double v) { return act.value(v); });
}

/// Forward pass with the approximant G_n in place of the activation.
inline ForwardTrace<double> forward_approx(const ParamVector& theta, const Architecture& arch,
                                           const VectorXd& x, const ApproximantFamily& fam,
                                           long n) {
  return forward(theta, arch, x, [&fam, n](double v) { return approximant_value(fam, n, v); });
}

/// Recomputes each layer from the stored inputs; true iff every stored
/// pre-activation is reproduced bit for bit.
template <typename Scalar>
bool reconstructs(const ForwardTrace<Scalar>& trace, const Vector<Scalar>& theta,
                  const Architecture& arch) {
  for (Index k = 1; k <= arch.depth(); ++k) {
    if (affine_layer(theta, arch, k, trace.layer_input(k)) !=
        trace.preacts[static_cast<std::size_t>(k - 1)])
      return false;
  }
  return true;
}

}  // namespace gengrad

#endif  // GENGRAD_NETWORK_HPP_
