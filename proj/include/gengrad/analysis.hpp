#ifndef GENGRAD_ANALYSIS_HPP_
#define GENGRAD_ANALYSIS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gengrad/gradients.hpp"

namespace gengrad {

/// Central differences (f(theta + h e_i) - f(theta - h e_i)) / 2h.
GradientVector fd_gradient(const std::function<double(const ParamVector&)>& f,
                           const ParamVector& theta, double h);

// ---------------------------------------------------------------------------
// Convergence of smoothed gradients

struct ConvergenceRecord {
  long n = 0;
  GradientVector gradient;
  double discrepancy = 0.0;  // ||grad L_n - G||
  double risk_gap = 0.0;     // |L_n - L|
};

struct ConvergenceReport {
  ParamVector theta;
  std::string eta;
  double risk = 0.0;
  std::vector<ConvergenceRecord> history;
  /// Smallest scheduled n from which every recorded gradient equals the limit bit for bit.
  std::optional<long> stabilization_index;
  GradientVector limit;
};

/// Throws std::invalid_argument unless the schedule is strictly increasing and positive.
ConvergenceReport convergence_experiment(const ParamVector& theta, const Architecture& arch,
                                         const EmpiricalMeasure& measure, const LossFunction& loss,
                                         const ApproximantFamily& fam,
                                         const std::vector<long>& n_schedule);

/// 1, 2, 4, ..., 2^max_power.
std::vector<long> doubling_schedule(int max_power);

// ---------------------------------------------------------------------------
// Local geometry of the realization

/// Per-sample hidden-unit position relative to the kink set: 2m for the m-th
/// open interval, 2m+1 for the m-th kink itself.
std::vector<int> kink_pattern(const ParamVector& theta, const Architecture& arch,
                              const EmpiricalMeasure& measure, const PiecewiseActivation& act);

/// Smallest distance from any hidden pre-activation (over the measure's
/// support) to the kink set; +inf without hidden layers or kinks.
double min_kink_distance(const ParamVector& theta, const Architecture& arch,
                         const EmpiricalMeasure& measure, const PiecewiseActivation& act);

/// Box corners (at most 1024) followed by `count` seeded uniform draws from [a, b]^{l_0}.
std::vector<VectorXd> box_inputs(Index dim, double a, double b, std::size_t count,
                                 std::uint64_t seed);

/// Sup over theta and `n_pairs` draws from theta + [-radius, radius]^d, and over
/// box inputs, of max_{k,i} ||d N^k_i / d theta||_1. This bounds
/// |N^k_i(Theta) - N^k_i(Theta')| / max_j |Theta_j - Theta'_j| locally.
double realization_lipschitz_estimate(const ParamVector& theta, const Architecture& arch,
                                      const PiecewiseActivation& act, double a, double b,
                                      double radius, std::size_t n_pairs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Approach sequences and limiting subgradients

struct ApproachSequence {
  /// Direction z: every pre-activation satisfies z (N(vartheta) - N(theta)) <= 0.
  /// It is the negative of the activation's approach sign, so that
  /// pre-activations move towards the side on which d_g is continuous.
  int direction = 1;
  double lipschitz = 0.0;                // C, including the safety factor
  std::vector<double> layer_constants;   // c_1, ..., c_L
  std::vector<double> epsilons;
  std::vector<ParamVector> sequence;
};

/// Shifts every bias of layer k by 1.5 c_k delta' against `direction`, with
/// delta' = min(1, eps / (2 c_L d)) and weights unchanged. Throws
/// std::invalid_argument for an empty box and std::runtime_error if the
/// Lipschitz estimate is not finite.
ApproachSequence left_approach_sequence(const ParamVector& theta, const Architecture& arch,
                                        double a, double b, const std::vector<double>& epsilons,
                                        const PiecewiseActivation& act, std::uint64_t seed = 0);

/// Max over inputs, layers and units of z (N(vartheta) - N(theta)).
double approach_sign_excess(const ParamVector& theta, const ParamVector& vartheta,
                            const Architecture& arch, const PiecewiseActivation& act, int direction,
                            const std::vector<VectorXd>& inputs);

struct FrechetSample {
  double radius = 0.0;
  double effective_radius = 0.0;  // smallest radius actually used (shrunk to stay in one region)
  double min_quotient = 0.0;
  double tolerance = 0.0;
};

struct WitnessStep {
  double epsilon = 0.0;
  ParamVector theta;
  double distance = 0.0;
  GradientVector gradient;
  double grad_gap = 0.0;
  double fd_step = 0.0;         // smallest per-coordinate step used
  double fd_discrepancy = 0.0;  // relative, against max(1, ||G||)
  double sign_excess = 0.0;
  double derivative_gap = 0.0;  // max |d_g(N(vartheta)) - d_g(N(theta))| over data and units
  bool smoothed_limit_agrees = false;
  std::vector<FrechetSample> frechet;
  bool frechet_ok = false;
};

struct SubgradientWitness {
  ParamVector theta;
  GradientVector gradient;
  int direction = 1;
  std::uint64_t seed = 0;
  bool smooth_at_theta = false;
  std::vector<FrechetSample> frechet_at_theta;
  bool frechet_at_theta_ok = false;
  std::vector<WitnessStep> steps;
  std::vector<std::string> findings;

  bool distances_decreasing() const;
  bool valid() const { return findings.empty(); }
};

struct WitnessOptions {
  double initial_epsilon = 0.1;
  double final_distance = 1e-8;
  double fd_tolerance = 1e-4;
  double gap_tolerance = 1e-8;
  double frechet_tolerance = 1e-6;
  std::size_t sign_inputs = 128;
  std::uint64_t seed = 0;
};

/// Builds the approach sequence towards theta and checks, at every element,
/// differentiability (finite differences against G), the sampled Frechet
/// quotient, the sign condition, and convergence of G along the sequence.
SubgradientWitness limiting_subgradient_check(const ParamVector& theta, const Architecture& arch,
                                              const EmpiricalMeasure& measure,
                                              const LossFunction& loss,
                                              const PiecewiseActivation& act,
                                              const ApproximantFamily& fam, std::size_t n_dirs,
                                              const std::vector<double>& radii,
                                              const WitnessOptions& options = {});

/// Sampled min over unit directions u and each radius r of
/// (L(theta + r u) - L(theta) - r <g, u>) / r.
std::vector<FrechetSample> frechet_quotients(const std::function<double(const ParamVector&)>& f,
                                             const ParamVector& theta, const GradientVector& g,
                                             std::size_t n_dirs, const std::vector<double>& radii,
                                             const std::function<bool(const ParamVector&)>& same_region,
                                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Smooth regions, Lipschitz and boundedness probes

struct SmoothRegionReport {
  double discrepancy = 0.0;
  double min_kink_distance = 0.0;
  double required_margin = 0.0;
  bool margin_ok = false;
  std::string warning;
};

/// ||FD(L, h) - G|| / max(1, ||G||), with a kink-margin check of 10 h max(1, ||theta||).
SmoothRegionReport smooth_region_agreement(const ParamVector& theta, const Architecture& arch,
                                           const EmpiricalMeasure& measure,
                                           const LossFunction& loss, const PiecewiseActivation& act,
                                           double h);

struct LipschitzReport {
  double constant = 0.0;
  std::size_t pairs = 0;
  std::uint64_t seed = 0;
};

/// Max of |L(theta) - L(theta')| / ||theta - theta'|| over seeded pairs in the ball.
LipschitzReport lipschitz_probe(const Architecture& arch, const EmpiricalMeasure& measure,
                                const LossFunction& loss, const PiecewiseActivation& act,
                                const ParamVector& center, double radius, std::size_t n_pairs,
                                std::uint64_t seed);

struct LayerBounds {
  double preact = 0.0;
  double activation = 0.0;
  double activation_derivative = 0.0;
  double jacobian = 0.0;  // sup |d N^k_i / d theta_j|
};

struct UniformBoundReport {
  std::vector<long> n_schedule;
  std::vector<LayerBounds> layers;                  // over all n
  std::vector<std::vector<LayerBounds>> per_n;      // per_n[s][k-1]
  std::size_t evaluations = 0;
};

/// d N^k / d theta for every layer by forward accumulation, with `act` on hidden layers.
std::vector<Eigen::MatrixXd> preactivation_jacobians(const ParamVector& theta,
                                                     const Architecture& arch, const VectorXd& x,
                                                     const ScalarFn& value, const ScalarFn& deriv);

/// Empirical sups over theta in the ball (center, radius), inputs from the
/// box [a, b], and n in the schedule.
UniformBoundReport uniform_bound_probe(const Architecture& arch, const ApproximantFamily& fam,
                                       const ParamVector& center, double radius, double a,
                                       double b, const std::vector<long>& n_schedule,
                                       std::size_t theta_samples, std::size_t input_samples,
                                       std::uint64_t seed);

}  // namespace gengrad

#endif  // GENGRAD_ANALYSIS_HPP_
