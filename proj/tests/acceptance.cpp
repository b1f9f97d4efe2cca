// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <string>

#include "gengrad/analysis.hpp"
#include "gengrad/fixtures.hpp"
#include "gengrad/io.hpp"
#include "gengrad/random.hpp"

#ifndef GENGRAD_CLI
#error "GENGRAD_CLI must name the gengrad executable"
#endif

using namespace gengrad;
namespace fs = std::filesystem;

namespace {

EmpiricalMeasure random_measure(Rng& rng, Index in, Index out, int n) {
  std::vector<Sample> s;
  for (int i = 0; i < n; ++i)
    s.push_back({rng.uniform_vector(in, -1, 1), rng.uniform_vector(out, -1, 1), rng.uniform(0.1, 2.0)});
  return EmpiricalMeasure(std::move(s));
}

void all_architectures(std::vector<Index>& widths, Index depth, const std::function<void(const Architecture&)>& f) {
  if (static_cast<Index>(widths.size()) == depth + 1) {
    f(Architecture(widths));
    return;
  }
  for (Index w = 1; w <= 4; ++w) {
    widths.push_back(w);
    all_architectures(widths, depth, f);
    widths.pop_back();
  }
}

bool criterion1(std::string& note) {
  const auto start = std::chrono::steady_clock::now();
  const auto act = relu();
  const ApproximantFamily fam(act, smoothstep());
  Rng rng(1);
  double worst = 0.0;
  std::size_t archs = 0;
  for (Index depth = 1; depth <= 3; ++depth) {
    std::vector<Index> widths;
    all_architectures(widths, depth, [&](const Architecture& a) {
      ++archs;
      for (int draw = 0; draw < 100; ++draw) {
        const VectorXd t = rng.uniform_vector(a.param_count(), -1, 1);
        const auto m = random_measure(rng, a.input_dim(), a.output_dim(), 3);
        const auto og = pathsum_risk_gradient(
            t, a, m, mse_loss(), [&](double v) { return act.value(v); },
            [&](double v) { return generalized_derivative(act, v); });
        worst = std::max(worst, relative_distance(og, backprop_generalized(t, a, m, mse_loss(), act)));
        const long n = 1 + draw % 4;
        const auto os = pathsum_risk_gradient(
            t, a, m, mse_loss(), [&](double v) { return approximant_value(fam, n, v); },
            [&](double v) { return approximant_derivative(fam, n, v); });
        worst = std::max(worst, relative_distance(os, backprop_smoothed(t, a, m, mse_loss(), fam, n)));
      }
    });
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  note = std::to_string(archs) + " architectures, worst " + format_double(worst) + ", " + std::to_string(secs) + " s";
  return worst <= 1e-12 && secs < 60.0;
}

bool criterion2(std::string& note) {
  bool ok = true;
  long worst = 0;
  for (const char* name : {"affine-1-1", "relu-1-2-1", "relu-2-3-2", "leaky-2-3-2"}) {
    const auto f = make_fixture(name);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const VectorXd t = random_theta(f.arch, seed);
      const auto s = convergence_experiment(t, f.arch, f.measure, f.loss, ApproximantFamily(f.act, smoothstep()),
                                            doubling_schedule(20));
      const auto b = convergence_experiment(t, f.arch, f.measure, f.loss, ApproximantFamily(f.act, bump_blend()),
                                            doubling_schedule(20));
      const bool here = s.stabilization_index && b.stabilization_index && s.limit == b.limit &&
                        s.history.back().gradient == b.history.back().gradient;
      if (!here) {
        ok = false;
        note += std::string(name) + " seed " + std::to_string(seed) + " failed; ";
      } else {
        worst = std::max({worst, *s.stabilization_index, *b.stabilization_index});
      }
    }
  }
  note += "largest stabilization index " + std::to_string(worst);
  return ok;
}

bool criterion3(std::string& note) {
  double worst = 0.0;
  std::size_t checked = 0;
  bool ok = true;
  for (const auto& name : fixture_names()) {
    const auto f = make_fixture(name);
    std::size_t accepted = 0;
    for (std::uint64_t seed = 0; accepted < 50 && seed < 5000; ++seed) {
      const VectorXd t = random_theta(f.arch, 1000 + seed);
      const auto r = smooth_region_agreement(t, f.arch, f.measure, f.loss, f.act, 1e-6);
      if (!r.margin_ok) continue;
      ++accepted;
      worst = std::max(worst, r.discrepancy);
    }
    checked += accepted;
    if (accepted < 50) {
      ok = false;
      note += name + " had only " + std::to_string(accepted) + " admissible draws; ";
    }
  }
  note += std::to_string(checked) + " draws, worst " + format_double(worst);
  return ok && worst <= 1e-4;
}

bool criterion4(std::string& note) {
  bool ok = true;
  for (const char* name : {"relu-2-3-2-zero", "relu-1-2-1-pinned", "leaky-2-3-2-pinned", "hardtanh-2-3-2-pinned"}) {
    const auto f = make_fixture(name);
    const ApproximantFamily fam(f.act, smoothstep());
    const auto w = limiting_subgradient_check(f.theta, f.arch, f.measure, f.loss, f.act, fam, 8,
                                              {1e-2, 1e-4, 1e-6, 1e-8});
    bool halving = w.steps.size() >= 2;
    double fd = 0.0, sign = 0.0;
    for (std::size_t s = 0; s < w.steps.size(); ++s) {
      const double ulp = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + f.theta.norm());
      if (s > 0)
        halving = halving &&
                  std::abs(w.steps[s].distance / w.steps[s - 1].distance - 0.5) <= 1e-9 + ulp / w.steps[s].distance;
      fd = std::max(fd, w.steps[s].fd_discrepancy);
      sign = std::max(sign, w.steps[s].sign_excess);
    }
    const bool here = w.valid() && halving && !w.steps.empty() && w.steps.back().distance <= 1e-8 &&
                      w.steps.back().grad_gap <= 1e-8 && fd <= 1e-4 && sign <= 0.0;
    ok = ok && here;
    note += std::string(name) + (here ? " ok" : " FAILED") + " (" + std::to_string(w.steps.size()) +
            " steps, fd " + format_double(fd) + "); ";
  }
  return ok;
}

bool criterion5(std::string& note) {
  std::vector<PiecewiseActivation> acts{relu(), leaky_relu(0.1), abs_activation(), hard_tanh()};
  double worst_c1 = 0.0, worst_fd = 0.0;
  std::size_t points = 0;
  Rng rng(5);
  for (const auto& act : acts) {
    for (const auto& eta : {smoothstep(), bump_blend()}) {
      const ApproximantFamily fam(act, eta);
      for (long n = 1; n <= 1024; ++n) {
        const double h = 1e-4 * fam.delta() / (2.0 * static_cast<double>(n));
        auto f = [&](double x) { return approximant_value(fam, n, x); };
        const auto bounds = patch_boundaries(fam, n);
        for (double b : bounds) {
          const double right = (-3 * f(b) + 4 * f(b + h) - f(b + 2 * h)) / (2 * h);
          const double left = (3 * f(b) - 4 * f(b - h) + f(b - 2 * h)) / (2 * h);
          worst_c1 = std::max(worst_c1, std::abs(left - right));
        }
        for (int k = 0; k < 5; ++k) {
          // Interior point: inside a patch when possible, away from every boundary.
          const double centre = act.kinks().empty() ? 0.0 : act.kinks().points()[k % act.kinks().size()];
          const double x = centre + rng.uniform(-1.2, 1.2) * fam.delta() / static_cast<double>(n);
          bool near = false;
          for (double b : bounds) near = near || std::abs(x - b) <= 4 * h;
          if (near) continue;
          const double fd = (8 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12 * h);
          const double d = approximant_derivative(fam, n, x);
          worst_fd = std::max(worst_fd, std::abs(fd - d) / std::max(1.0, std::abs(d)));
          ++points;
        }
      }
    }
  }
  note = "C1 jump " + format_double(worst_c1) + ", derivative vs FD " + format_double(worst_fd) + " over " +
         std::to_string(points) + " points";
  return worst_c1 <= 1e-6 && worst_fd <= 1e-6 && points >= 10000;
}

bool criterion6(std::string& note) {
  double worst = 0.0;
  const auto probe = pathological_derivative_probe(1000);
  for (std::size_t k = 1; k <= probe.size(); ++k) {
    const double expected = static_cast<double>(k) * std::numbers::pi;
    worst = std::max(worst, std::abs(probe[k - 1].magnitude - expected) / expected);
  }
  const auto r = validate_activation(oscillating_activation());
  note = "probe relative error " + format_double(worst) + ", validator " + (r.ok() ? "accepted" : "flagged") +
         " x sin(1/x)";
  return worst <= 1e-12 && !r.ok() && !r.locally_bounded;
}

bool criterion7(std::string& note) {
  const auto f = make_fixture("relu-2-3-2");
  const auto a = lipschitz_probe(f.arch, f.measure, f.loss, f.act, f.theta, 1.0, 10000, 1);
  const auto b = lipschitz_probe(f.arch, f.measure, f.loss, f.act, f.theta, 1.0, 10000, 2);
  const double spread = std::abs(a.constant - b.constant) / std::max(a.constant, b.constant);
  const auto af = make_fixture("affine-1-1");
  const auto la = lipschitz_probe(af.arch, af.measure, af.loss, af.act, af.theta, 1.0, 10000, 1);
  double bound = 0.0;
  for (const auto& s : af.measure.samples()) {
    const double x = s.x(0);
    const double r = af.theta(0) * x + af.theta(1) - s.y(0);
    const double g = std::sqrt(x * x + 1.0);
    bound += 2.0 * s.w * (std::abs(r) + g) * g;
  }
  note = "seeds " + format_double(a.constant) + " / " + format_double(b.constant) + ", affine " +
         format_double(la.constant) + " <= " + format_double(bound);
  return std::isfinite(a.constant) && std::isfinite(b.constant) && spread <= 0.1 && la.constant <= bound;
}

bool criterion8(std::string& note) {
  const fs::path root = fs::temp_directory_path() / "gengrad_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  write_text(root / "config.json", R"({"fixture": "relu-2-3-2-zero", "n_pairs": 2000, "seed": 4})");
  bool ok = true;
  for (const char* cmd : {"gradcheck", "converge", "subgrad", "mollifier", "lipschitz"}) {
    for (const char* fmt : {"json", "csv"}) {
      std::string first;
      for (const char* threads : {"1", "1", "4"}) {
        const fs::path out = root / (std::string(cmd) + "_" + fmt + "_" + threads);
        const std::string line = std::string("GENGRAD_THREADS=") + threads + " \"" + GENGRAD_CLI + "\" " + cmd +
                                 " --config \"" + (root / "config.json").string() + "\" --out \"" + out.string() +
                                 "\" --format " + fmt + " > /dev/null";
        const int status = std::system(line.c_str());
        const fs::path file = out / (std::string(cmd) + "." + fmt);
        if (status == -1 || !fs::exists(file)) {
          ok = false;
          note += std::string(cmd) + " produced no output; ";
          break;
        }
        const std::string text = read_text(file);
        if (first.empty()) {
          first = text;
        } else if (text != first) {
          ok = false;
          note += std::string(cmd) + "." + fmt + " differs with GENGRAD_THREADS=" + threads + "; ";
        }
      }
    }
  }
  if (ok) note = "5 commands x 2 formats byte-identical across 3 runs";
  return ok;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, bool (*)(std::string&)>> criteria{
      {"backprop equals path-sum oracle", criterion1},
      {"smoothed gradients stabilize, limit independent of blend", criterion2},
      {"finite differences agree in smooth regions", criterion3},
      {"limiting subgradient witnesses at kinks", criterion4},
      {"mollifier is C1 with correct derivative", criterion5},
      {"pathological activation detected", criterion6},
      {"Lipschitz probe stable and bounded", criterion7},
      {"CLI output deterministic", criterion8},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string note;
    bool pass = false;
    try {
      pass = criteria[i].second(note);
    } catch (const std::exception& e) {
      note = std::string("exception: ") + e.what();
    }
    failures += pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].first, note.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
