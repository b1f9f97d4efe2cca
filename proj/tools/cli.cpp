#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "gengrad/analysis.hpp"

namespace gengrad::cli {

namespace fs = std::filesystem;

namespace {

template <typename T>
T field(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const Json::exception& e) {
    throw IoError(std::string("config field '") + key + "': " + e.what());
  }
}

LossFunction loss_from_json(const Json& j) {
  const auto kind = field<std::string>(j, "kind", "mse");
  if (kind == "mse") return mse_loss();
  if (kind == "ridge") return ridge_loss(field<double>(j, "lambda", 0.0));
  if (kind == "weighted_mse") {
    if (!j.contains("weights")) throw IoError("weighted_mse needs 'weights'");
    return weighted_mse_loss(vector_from_json(j["weights"]));
  }
  throw IoError("unknown loss kind: " + kind);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  const fs::path full = path.is_absolute() ? path : base / path;
  if (!fs::exists(full)) throw IoError("referenced file does not exist: " + full.string());
  return full;
}

}  // namespace

ExperimentConfig parse_config(const Json& j, const fs::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  if (!j.is_object()) throw IoError("config must be a JSON object");
  ExperimentConfig c(make_fixture("affine-1-1"));
  c.problem.name = "custom";
  c.seed = seed_override ? *seed_override : field<std::uint64_t>(j, "seed", 0);

  const bool has_fixture = j.contains("fixture");
  if (has_fixture) {
    try {
      c.problem = make_fixture(field<std::string>(j, "fixture", ""));
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }
  } else if (!j.contains("widths")) {
    throw IoError("config needs either 'fixture' or 'widths'");
  }

  if (j.contains("widths")) {
    std::vector<Index> widths;
    for (const auto& w : j["widths"]) {
      if (!w.is_number_integer()) throw IoError("widths must be integers");
      widths.push_back(w.get<Index>());
    }
    try {
      c.problem.arch = Architecture(widths);
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }
    if (!has_fixture) c.problem.theta = ParamVector::Zero(c.problem.arch.param_count());
  }
  if (j.contains("activation")) c.problem.act = activation_from_json(j["activation"]);
  if (j.contains("kink_value_override")) {
    Json a = activation_to_json(c.problem.act);
    for (const auto& [k, v] : j["kink_value_override"].items()) a["kink_values"][k] = v;
    c.problem.act = activation_from_json(a);
  }
  if (j.contains("loss")) c.problem.loss = loss_from_json(j["loss"]);
  if (j.contains("dataset")) {
    c.problem.measure = load_measure(resolve(base_dir, field<std::string>(j, "dataset", "")));
  } else if (!has_fixture) {
    throw IoError("config needs 'dataset' when no fixture is given");
  }

  if (j.contains("theta")) {
    const auto& t = j["theta"];
    const auto source = field<std::string>(t, "source", "fixture");
    if (source == "file") {
      const auto path = resolve(base_dir, field<std::string>(t, "path", ""));
      c.problem.theta = path.extension() == ".json" ? vector_from_json(read_json(path)) : read_binary(path);
    } else if (source == "random") {
      c.problem.theta = random_theta(c.problem.arch, c.seed, field<double>(t, "scale", 1.0));
    } else if (source == "inline") {
      c.problem.theta = vector_from_json(t["values"]);
    } else if (source != "fixture" || !has_fixture) {
      throw IoError("theta source must be file, random, inline or fixture");
    }
  }
  if (c.problem.theta.size() != c.problem.arch.param_count())
    throw IoError("theta length does not match the architecture");
  try {
    c.problem.measure.check_compatible(c.problem.arch);
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }

  c.eta = field<std::string>(j, "eta", c.eta);
  try {
    blending_by_name(c.eta);
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  if (j.contains("n_schedule")) {
    c.n_schedule = field<std::vector<long>>(j, "n_schedule", {});
  } else {
    c.n_schedule = doubling_schedule(field<int>(j, "max_power", 16));
  }
  for (std::size_t i = 0; i < c.n_schedule.size(); ++i) {
    if (c.n_schedule[i] < 1 || (i > 0 && c.n_schedule[i] <= c.n_schedule[i - 1]))
      throw IoError("n_schedule must be positive and strictly increasing");
  }
  c.radii = field<std::vector<double>>(j, "radii", c.radii);
  if (c.radii.empty()) throw IoError("radii must not be empty");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    if (!(c.radii[i] > 0.0) || (i > 0 && !(c.radii[i] < c.radii[i - 1])))
      throw IoError("radii must be positive and strictly decreasing");
  }
  const auto n_dirs = field<long>(j, "n_dirs", static_cast<long>(c.n_dirs));
  if (n_dirs < 1) throw IoError("n_dirs must be >= 1");
  c.n_dirs = static_cast<std::size_t>(n_dirs);
  c.h = field<double>(j, "h", c.h);
  if (!(c.h > 0.0)) throw IoError("h must be positive");
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    c.grid_min = field<double>(g, "min", c.grid_min);
    c.grid_max = field<double>(g, "max", c.grid_max);
    c.grid_step = field<double>(g, "step", c.grid_step);
  }
  if (!(c.grid_step > 0.0) || !(c.grid_max >= c.grid_min)) throw IoError("invalid grid");
  c.n_values = field<std::vector<long>>(j, "n_values", c.n_values);
  for (long n : c.n_values) {
    if (n < 1) throw IoError("n_values must be positive");
  }
  c.ball_radius = field<double>(j, "ball_radius", c.ball_radius);
  if (!(c.ball_radius > 0.0)) throw IoError("ball_radius must be positive");
  const auto pairs = field<long>(j, "n_pairs", static_cast<long>(c.n_pairs));
  if (pairs < 1) throw IoError("n_pairs must be >= 1");
  c.n_pairs = static_cast<std::size_t>(pairs);
  return c;
}

ExperimentConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  return parse_config(read_json(path), path.parent_path(), seed_override);
}

namespace {

struct Output {
  Json json;
  std::string csv;
};

std::string csv_row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) s += (s.empty() ? "" : ",") + format_double(v);
  return s + "\n";
}

Json header(const std::string& command, const ExperimentConfig& c) {
  return {{"command", command},
          {"fixture", c.problem.name},
          {"seed", c.seed},
          {"activation", activation_to_json(c.problem.act)},
          {"network", network_to_json(c.problem.arch, c.problem.theta)}};
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool asserted;
  bool pass;
};

int cmd_gradcheck(const ExperimentConfig& c, Output& o) {
  const auto& p = c.problem;
  std::vector<Check> checks;

  const auto act_report = validate_activation(p.act);
  checks.push_back({"activation_hypotheses", act_report.ok() ? 0.0 : 1.0, 0.0, true, act_report.ok()});

  const auto smooth = smooth_region_agreement(p.theta, p.arch, p.measure, p.loss, p.act, c.h);
  checks.push_back({"fd_vs_generalized", smooth.discrepancy, 1e-4, smooth.margin_ok,
                    !smooth.margin_ok || smooth.discrepancy <= 1e-4});

  const auto g = backprop_generalized(p.theta, p.arch, p.measure, p.loss, p.act);
  try {
    const auto oracle = pathsum_risk_gradient(
        p.theta, p.arch, p.measure, p.loss, [&](double v) { return p.act.value(v); },
        [&](double v) { return generalized_derivative(p.act, v); });
    const double d = relative_distance(oracle, g);
    checks.push_back({"pathsum_vs_backprop", d, 1e-12, true, d <= 1e-12});
  } catch (const std::length_error&) {
    checks.push_back({"pathsum_vs_backprop", 0.0, 1e-12, false, true});
  }

  const auto growth = loss_growth_probe(p.loss, p.arch, p.measure, 1.0, c.seed);
  checks.push_back({"loss_growth", growth.empirical_sup, kLossGrowthThreshold, true, !growth.flagged});

  bool pass = true;
  Json jc = Json::array();
  o.csv = "check,value,tolerance,asserted,pass\n";
  for (const auto& ch : checks) {
    pass = pass && ch.pass;
    jc.push_back({{"name", ch.name}, {"value", ch.value}, {"tolerance", ch.tolerance},
                  {"asserted", ch.asserted}, {"pass", ch.pass}});
    o.csv += ch.name + "," + format_double(ch.value) + "," + format_double(ch.tolerance) + "," +
             (ch.asserted ? "1" : "0") + "," + (ch.pass ? "1" : "0") + "\n";
  }
  o.json["risk"] = risk(p.theta, p.arch, p.measure, p.loss, p.act);
  o.json["gradient"] = to_json(g);
  o.json["smooth_region"] = {{"discrepancy", smooth.discrepancy},
                             {"min_kink_distance", smooth.min_kink_distance},
                             {"required_margin", smooth.required_margin},
                             {"margin_ok", smooth.margin_ok},
                             {"warning", smooth.warning},
                             {"h", c.h}};
  o.json["activation_findings"] = act_report.findings;
  o.json["checks"] = jc;
  o.json["pass"] = pass;
  return pass ? kOk : kToleranceFailure;
}

int cmd_converge(const ExperimentConfig& c, Output& o) {
  const auto& p = c.problem;
  const ApproximantFamily fam(p.act, blending_by_name(c.eta));
  const auto r = convergence_experiment(p.theta, p.arch, p.measure, p.loss, fam, c.n_schedule);
  Json hist = Json::array();
  o.csv = "n,discrepancy_norm,risk_gap\n";
  for (const auto& h : r.history) {
    hist.push_back({{"n", h.n}, {"discrepancy_norm", h.discrepancy}, {"risk_gap", h.risk_gap},
                    {"gradient", to_json(h.gradient)}});
    o.csv += std::to_string(h.n) + "," + format_double(h.discrepancy) + "," + format_double(h.risk_gap) + "\n";
  }
  o.json["eta"] = r.eta;
  o.json["risk"] = r.risk;
  o.json["limit"] = to_json(r.limit);
  o.json["history"] = hist;
  o.json["stabilization_index"] = r.stabilization_index ? Json(*r.stabilization_index) : Json(nullptr);
  o.json["findings"] = r.stabilization_index ? Json::array() : Json::array({"no stabilization"});
  return r.stabilization_index ? kOk : kToleranceFailure;
}

Json frechet_json(const std::vector<FrechetSample>& fs) {
  Json a = Json::array();
  for (const auto& s : fs)
    a.push_back({{"radius", s.radius}, {"effective_radius", s.effective_radius},
                 {"min_quotient", s.min_quotient}, {"rounding_allowance", s.tolerance}});
  return a;
}

int cmd_subgrad(const ExperimentConfig& c, Output& o) {
  const auto& p = c.problem;
  const ApproximantFamily fam(p.act, blending_by_name(c.eta));
  WitnessOptions opt;
  opt.seed = c.seed;
  const auto w = limiting_subgradient_check(p.theta, p.arch, p.measure, p.loss, p.act, fam,
                                            c.n_dirs, c.radii, opt);
  Json steps = Json::array();
  o.csv = "step,epsilon,distance,grad_gap,fd_step,fd_discrepancy,sign_excess,derivative_gap,frechet_min_quotient\n";
  for (std::size_t s = 0; s < w.steps.size(); ++s) {
    const auto& st = w.steps[s];
    steps.push_back({{"epsilon", st.epsilon},
                     {"theta", to_json(st.theta)},
                     {"gradient", to_json(st.gradient)},
                     {"distance", st.distance},
                     {"grad_gap", st.grad_gap},
                     {"fd_step", st.fd_step},
                     {"fd_discrepancy", st.fd_discrepancy},
                     {"sign_excess", st.sign_excess},
                     {"derivative_gap", st.derivative_gap},
                     {"smoothed_limit_agrees", st.smoothed_limit_agrees},
                     {"frechet", frechet_json(st.frechet)},
                     {"frechet_ok", st.frechet_ok}});
    o.csv += std::to_string(s) + "," +
             csv_row({st.epsilon, st.distance, st.grad_gap, st.fd_step, st.fd_discrepancy,
                      st.sign_excess, st.derivative_gap, st.frechet.back().min_quotient});
  }
  o.json["gradient"] = to_json(w.gradient);
  o.json["direction"] = w.direction;
  o.json["smooth_at_theta"] = w.smooth_at_theta;
  o.json["frechet_at_theta"] = frechet_json(w.frechet_at_theta);
  o.json["steps"] = steps;
  o.json["findings"] = w.findings;
  o.json["valid"] = w.valid();
  return w.valid() ? kOk : kToleranceFailure;
}

int cmd_mollifier(const ExperimentConfig& c, Output& o) {
  const ApproximantFamily fam(c.problem.act, blending_by_name(c.eta));
  const auto count = static_cast<long>(std::llround((c.grid_max - c.grid_min) / c.grid_step)) + 1;
  Json rows = Json::array();
  o.csv = "x,n,G_n,dG_n\n";
  for (long n : c.n_values) {
    for (long i = 0; i < count; ++i) {
      const double x = count == 1 ? c.grid_min
                                  : (c.grid_min * static_cast<double>(count - 1 - i) +
                                     c.grid_max * static_cast<double>(i)) /
                                        static_cast<double>(count - 1);
      const double v = approximant_value(fam, n, x);
      const double d = approximant_derivative(fam, n, x);
      rows.push_back({x, n, v, d});
      o.csv += format_double(x) + "," + std::to_string(n) + "," + format_double(v) + "," + format_double(d) + "\n";
    }
  }
  o.json["eta"] = c.eta;
  o.json["delta"] = fam.delta();
  o.json["columns"] = {"x", "n", "G_n", "dG_n"};
  o.json["rows"] = rows;
  return kOk;
}

int cmd_lipschitz(const ExperimentConfig& c, Output& o) {
  const auto& p = c.problem;
  const auto r = lipschitz_probe(p.arch, p.measure, p.loss, p.act, p.theta, c.ball_radius,
                                 c.n_pairs, c.seed);
  o.json["ball_radius"] = c.ball_radius;
  o.json["pairs"] = r.pairs;
  o.json["constant"] = r.constant;
  o.csv = "seed,pairs,ball_radius,constant\n" + std::to_string(r.seed) + "," +
          std::to_string(r.pairs) + "," + csv_row({c.ball_radius, r.constant});
  return std::isfinite(r.constant) ? kOk : kToleranceFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized-gradient experiments for piecewise-C1 networks", "gengrad"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "json";
  app.add_option("command", command, "gradcheck | converge | subgrad | mollifier | lipschitz")
      ->required()
      ->check(CLI::IsMember({"gradcheck", "converge", "subgrad", "mollifier", "lipschitz"}));
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  ExperimentConfig config(make_fixture("affine-1-1"));
  try {
    config = load_config(config_path, seed);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  Output o;
  o.json = header(command, config);
  int code = kOk;
  try {
    if (command == "gradcheck") code = cmd_gradcheck(config, o);
    if (command == "converge") code = cmd_converge(config, o);
    if (command == "subgrad") code = cmd_subgrad(config, o);
    if (command == "mollifier") code = cmd_mollifier(config, o);
    if (command == "lipschitz") code = cmd_lipschitz(config, o);
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kConfigError;
  }
  o.json["exit_code"] = code;

  const fs::path path = fs::path(out_dir) / (command + "." + format);
  try {
    fs::create_directories(out_dir);
    write_text(path, format == "json" ? o.json.dump(2) + "\n" : o.csv);
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kConfigError;
  }
  out << command << ": " << (code == kOk ? "ok" : "tolerance failure") << " -> " << path.string() << "\n";
  return code;
}

}  // namespace gengrad::cli
