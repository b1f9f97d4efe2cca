#include "gengrad/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace gengrad {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const VectorXd& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected an array of numbers");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw IoError("expected an array of numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

namespace {

double number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw IoError(std::string("field '") + key + "' must be a number");
  return j[key].get<double>();
}

double parse_point(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw IoError("kink_values key is not a number: " + s);
  return v;
}

}  // namespace

Json activation_to_json(const PiecewiseActivation& act) {
  const auto& p = act.params();
  Json j;
  j["kind"] = p.kind;
  if (p.kind == "leaky_relu") j["gamma"] = p.gamma;
  if (p.kind == "custom_pwl") {
    Json knots = Json::array();
    for (const auto& [x, y] : p.knots) knots.push_back({x, y});
    j["knots"] = knots;
    j["left_slope"] = p.left_slope;
    j["right_slope"] = p.right_slope;
  }
  Json kv = Json::object();
  for (std::size_t i = 0; i < act.kinks().size(); ++i)
    kv[format_double(act.kinks()[i])] = act.kink_values()[i];
  j["kink_values"] = kv;
  j["approach_side"] = act.approach_side() == ApproachSide::left ? "left" : "right";
  return j;
}

PiecewiseActivation activation_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw IoError("activation needs a string 'kind'");
  const auto kind = j["kind"].get<std::string>();
  PiecewiseActivation act = relu();
  if (kind == "relu") {
    act = relu();
  } else if (kind == "leaky_relu") {
    act = leaky_relu(number(j, "gamma", 0.01));
  } else if (kind == "abs") {
    act = abs_activation();
  } else if (kind == "hard_tanh") {
    act = hard_tanh();
  } else if (kind == "softplus") {
    act = softplus();
  } else if (kind == "xsin") {
    act = oscillating_activation();
  } else if (kind == "custom_pwl") {
    if (!j.contains("knots") || !j["knots"].is_array()) throw IoError("custom_pwl needs 'knots'");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j["knots"]) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
        throw IoError("each knot must be [x, y]");
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    try {
      act = custom_pwl(knots, number(j, "left_slope", 0.0), number(j, "right_slope", 0.0));
    } catch (const std::invalid_argument& e) {
      throw IoError(e.what());
    }
  } else {
    throw IoError("unknown activation kind: " + kind);
  }

  if (j.contains("approach_side")) {
    const auto side = j["approach_side"].get<std::string>();
    if (side == "left") {
      act = act.with_approach_side(ApproachSide::left);
    } else if (side == "right") {
      act = act.with_approach_side(ApproachSide::right);
    } else {
      throw IoError("approach_side must be 'left' or 'right'");
    }
  }
  if (j.contains("kink_values")) {
    const auto& kv = j["kink_values"];
    if (!kv.is_object()) throw IoError("kink_values must be an object");
    auto values = act.kink_values();
    for (const auto& [key, val] : kv.items()) {
      const auto idx = act.kinks().find(parse_point(key));
      if (!idx) throw IoError("kink_values key is not a kink: " + key);
      if (!val.is_number()) throw IoError("kink value must be a number");
      values[*idx] = val.get<double>();
    }
    act = act.with_kink_values(values);
  }
  return act;
}

Json network_to_json(const Architecture& arch, const ParamVector& theta) {
  Json widths = Json::array();
  for (Index w : arch.widths()) widths.push_back(w);
  return {{"widths", widths}, {"theta", to_json(theta)}};
}

std::pair<Architecture, ParamVector> network_from_json(const Json& j) {
  if (!j.contains("widths") || !j["widths"].is_array()) throw IoError("network needs 'widths'");
  std::vector<Index> widths;
  for (const auto& w : j["widths"]) {
    if (!w.is_number_integer()) throw IoError("widths must be integers");
    widths.push_back(w.get<Index>());
  }
  try {
    Architecture arch(widths);
    ParamVector theta = j.contains("theta") ? vector_from_json(j["theta"])
                                            : ParamVector::Zero(arch.param_count());
    if (theta.size() != arch.param_count()) throw IoError("theta length does not match widths");
    return {arch, theta};
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

Json measure_to_json(const EmpiricalMeasure& m) {
  Json samples = Json::array();
  for (const auto& s : m.samples()) samples.push_back({{"x", to_json(s.x)}, {"y", to_json(s.y)}, {"w", s.w}});
  return {{"samples", samples}};
}

EmpiricalMeasure measure_from_json(const Json& j) {
  if (!j.contains("samples") || !j["samples"].is_array()) throw IoError("dataset needs 'samples'");
  std::vector<Sample> samples;
  for (const auto& s : j["samples"]) {
    if (!s.contains("x") || !s.contains("y")) throw IoError("sample needs 'x' and 'y'");
    samples.push_back({vector_from_json(s["x"]), vector_from_json(s["y"]), number(s, "w", 1.0)});
  }
  try {
    return EmpiricalMeasure(std::move(samples));
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

EmpiricalMeasure measure_from_csv(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV dataset");
  const auto header = split(line);
  std::vector<std::size_t> xs, ys;
  std::optional<std::size_t> wcol;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind("x_", 0) == 0) {
      xs.push_back(c);
    } else if (header[c].rfind("y_", 0) == 0) {
      ys.push_back(c);
    } else if (header[c] == "w") {
      wcol = c;
    } else {
      throw IoError("unexpected CSV column: " + header[c]);
    }
  }
  if (xs.empty() || ys.empty()) throw IoError("CSV dataset needs x_ and y_ columns");
  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw IoError("CSV row has wrong number of cells");
    auto cell = [&](std::size_t c) { return parse_point(cells[c]); };
    Sample s;
    s.x.resize(static_cast<Index>(xs.size()));
    s.y.resize(static_cast<Index>(ys.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) s.x(static_cast<Index>(i)) = cell(xs[i]);
    for (std::size_t i = 0; i < ys.size(); ++i) s.y(static_cast<Index>(i)) = cell(ys[i]);
    s.w = wcol ? cell(*wcol) : 1.0;
    samples.push_back(std::move(s));
  }
  try {
    return EmpiricalMeasure(std::move(samples));
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
}

std::string measure_to_csv(const EmpiricalMeasure& m) {
  std::string out;
  for (Index i = 0; i < m.input_dim(); ++i) out += "x_" + std::to_string(i) + ",";
  for (Index i = 0; i < m.output_dim(); ++i) out += "y_" + std::to_string(i) + ",";
  out += "w\n";
  for (const auto& s : m.samples()) {
    for (Index i = 0; i < s.x.size(); ++i) out += format_double(s.x(i)) + ",";
    for (Index i = 0; i < s.y.size(); ++i) out += format_double(s.y(i)) + ",";
    out += format_double(s.w) + "\n";
  }
  return out;
}

EmpiricalMeasure load_measure(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return measure_from_csv(read_text(path));
  if (ext == ".json") return measure_from_json(read_json(path));
  throw IoError("dataset must be .json or .csv: " + path.string());
}

void write_binary(const std::filesystem::path& path, const VectorXd& v) {
  std::string bytes(static_cast<std::size_t>(v.size()) * 8, '\0');
  for (Index i = 0; i < v.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(v(i));
    for (int b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(i) * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  write_text(path, bytes);
}

VectorXd read_binary(const std::filesystem::path& path) {
  const auto bytes = read_text(path);
  if (bytes.size() % 8 != 0) throw IoError("binary vector size is not a multiple of 8: " + path.string());
  VectorXd v(static_cast<Index>(bytes.size() / 8));
  for (Index i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[static_cast<std::size_t>(i) * 8 + b])) << (8 * b);
    v(i) = std::bit_cast<double>(bits);
  }
  return v;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace gengrad
