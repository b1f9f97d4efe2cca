#ifndef GENGRAD_IO_HPP_
#define GENGRAD_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gengrad/risk.hpp"

namespace gengrad {

/// Malformed or unreadable input.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

/// %.17g
std::string format_double(double v);

Json to_json(const VectorXd& v);
VectorXd vector_from_json(const Json& j);

/// {"kind", "gamma", "kink_values": {point: value}, "approach_side"}; custom_pwl
/// additionally carries "knots" ([[x, y], ...]), "left_slope", "right_slope".
Json activation_to_json(const PiecewiseActivation& act);
/// Missing kink values fall back to the built-in defaults.
PiecewiseActivation activation_from_json(const Json& j);

/// {"widths": [...], "theta": [...]}
Json network_to_json(const Architecture& arch, const ParamVector& theta);
std::pair<Architecture, ParamVector> network_from_json(const Json& j);

/// {"samples": [{"x": [...], "y": [...], "w": 1.0}, ...]}
Json measure_to_json(const EmpiricalMeasure& m);
EmpiricalMeasure measure_from_json(const Json& j);
/// Header x_0..x_{p-1}, y_0..y_{q-1}, w.
EmpiricalMeasure measure_from_csv(const std::string& text);
std::string measure_to_csv(const EmpiricalMeasure& m);

/// Dispatches on the extension (.json or .csv).
EmpiricalMeasure load_measure(const std::filesystem::path& path);

/// Little-endian IEEE-754 binary64, no header.
void write_binary(const std::filesystem::path& path, const VectorXd& v);
VectorXd read_binary(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

}  // namespace gengrad

#endif  // GENGRAD_IO_HPP_
