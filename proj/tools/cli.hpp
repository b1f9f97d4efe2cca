#ifndef GENGRAD_TOOLS_CLI_HPP_
#define GENGRAD_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gengrad/fixtures.hpp"
#include "gengrad/io.hpp"

namespace gengrad::cli {

enum ExitCode { kOk = 0, kToleranceFailure = 1, kConfigError = 2 };

struct ExperimentConfig {
  explicit ExperimentConfig(Fixture f) : problem(std::move(f)) {}

  Fixture problem;
  std::string eta = "smoothstep";
  std::vector<long> n_schedule;
  std::vector<double> radii{1e-2, 1e-4, 1e-6, 1e-8};
  std::size_t n_dirs = 8;
  double h = 1e-5;
  double grid_min = -1.0;
  double grid_max = 1.0;
  double grid_step = 1e-3;
  std::vector<long> n_values{1, 4, 16};
  double ball_radius = 1.0;
  std::size_t n_pairs = 10000;
  std::uint64_t seed = 0;
};

/// Relative paths inside the config resolve against its directory. Throws
/// IoError on any invalid field, missing file or violated invariant.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

/// Parses `args` (without the program name) and runs one command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gengrad::cli

#endif  // GENGRAD_TOOLS_CLI_HPP_
