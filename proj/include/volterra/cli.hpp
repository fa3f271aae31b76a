#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace volterra::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 64;

struct RunConfig {
  std::string command;
  double alpha = 0.25;
  double xi = 0.75;
  double c = 0.5;          // diffusion scale of the power coefficients
  double drift_a = 0.5;
  double drift_b = -0.5;
  double x0 = 1.0;
  double T = 1.0;
  std::size_t base_steps = 2;
  int level = 8;
  std::size_t seeds = 1;
  std::uint64_t first_seed = 1;
  double x_max = 2.0;
  std::size_t space_nodes = 101;
  std::string kernel_normalization = "plain";
  std::string out_dir = ".";
  std::string format = "csv";
  bool force = false;
  // densities
  double t = 1.0;
  std::string x_grid = "-2:2:81";
  // yw-table
  int n_max = 8;
  double eta = 4.0;
  // uniqueness
  int iterations = 60;
  // optional coefficient block overriding xi/c/drift
  std::optional<nlohmann::json> coefficients;
};

/// Field names match the flag names with '-' replaced by '_'.
nlohmann::json to_json(const RunConfig& c);
/// Overlays keys present in `j` onto `base`. Throws std::invalid_argument.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);
/// Throws std::invalid_argument with a message naming the offending field.
void validate(const RunConfig& c);

std::vector<std::uint64_t> seed_list(const RunConfig& c);

/// "%.17g".
std::string format_number(double v);

/// Executes a validated config, writing artifacts and manifest.json into
/// out_dir. Returns the process exit code.
int run(const RunConfig& config, std::ostream& log);

/// Full command-line entry point.
int main(int argc, char** argv);

}  // namespace volterra::cli
