#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "orlat/vertex.hpp"
#include "orlat/weights.hpp"

namespace orlat {

enum class Process { Theta, Fgrid, Branching, Sir, Contact, Couple, Gap, RwalkCollide, RwalkBound };

std::string_view to_string(Process p) noexcept;
/// Accepts the CLI spellings ("rwalk-collide" / "rwalk-bound" for the walks).
std::optional<Process> parse_process(std::string_view name) noexcept;

struct ExperimentConfig {
  Process process = Process::Theta;
  RawLaw weights_raw;
  WeightSpec weights = WeightSpec::constant(1.0);
  std::vector<double> lambdas{2.0};
  std::vector<std::uint32_t> dims{8};
  std::uint64_t n_runs = 1000;
  double confidence = 0.99;
  std::uint64_t master_seed = 1;
  /// Generation horizon (branching 200, sir 150) or walk horizon (1000).
  std::uint64_t horizon = 0;
  double t_max = 300.0;
  /// Branching 10^5, lattice 5·10^4.
  std::uint64_t pop_cap = 0;
  std::vector<Vertex> initial{Vertex{}};
  std::optional<double> root_weight;
  int grid_points = 129;
  double tol = 1e-10;
  /// Coupling/gap σ; the window policy is used when absent.
  std::optional<double> sigma;
  Vertex walk_x;
  Vertex walk_y = Vertex::unit(0);
  std::vector<Vertex> bound_set{Vertex{}};
  bool fgrid_oracle = true;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> quenched_seed;
  unsigned jobs = 1;
  bool log = false;
  bool dump = false;
};

/// Parses TOML text. `process` comes from the subcommand; a `process` key in
/// the file must agree with it. Throws ConfigInvalid (or a weight-law error
/// code) on any problem.
ExperimentConfig parse_config(std::string_view text, Process process);
ExperimentConfig load_config(const std::filesystem::path& path, Process process);

/// Normalized echo of the configuration for reports.
nlohmann::json config_echo(const ExperimentConfig& config);
nlohmann::json weights_echo(const WeightSpec& spec);

}  // namespace orlat
