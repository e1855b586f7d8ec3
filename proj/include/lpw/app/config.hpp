#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpw/bell_harness.hpp"
#include "lpw/relaxation.hpp"

namespace lpw::app {

enum class ExperimentKind { Oracle, PwChsh, LpwChsh, LpwEquivalence, Relax, SiTest, LhvBruteforce };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);
const std::vector<ExperimentKind>& all_experiments();

/// Every problem found while validating a configuration, reported together.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ScheduleConfig {
  double coupling_strength = 3.2;
  CouplingWindow wing1{0.0, 0.5};
  CouplingWindow wing2{0.5, 1.0};
  double t_read = 11.0;
  double packet_width = 2.0;
};

struct RelaxConfig {
  double kappa = 1.0;
  double dt = 0.2;
  bool internal_dynamics = false;
  bool renormalize_cells = false;
  std::size_t steps = 500;
  double mode_amplitude = 0.5;
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::Oracle;
  std::uint64_t master_seed = 1;
  std::string output_dir = "lpw-out";
  bool plots = false;

  std::size_t grid_points = 256;
  double domain_length = 64.0;
  PhysicalConstants constants;
  ScheduleConfig schedule;
  double dt = 0.02;
  std::size_t cell_count = 8;

  ChshQuad quad = standard_chsh_angles();
  SettingPolicy policy = FixedList{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  std::size_t n_runs = 16384;
  std::size_t steps = 100;
  std::size_t n_bins = 16;
  std::size_t n_mixtures = 1000;
  RelaxConfig relax;

  GridSpec grid() const { return GridSpec(grid_points, domain_length); }
  RingSpec ring() const { return RingSpec(cell_count, domain_length / static_cast<double>(cell_count)); }
  MeasurementSchedule measurement_schedule() const;
  EngineParams engine() const;
  RelaxationParams relaxation_params() const;
};

/// Defaults for an experiment before any user overrides.
RunConfig default_config(ExperimentKind kind);

/// Parses a JSON document on top of the experiment's defaults. Unknown keys,
/// wrong types and violated physical bounds are collected and thrown together
/// as ConfigError. An "experiment" key, when present, must match `kind`.
RunConfig parse_config(const std::string& text, ExperimentKind kind);

/// Checks cross-field constraints of an assembled config; throws ConfigError.
void validate(const RunConfig& config);

/// Complete config with every default filled in.
nlohmann::json echo(const RunConfig& config);

}  // namespace lpw::app
