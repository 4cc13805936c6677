#pragma once

// Orchestration of the configured experiments: integrate, run the matching
// diagnostics and collect everything that gets written to the run directory.

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reaper/config.hpp"
#include "reaper/diagnostics.hpp"
#include "reaper/io.hpp"
#include "reaper/solver.hpp"

namespace reaper {

using Logger = std::function<void(const std::string&)>;

struct ExperimentOutcome {
  RunConfig config;
  std::string config_hash;
  DiagnosticsReport report;
  nlohmann::json summary = nlohmann::json::object();
  std::optional<Trajectory> primary;
  std::optional<Trajectory> companion;  // psi run of the sandwich experiment
  /// Extra artifacts: path relative to the run directory, CSV table.
  std::vector<std::pair<std::string, CsvTable>> tables;
  /// Extra JSON documents (provenance is added on write).
  std::vector<std::pair<std::string, nlohmann::json>> documents;
  bool solver_failed = false;
  std::string failure;

  bool ok() const { return !solver_failed && report.all_pass(); }
};

/// Runs whatever `config.experiment` selects. Solver failures are caught and
/// recorded (with the partial trajectory when there is one); `jobs` bounds the
/// worker threads used for independent sub-runs.
ExperimentOutcome run_experiment(const RunConfig& config, unsigned jobs = 1, const Logger& log = {});

/// Continues a stored single-trajectory run to `t_end` and re-diagnoses it.
/// Refuses other experiment kinds and targets before the stored end time.
ExperimentOutcome resume_experiment(const StoredRun& stored, double t_end, const Logger& log = {});

/// Jacobian integrity over seeded random smooth states for every boundary
/// family on a uniform and a graded grid, plus the neumann-oracle runs of
/// `config`. Drives the `verify` subcommand.
ExperimentOutcome verification_suite(const RunConfig& config, unsigned jobs = 1, const Logger& log = {});

/// Maximum relative deviation accepted by the Jacobian check.
inline constexpr double kJacobianTol = 1e-6;
/// Perturbation scale handed to jacobian_fd_check.
inline constexpr double kJacobianScale = 1e-5;

/// Re-diagnoses a stored run without integrating.
ExperimentOutcome report_experiment(const StoredRun& stored);

/// Checks applied to one trajectory of a single or sandwich experiment.
DiagnosticsReport diagnose_trajectory(const RunConfig& config, const Trajectory& traj);

/// t, u(0,t), u(+-1,t), wall slopes, shape error, grim-reaper crossings.
CsvTable time_series(const RunConfig& config, const Trajectory& traj);

/// Sandwich shift: first snapshot time at which min u(., t; psi) > max u0.
std::optional<double> sandwich_shift(const Trajectory& psi, double max_initial);

/// Writes summary.json, diagnostics.json, the trajectory store(s), the time
/// series, extra tables and (when enabled) SVG plots below `dir`.
void write_outcome(const ExperimentOutcome& outcome, const std::filesystem::path& dir);

}  // namespace reaper
