#pragma once

// Run configuration: a YAML document with fixed sections. Every key is
// checked against the schema (unknown keys are errors) and every parameter
// domain is validated before any compute starts. `emit_config` writes the
// canonical form; parse(emit(c)) == c for every valid c.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reaper/boundary.hpp"
#include "reaper/grid.hpp"
#include "reaper/scenarios.hpp"
#include "reaper/solver.hpp"

namespace reaper {

enum class ExperimentKind {
  Single,         // one trajectory plus its diagnostics
  Sandwich,       // trajectory, psi companion and the shifted ordering checks
  NeumannOracle,  // exact-wave runs and the refinement study
  ZeroNumber,     // seeded crossing pairs, intersection counts
  Comparison,     // seeded ordered pairs, per-step ordering
};

std::string to_string(ExperimentKind kind);

enum class ScenarioKind { SymmetricCosh, Psi, PerturbedCosh, TravelingWave };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::SymmetricCosh;
  double amplitude = 1.0;  // cosh families
  double delta = 1.0;      // psi
  Bump bump;               // perturbed_cosh
  double h = 1.0;          // traveling_wave; defaults to the Neumann slope
  double offset = 0.0;     // traveling_wave

  InitialData build() const;
  bool operator==(const ScenarioSpec&) const = default;
};

struct GridSpec {
  GridKind kind = GridKind::Graded;
  Eigen::Index nodes = 601;
  double beta = 3.0;

  Grid build() const;
  bool operator==(const GridSpec&) const = default;
};

struct RunSpec {
  double t_end = 15.0;
  double snapshot_interval = 0.1;

  bool operator==(const RunSpec&) const = default;
};

/// Parameters of the checks run on a trajectory. Windows are [lo, hi] pairs.
struct DiagnosticsSpec {
  bool enabled = true;
  double epsilon = 0.1;            // wall band width for the M1 check
  double h0 = 2.0;                 // lower envelope slope parameter
  double shape_half_width = 0.8;   // shape error is taken over |x| <= this
  double shape_tol = 2e-2;
  double shape_window = 5.0;       // trailing time span for the monotone-shape check
  double shape_rate_tol = 1e-3;    // allowed growth of the shape error per unit time
  double speed_lo = 10.0;
  double speed_hi = 15.0;
  double speed_tol = 0.02;
  double envelope_after = 5.0;
  double envelope_lo = 0.1;
  double envelope_hi = 0.8;
  double envelope_tol = 1e-2;
  double lower_bound_tol = 1e-8;
  double ordering_tol = 1e-8;
  double symmetry_tol = 1e-10;
  double psi_delta = 1.0;
  /// Repeat single-trajectory runs on a grid with twice the intervals and
  /// record how far the checked quantities move (resolution.csv).
  bool resolution_study = true;

  bool operator==(const DiagnosticsSpec&) const = default;
};

/// Exact-wave and refinement runs of the neumann-oracle experiment.
struct OracleSpec {
  std::vector<double> h_values{0.5, 1.0, 2.0};
  Eigen::Index nodes = 401;
  double t_end = 2.0;
  double dt_init = 1e-3;
  double tol = 1e-3;
  std::vector<Eigen::Index> refinement_nodes{101, 201, 401, 801};
  double refinement_h = 1.0;
  double refinement_dt = 1e-4;
  double refinement_t_end = 1.0;
  double min_order = 1.9;

  bool operator==(const OracleSpec&) const = default;
};

/// Seeded pair suites (zero-number and comparison experiments).
struct SuiteSpec {
  int pairs = 20;
  std::vector<int> crossings{1, 3, 5};
  double dt = 1e-3;
  double ordering_tol = 1e-10;

  bool operator==(const SuiteSpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  bool plots = true;

  bool operator==(const OutputSpec&) const = default;
};

/// One swept parameter: dotted path (e.g. "boundary.h") and its values, kept
/// as YAML scalar text so they splice back into the document unchanged.
struct SweepAxis {
  std::string path;
  std::vector<std::string> values;

  bool operator==(const SweepAxis&) const = default;
};

struct RunConfig {
  std::string name = "run";
  ExperimentKind experiment = ExperimentKind::Single;
  std::uint64_t seed = 0;
  ScenarioSpec scenario;
  BoundaryCondition boundary = NonlinearRobin{};
  GridSpec grid;
  StepController controller;
  RunSpec run;
  DiagnosticsSpec diagnostics;
  OracleSpec oracle;
  SuiteSpec suite;
  OutputSpec output;
  std::vector<SweepAxis> sweep;

  Problem problem() const;
  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. Throws ConfigError carrying the offending line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical YAML: fixed key order, doubles in shortest round-trip form.
std::string emit_config(const RunConfig& config);

/// Lowercase hex SHA-256 of emit_config(config).
std::string config_hash(const RunConfig& config);

/// One cell of a parameter sweep. Cells whose spliced config fails
/// validation keep the error instead of a config so the sweep can go on.
struct SweepCell {
  std::string label;  // "path=value,path=value"
  std::optional<RunConfig> config;
  std::string error;
};

/// Cartesian product of the sweep axes applied to `text` (the sweep section
/// itself is dropped from every cell). No axes gives no cells. Errors in the
/// base document or more than kMaxSweepCells cells throw ConfigError.
std::vector<SweepCell> expand_sweep(const std::string& text);

/// Largest number of sweep cells accepted.
inline constexpr std::size_t kMaxSweepCells = 10000;

/// Presets compiled into the binary.
std::vector<std::string> preset_names();
/// YAML text of a preset; ConfigError for unknown names.
std::string preset_text(const std::string& name);

}  // namespace reaper
