// Command-line front end: run, sweep, resume, verify, report, presets.
//
// Exit status: 0 all checks passed, 1 some check failed, 2 bad usage or
// config (nothing written), 3 solver failure (partial artifacts written),
// 4 unusable trajectory store.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "reaper/config.hpp"
#include "reaper/errors.hpp"
#include "reaper/experiments.hpp"
#include "reaper/io.hpp"
#include "reaper/parallel.hpp"

namespace fs = std::filesystem;
using namespace reaper;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;
constexpr int kExitStore = 4;

struct Common {
  std::string config_path;
  std::string preset;
  std::string out;
  unsigned jobs = 0;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

unsigned job_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

Logger make_logger(bool quiet) {
  if (quiet) return {};
  auto mutex = std::make_shared<std::mutex>();
  return [mutex](const std::string& msg) {
    std::lock_guard<std::mutex> lock(*mutex);
    std::cerr << msg << '\n';
  };
}

std::string config_text(const Common& c) {
  if (!c.config_path.empty() && !c.preset.empty()) throw ConfigError("give either --config or --preset, not both");
  if (!c.preset.empty()) return preset_text(c.preset);
  if (c.config_path.empty()) throw ConfigError("a config is required (--config PATH or --preset NAME)");
  return read_file(c.config_path);
}

void print_report(const ExperimentOutcome& outcome, bool quiet) {
  if (quiet) return;
  for (const auto& c : outcome.report.checks) {
    fmt::print("{:<5} {:<36} margin {:+.3e}{}\n", c.pass ? "PASS" : "FAIL", c.name, c.worst_margin,
               c.informational ? "  (informational)" : "");
  }
  if (outcome.solver_failed) fmt::print("solver failure: {}\n", outcome.failure);
}

int status_of(const ExperimentOutcome& outcome) {
  if (outcome.solver_failed) return kExitSolver;
  return outcome.report.all_pass() ? 0 : kExitChecksFailed;
}

fs::path output_dir(const Common& c, const RunConfig& config) { return fs::path(c.out.empty() ? config.output.dir : c.out); }

int cmd_run(const Common& c) {
  RunConfig config = parse_config(config_text(c));
  if (!config.sweep.empty()) throw ConfigError("config has a 'sweep' section; use the sweep subcommand");
  if (c.seed) config.seed = *c.seed;
  const fs::path dir = output_dir(c, config);
  const ExperimentOutcome outcome = run_experiment(config, job_count(c.jobs), make_logger(c.quiet));
  write_outcome(outcome, dir);
  print_report(outcome, c.quiet);
  if (!c.quiet) fmt::print("artifacts: {}\n", dir.string());
  return status_of(outcome);
}

int cmd_sweep(const Common& c) {
  const std::string text = config_text(c);
  std::vector<SweepCell> cells = expand_sweep(text);
  const RunConfig base = parse_config(text);
  const fs::path dir = output_dir(c, base);
  if (c.seed) {
    for (auto& cell : cells)
      if (cell.config) cell.config->seed = *c.seed;
  }
  const Logger log = make_logger(c.quiet);

  struct CellResult {
    std::string status;
    std::string detail;
    bool pass = false;
    nlohmann::json summary;
  };
  // Cells are the unit of parallelism; each runs single-threaded and writes
  // only below its own directory.
  const auto results = parallel_map(cells.size(), job_count(c.jobs), [&](std::size_t i) {
    CellResult r;
    const SweepCell& cell = cells[i];
    if (!cell.config) {
      r.status = "config_error";
      r.detail = cell.error;
      return r;
    }
    try {
      const ExperimentOutcome outcome = run_experiment(*cell.config, 1, {});
      write_outcome(outcome, dir / cell.config->name);
      r.status = outcome.solver_failed ? "solver_failure" : "completed";
      r.detail = outcome.failure;
      r.pass = outcome.ok();
      r.summary = outcome.summary;
    } catch (const std::exception& e) {
      r.status = "error";
      r.detail = e.what();
    }
    if (log) log(fmt::format("cell {} [{}]: {}{}{}", i, cell.label, r.status, r.detail.empty() ? "" : ": ", r.detail));
    return r;
  });

  auto number = [](const nlohmann::json& j, const char* key) {
    return j.is_object() && j.contains(key) && j[key].is_number() ? format_double(j[key].get<double>()) : std::string();
  };
  CsvTable table{{"cell", "name", "parameters", "status", "pass", "speed_estimate", "shape_error_final", "observed_order", "detail"}, {}};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& r = results[i];
    table.rows.push_back({std::to_string(i), cells[i].config ? cells[i].config->name : "", cells[i].label, r.status,
                          r.pass ? "1" : "0", number(r.summary, "speed_estimate"), number(r.summary, "shape_error_final"),
                          number(r.summary, "observed_order"), r.detail});
  }
  write_file(dir / "sweep_summary.csv", table.render(Provenance{config_hash(base)}));
  if (!c.quiet) {
    fmt::print("{:>4}  {:<40} {:<16} {:>4} {:>18} {:>18}\n", "cell", "parameters", "status", "pass", "speed", "shape_error");
    for (const auto& row : table.rows) {
      fmt::print("{:>4}  {:<40} {:<16} {:>4} {:>18} {:>18}\n", row[0], row[2], row[3], row[4], row[5], row[6]);
    }
    fmt::print("summary: {}\n", (dir / "sweep_summary.csv").string());
  }
  const bool all = std::all_of(results.begin(), results.end(), [](const CellResult& r) { return r.pass; });
  return all ? 0 : kExitChecksFailed;
}

fs::path store_dir(const std::string& path) {
  const fs::path p(path);
  if (fs::exists(p / "manifest.json")) return p;
  if (fs::exists(p / "store" / "manifest.json")) return p / "store";
  throw StoreError(fmt::format("'{}' is neither a trajectory store nor a run directory holding one", path));
}

fs::path run_dir_of(const fs::path& store) {
  return store.filename() == "store" ? store.parent_path() : store;
}

int cmd_resume(const Common& c, const std::string& path, double t_end) {
  const fs::path store = store_dir(path);
  const StoredRun stored = load_trajectory(store);
  const ExperimentOutcome outcome = resume_experiment(stored, t_end, make_logger(c.quiet));
  const fs::path dir = c.out.empty() ? run_dir_of(store) : fs::path(c.out);
  write_outcome(outcome, dir);
  print_report(outcome, c.quiet);
  if (!c.quiet) fmt::print("artifacts: {}\n", dir.string());
  return status_of(outcome);
}

int cmd_report(const Common& c, const std::string& path) {
  const fs::path store = store_dir(path);
  const StoredRun stored = load_trajectory(store);
  const ExperimentOutcome outcome = report_experiment(stored);
  const fs::path dir = c.out.empty() ? run_dir_of(store) : fs::path(c.out);
  write_outcome(outcome, dir);
  print_report(outcome, c.quiet);
  if (!c.quiet) fmt::print("artifacts: {}\n", dir.string());
  return status_of(outcome);
}

int cmd_verify(const Common& c) {
  RunConfig config = parse_config(c.config_path.empty() && c.preset.empty() ? preset_text("neumann-oracle") : config_text(c));
  if (c.seed) config.seed = *c.seed;
  const ExperimentOutcome outcome = verification_suite(config, job_count(c.jobs), make_logger(c.quiet));
  if (!c.out.empty()) write_outcome(outcome, c.out);
  print_report(outcome, c.quiet);
  return status_of(outcome);
}

int cmd_presets(const std::string& name) {
  if (name.empty()) {
    for (const auto& n : preset_names()) fmt::print("{}\n", n);
  } else {
    fmt::print("{}", emit_config(parse_config(preset_text(name))));
  }
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool with_config) {
  if (with_config) {
    sub->add_option("--config", c.config_path, "YAML run configuration");
    sub->add_option("--preset", c.preset, "built-in preset name (see 'presets')");
  }
  sub->add_option("--out", c.out, "output directory (overrides output.dir)");
  sub->add_option("--jobs", c.jobs, "worker threads (default: hardware concurrency)");
  sub->add_option("--seed", c.seed, "seed for the randomized suites (overrides the config)");
  sub->add_flag("--quiet", c.quiet, "suppress progress and the check table");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvature flow on a band: simulation, diagnostics and verification"};
  app.require_subcommand(1);

  Common common;
  auto* run = app.add_subcommand("run", "integrate a configured experiment and write its artifacts");
  add_common(run, common, true);
  auto* sweep = app.add_subcommand("sweep", "run every cell of the config's parameter grid");
  add_common(sweep, common, true);

  std::string path;
  double t_end = 0.0;
  auto* resume = app.add_subcommand("resume", "continue a stored run to a later end time");
  resume->add_option("path", path, "run directory or trajectory store")->required();
  resume->add_option("--t-end", t_end, "new end time")->required();
  add_common(resume, common, false);

  auto* verify = app.add_subcommand("verify", "Jacobian, exact-wave and refinement checks");
  add_common(verify, common, true);

  auto* report = app.add_subcommand("report", "re-render summaries and plots from a stored run");
  report->add_option("path", path, "run directory or trajectory store")->required();
  add_common(report, common, false);

  std::string preset_name;
  auto* presets = app.add_subcommand("presets", "list presets, or print one in canonical form");
  presets->add_option("name", preset_name, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(common);
    if (*sweep) return cmd_sweep(common);
    if (*resume) return cmd_resume(common, path, t_end);
    if (*verify) return cmd_verify(common);
    if (*report) return cmd_report(common, path);
    if (*presets) return cmd_presets(preset_name);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitUsage;
  } catch (const StoreError& e) {
    fmt::print(stderr, "store error: {}\n", e.what());
    return kExitStore;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitSolver;
  }
  return kExitUsage;
}
