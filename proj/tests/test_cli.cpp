#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include "reaper/config.hpp"
#include "reaper/errors.hpp"
#include "reaper/experiments.hpp"
#include "reaper/io.hpp"

namespace fs = std::filesystem;
using namespace reaper;

namespace {

const std::string kSmall = R"(name: small
experiment: single
scenario:
  kind: symmetric_cosh
  amplitude: 1
grid:
  kind: uniform
  nodes: 101
run:
  t_end: 2
  snapshot_interval: 0.1
diagnostics:
  resolution_study: false
output:
  dir: out/small
)";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("reaper-test-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

int config_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REAPER_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("presets round-trip through the canonical form") {
  const auto names = preset_names();
  CHECK(names.size() == 7);
  for (const auto& name : names) {
    CAPTURE(name);
    const RunConfig c = parse_config(preset_text(name));
    const std::string canonical = emit_config(c);
    CHECK(parse_config(canonical) == c);
    CHECK(emit_config(parse_config(canonical)) == canonical);
    CHECK(config_hash(c) == config_hash(parse_config(canonical)));
    CHECK(config_hash(c).size() == 64);
  }
  CHECK_THROWS_AS(preset_text("nope"), ConfigError);
}

TEST_CASE("hash changes with content but not with formatting") {
  const RunConfig a = parse_config(kSmall);
  const RunConfig b = parse_config("# leading comment\n" + replace(kSmall, "t_end: 2", "t_end: 2.0"));
  CHECK(config_hash(a) == config_hash(b));
  const RunConfig c = parse_config(replace(kSmall, "t_end: 2", "t_end: 2.5"));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("config errors carry the offending line") {
  CHECK(config_error_line(replace(kSmall, "  nodes: 101", "  nodes: 101\n  bogus: 1")) == 9);
  CHECK(config_error_line(replace(kSmall, "name: small", "nmae: small")) == 1);
  CHECK(config_error_line(replace(kSmall, "  t_end: 2", "  t_end: -2")) == 10);
  CHECK(config_error_line(replace(kSmall, "  amplitude: 1", "  amplitude: [1")) > 0);
  CHECK_THROWS_AS(parse_config("- just\n- a list\n"), ConfigError);
  try {
    parse_config(replace(kSmall, "name: small", "nmae: small"));
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("nmae") != std::string::npos);
  }
}

TEST_CASE("sweep expansion") {
  const std::string text = kSmall + "sweep:\n  run.t_end: [1, 1.5, -1]\n  grid.nodes: [51, 101]\n";
  const auto cells = expand_sweep(text);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].label == "run.t_end=1,grid.nodes=51");
  CHECK(cells[1].label == "run.t_end=1,grid.nodes=101");
  REQUIRE(cells[2].config);
  CHECK(cells[2].config->run.t_end == 1.5);
  CHECK(cells[2].config->grid.nodes == 51);
  CHECK(cells[2].config->name == "small-0002");
  CHECK(cells[2].config->sweep.empty());
  // a negative end time is rejected per cell; the others still expand
  CHECK_FALSE(cells[4].config);
  CHECK_FALSE(cells[4].error.empty());
  CHECK(cells[5].label == "run.t_end=-1,grid.nodes=101");

  CHECK(expand_sweep(kSmall).empty());
  CHECK(expand_sweep(kSmall + "sweep: {}\n").empty());
  CHECK_THROWS_AS(expand_sweep(kSmall + "sweep:\n  grid.nodes: []\n"), ConfigError);
  CHECK_THROWS_AS(expand_sweep(kSmall + "sweep:\n  grid.nodes: 5\n"), ConfigError);

  std::string big = kSmall + "sweep:\n";
  for (const char* axis : {"run.t_end", "run.snapshot_interval", "seed"}) {
    big += std::string("  ") + axis + ": [";
    for (int i = 0; i < 30; ++i) big += (i ? ", " : "") + std::to_string(i + 1);
    big += "]\n";
  }
  CHECK_THROWS_AS(expand_sweep(big), ConfigError);
}

TEST_CASE("CSV and JSON carry provenance") {
  const Provenance prov{std::string(64, 'a')};
  CsvTable t{{"t", "u"}, {}};
  t.add_row({0.0, 1.0});
  t.add_row({0.1, 1.0000000000000002});
  const std::string text = t.render(prov);
  CHECK(text.rfind("# config_sha256=" + std::string(64, 'a'), 0) == 0);
  const ParsedCsv parsed = parse_csv(text);
  CHECK(parsed.provenance.find("config_sha256=") != std::string::npos);
  CHECK(parsed.header == std::vector<std::string>{"t", "u"});
  REQUIRE(parsed.rows.size() == 2);
  CHECK(parsed.rows[1][1] == 1.0000000000000002);
  CHECK_THROWS_AS(parse_csv("# x\nt,u\n1,oops\n"), StoreError);

  const std::string json = render_json({{"a", 1}}, prov);
  CHECK(json.back() == '\n');
  CHECK(nlohmann::json::parse(json)["provenance"]["config_sha256"] == std::string(64, 'a'));

  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("trajectory store round trip and corruption") {
  TempDir tmp("store");
  const RunConfig config = parse_config(kSmall);
  const ExperimentOutcome out = run_experiment(config);
  REQUIRE(out.primary);
  save_trajectory(tmp.path / "store", config, *out.primary);

  const StoredRun loaded = load_trajectory(tmp.path / "store");
  CHECK(loaded.config == config);
  REQUIRE(loaded.trajectory.snapshots.size() == out.primary->snapshots.size());
  for (std::size_t k = 0; k < loaded.trajectory.snapshots.size(); ++k) {
    CHECK(loaded.trajectory.snapshots[k].t == out.primary->snapshots[k].t);
    CHECK(loaded.trajectory.snapshots[k].u == out.primary->snapshots[k].u);
  }

  // flip one digit in a snapshot file: the checksum must catch it
  fs::path victim;
  for (const auto& e : fs::recursive_directory_iterator(tmp.path / "store"))
    if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "grid.csv") victim = e.path();
  REQUIRE_FALSE(victim.empty());
  std::string bytes = read_file(victim);
  const auto pos = bytes.find_last_of("123456789");
  bytes[pos] = bytes[pos] == '1' ? '2' : '1';
  write_file(victim, bytes);
  CHECK_THROWS_AS(load_trajectory(tmp.path / "store"), StoreError);

  fs::remove(victim);
  CHECK_THROWS_AS(load_trajectory(tmp.path / "store"), StoreError);
  CHECK_THROWS_AS(load_trajectory(tmp.path / "missing"), StoreError);
}

TEST_CASE("resuming matches an uninterrupted run") {
  TempDir tmp("resume");
  const RunConfig short_run = parse_config(replace(kSmall, "t_end: 2", "t_end: 1"));
  const RunConfig long_run = parse_config(kSmall);
  const ExperimentOutcome first = run_experiment(short_run);
  write_outcome(first, tmp.path);
  const ExperimentOutcome resumed = resume_experiment(load_trajectory(tmp.path / "store"), 2.0);
  const ExperimentOutcome direct = run_experiment(long_run);
  REQUIRE(resumed.primary);
  REQUIRE(direct.primary);
  REQUIRE(resumed.primary->snapshots.size() == direct.primary->snapshots.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < direct.primary->snapshots.size(); ++k) {
    CHECK(resumed.primary->snapshots[k].t == direct.primary->snapshots[k].t);
    worst = std::max(worst, (resumed.primary->snapshots[k].u - direct.primary->snapshots[k].u).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
  CHECK_THROWS_AS(resume_experiment(load_trajectory(tmp.path / "store"), 0.5), StoreError);
}

TEST_CASE("reruns are byte identical") {
  TempDir tmp("rerun");
  const RunConfig config = parse_config(kSmall);
  write_outcome(run_experiment(config), tmp.path / "a");
  write_outcome(run_experiment(config, 2), tmp.path / "b");
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(tmp.path / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), tmp.path / "a");
    CAPTURE(rel.string());
    CHECK(read_file(e.path()) == read_file(tmp.path / "b" / rel));
    ++files;
  }
  CHECK(files > 10);
}

TEST_CASE("command-line exit codes") {
  TempDir tmp("cli");
  CHECK(run_cli("presets") == 0);
  CHECK(run_cli("presets theorem") == 0);
  CHECK(run_cli("presets nope") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);

  const fs::path bad = tmp.path / "bad.yaml";
  write_file(bad, replace(kSmall, "  nodes: 101", "  nodes: 101\n  bogus: 1"));
  CHECK(run_cli("run --config " + bad.string() + " --out " + (tmp.path / "bad_out").string()) == 2);
  CHECK_FALSE(fs::exists(tmp.path / "bad_out"));

  const fs::path empty = tmp.path / "empty.yaml";
  write_file(empty, kSmall + "sweep: {}\n");
  CHECK(run_cli("sweep --config " + empty.string() + " --out " + (tmp.path / "sweep").string()) == 0);
  CHECK(fs::exists(tmp.path / "sweep" / "sweep_summary.csv"));

  const fs::path good = tmp.path / "good.yaml";
  write_file(good, kSmall);
  const fs::path run_dir = tmp.path / "run";
  // the short symmetric run fails its shape check, which maps to exit 1
  CHECK(run_cli("run --quiet --config " + good.string() + " --out " + run_dir.string()) == 1);
  CHECK(fs::exists(run_dir / "store" / "manifest.json"));
  CHECK(run_cli("report --quiet " + run_dir.string()) == 1);
  CHECK(run_cli("report --quiet " + (tmp.path / "nowhere").string()) == 4);
  CHECK(run_cli("resume --quiet " + run_dir.string() + " --t-end 1") == 4);
}
