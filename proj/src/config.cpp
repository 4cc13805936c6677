#include "reaper/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "reaper/errors.hpp"
#include "reaper/io.hpp"

namespace reaper {

namespace detail {
const std::vector<std::pair<std::string, std::string>>& preset_table();
}

namespace {

int line_of(const YAML::Node& node) {
  // a missing key comes back as an undefined node whose Mark() throws
  if (!node.IsDefined()) return 0;
  const YAML::Mark m = node.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

// A mapping node whose keys are consumed one by one; finish() rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string name, int fallback_line) : node_(std::move(node)), name_(std::move(name)) {
    line_ = line_of(node_);
    if (line_ == 0) line_ = fallback_line;
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", name_), line_);
  }

  bool present() const { return node_ && node_.IsMap(); }
  int line() const { return line_; }
  const std::string& name() const { return name_; }

  YAML::Node take(const std::string& key) {
    seen_.insert(key);
    if (!present()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& view = node_;  // const lookup never inserts
    return view[key];
  }

  int line_for(const std::string& key) const {
    if (!present()) return line_;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (it->first.Scalar() == key) return line_of(it->first);
    }
    return line_;
  }

  template <class T>
  T scalar(const std::string& key, T fallback) {
    const YAML::Node v = take(key);
    if (!v) return fallback;
    return convert<T>(v, key);
  }

  double real(const std::string& key, double fallback) {
    const double v = scalar<double>(key, fallback);
    if (!std::isfinite(v)) throw ConfigError(fmt::format("{} must be finite", qualified(key)), line_for(key));
    return v;
  }

  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> fallback) {
    const YAML::Node v = take(key);
    if (!v) return fallback;
    if (!v.IsSequence()) throw ConfigError(fmt::format("{} must be a list", qualified(key)), line_of(v));
    std::vector<T> out;
    for (const auto& item : v) out.push_back(convert<T>(item, key));
    return out;
  }

  Section child(const std::string& key) {
    const YAML::Node v = take(key);
    return Section(v, qualified(key), line_for(key));
  }

  void finish() const {
    if (!present()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.Scalar();
      if (!seen_.count(key)) throw ConfigError(name_.empty() ? fmt::format("unknown top-level key '{}'", key)
                                                   : fmt::format("unknown key '{}' in '{}'", key, name_), line_of(it->first));
    }
  }

  void require(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) throw ConfigError(fmt::format("{} {}", qualified(key), what), line_for(key));
  }

 private:
  std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  template <class T>
  T convert(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) throw ConfigError(fmt::format("{} must be a scalar", qualified(key)), line_of(v));
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(fmt::format("{}: cannot read '{}' as {}", qualified(key), v.Scalar(), type_name<T>()),
                        line_of(v));
    }
  }

  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  YAML::Node node_;
  std::string name_;
  int line_ = 0;
  std::set<std::string> seen_;
};

ExperimentKind parse_experiment(const std::string& s, int line) {
  if (s == "single") return ExperimentKind::Single;
  if (s == "sandwich") return ExperimentKind::Sandwich;
  if (s == "neumann-oracle") return ExperimentKind::NeumannOracle;
  if (s == "zero-number") return ExperimentKind::ZeroNumber;
  if (s == "comparison") return ExperimentKind::Comparison;
  throw ConfigError(fmt::format("unknown experiment '{}' (single, sandwich, neumann-oracle, zero-number, comparison)", s),
                    line);
}

std::string scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SymmetricCosh: return "symmetric_cosh";
    case ScenarioKind::Psi: return "psi";
    case ScenarioKind::PerturbedCosh: return "perturbed_cosh";
    case ScenarioKind::TravelingWave: return "traveling_wave";
  }
  return "?";
}

ScenarioSpec parse_scenario(Section sec) {
  ScenarioSpec s;
  const std::string kind = sec.scalar<std::string>("kind", "symmetric_cosh");
  if (kind == "symmetric_cosh") {
    s.kind = ScenarioKind::SymmetricCosh;
    s.amplitude = sec.real("amplitude", s.amplitude);
  } else if (kind == "psi") {
    s.kind = ScenarioKind::Psi;
    s.delta = sec.real("delta", s.delta);
    sec.require(s.delta > 0.0, "delta", "must be positive");
  } else if (kind == "perturbed_cosh") {
    s.kind = ScenarioKind::PerturbedCosh;
    s.amplitude = sec.real("amplitude", s.amplitude);
    Section bump = sec.child("bump");
    s.bump.amplitude = bump.real("amplitude", s.bump.amplitude);
    s.bump.center = bump.real("center", s.bump.center);
    s.bump.width = bump.real("width", s.bump.width);
    bump.require(s.bump.width > 0.0, "width", "must be positive");
    bump.finish();
  } else if (kind == "traveling_wave") {
    s.kind = ScenarioKind::TravelingWave;
    s.h = sec.real("h", s.h);
    s.offset = sec.real("offset", s.offset);
    sec.require(s.h > 0.0, "h", "must be positive");
  } else {
    throw ConfigError(fmt::format("unknown scenario kind '{}'", kind), sec.line_for("kind"));
  }
  sec.finish();
  return s;
}

BoundaryCondition parse_boundary(Section sec) {
  const std::string kind = sec.scalar<std::string>("kind", "nonlinear_robin");
  BoundaryCondition bc;
  if (kind == "nonlinear_robin") {
    bc = NonlinearRobin{};
  } else if (kind == "neumann") {
    ConstantNeumann n;
    n.h = sec.real("h", n.h);
    sec.require(n.h > 0.0, "h", "must be positive");
    bc = n;
  } else if (kind == "affine_robin") {
    AffineRobin a;
    a.alpha_minus = sec.real("alpha_minus", a.alpha_minus);
    a.alpha_plus = sec.real("alpha_plus", a.alpha_plus);
    a.beta_minus = sec.real("beta_minus", a.beta_minus);
    a.beta_plus = sec.real("beta_plus", a.beta_plus);
    bc = a;
  } else {
    throw ConfigError(fmt::format("unknown boundary kind '{}' (nonlinear_robin, neumann, affine_robin)", kind),
                      sec.line_for("kind"));
  }
  sec.finish();
  return bc;
}

GridSpec parse_grid(Section sec) {
  GridSpec g;
  const std::string kind = sec.scalar<std::string>("kind", "graded");
  g.nodes = sec.scalar<long long>("nodes", g.nodes);
  sec.require(g.nodes >= 5 && g.nodes <= 1000001, "nodes", "must lie in [5, 1000001]");
  if (kind == "graded") {
    g.kind = GridKind::Graded;
    g.beta = sec.real("beta", g.beta);
    sec.require(g.beta >= 1.0 && g.beta <= 10.0, "beta", "must lie in [1, 10]");
    sec.require((g.nodes - 1) % 2 == 0, "nodes", "must be odd for a graded grid (0 is a node)");
  } else if (kind == "uniform") {
    g.kind = GridKind::Uniform;
    g.beta = 1.0;
  } else {
    throw ConfigError(fmt::format("unknown grid kind '{}' (uniform, graded)", kind), sec.line_for("kind"));
  }
  sec.finish();
  return g;
}

StepController parse_controller(Section sec) {
  StepController c;
  c.dt_init = sec.real("dt_init", c.dt_init);
  c.dt_min = sec.real("dt_min", c.dt_min);
  c.dt_max = sec.real("dt_max", c.dt_max);
  c.newton_tol = sec.real("newton_tol", c.newton_tol);
  c.newton_max_iters = sec.scalar<int>("newton_max_iters", c.newton_max_iters);
  c.growth = sec.real("growth", c.growth);
  c.shrink = sec.real("shrink", c.shrink);
  c.growth_streak = sec.scalar<int>("growth_streak", c.growth_streak);
  c.fast_iters = sec.scalar<int>("fast_iters", c.fast_iters);
  sec.finish();
  try {
    c.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what(), sec.line());
  }
  return c;
}

RunSpec parse_run(Section sec) {
  RunSpec r;
  r.t_end = sec.real("t_end", r.t_end);
  r.snapshot_interval = sec.real("snapshot_interval", r.snapshot_interval);
  sec.require(r.t_end > 0.0, "t_end", "must be positive");
  sec.require(r.snapshot_interval > 0.0, "snapshot_interval", "must be positive");
  sec.require(r.t_end / r.snapshot_interval <= 1e6, "snapshot_interval", "gives more than 1e6 snapshots");
  sec.finish();
  return r;
}

void window(Section& sec, const std::string& key, double& lo, double& hi) {
  const YAML::Node v = sec.take(key);
  if (!v) return;
  if (!v.IsSequence() || v.size() != 2) throw ConfigError(fmt::format("{}.{} must be [lo, hi]", sec.name(), key), line_of(v));
  try {
    lo = v[0].as<double>();
    hi = v[1].as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}.{} must hold two numbers", sec.name(), key), line_of(v));
  }
  sec.require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, key, "must satisfy lo < hi");
}

DiagnosticsSpec parse_diagnostics(Section sec) {
  DiagnosticsSpec d;
  d.enabled = sec.scalar<bool>("enabled", d.enabled);
  d.epsilon = sec.real("epsilon", d.epsilon);
  sec.require(d.epsilon > 0.0 && d.epsilon <= 0.25, "epsilon", "must lie in (0, 0.25]");
  d.h0 = sec.real("h0", d.h0);
  sec.require(d.h0 > 0.0, "h0", "must be positive");
  d.shape_half_width = sec.real("shape_half_width", d.shape_half_width);
  sec.require(d.shape_half_width > 0.0 && d.shape_half_width < 1.0, "shape_half_width", "must lie in (0, 1)");
  d.shape_tol = sec.real("shape_tol", d.shape_tol);
  d.shape_window = sec.real("shape_window", d.shape_window);
  sec.require(d.shape_window > 0.0, "shape_window", "must be positive");
  d.shape_rate_tol = sec.real("shape_rate_tol", d.shape_rate_tol);
  window(sec, "speed_window", d.speed_lo, d.speed_hi);
  sec.require(d.speed_lo >= 0.0, "speed_window", "must start at t >= 0");
  d.speed_tol = sec.real("speed_tol", d.speed_tol);
  d.envelope_after = sec.real("envelope_after", d.envelope_after);
  window(sec, "envelope_region", d.envelope_lo, d.envelope_hi);
  sec.require(d.envelope_lo > 0.0 && d.envelope_hi < 1.0, "envelope_region", "must lie inside (0, 1)");
  d.envelope_tol = sec.real("envelope_tol", d.envelope_tol);
  d.lower_bound_tol = sec.real("lower_bound_tol", d.lower_bound_tol);
  d.ordering_tol = sec.real("ordering_tol", d.ordering_tol);
  d.symmetry_tol = sec.real("symmetry_tol", d.symmetry_tol);
  d.psi_delta = sec.real("psi_delta", d.psi_delta);
  sec.require(d.psi_delta > 0.0, "psi_delta", "must be positive");
  d.resolution_study = sec.scalar<bool>("resolution_study", d.resolution_study);
  sec.require(d.shape_tol >= 0.0 && d.shape_rate_tol >= 0.0 && d.speed_tol >= 0.0 && d.envelope_tol >= 0.0 &&
                  d.lower_bound_tol >= 0.0 && d.ordering_tol >= 0.0 && d.symmetry_tol >= 0.0,
              "tolerances", "must be non-negative");
  sec.finish();
  return d;
}

OracleSpec parse_oracle(Section sec) {
  OracleSpec o;
  o.h_values = sec.list<double>("h_values", o.h_values);
  sec.require(!o.h_values.empty() && std::all_of(o.h_values.begin(), o.h_values.end(),
                                                  [](double h) { return std::isfinite(h) && h > 0.0; }),
              "h_values", "must be a non-empty list of positive numbers");
  o.nodes = sec.scalar<long long>("nodes", o.nodes);
  sec.require(o.nodes >= 5, "nodes", "must be at least 5");
  o.t_end = sec.real("t_end", o.t_end);
  sec.require(o.t_end > 0.0, "t_end", "must be positive");
  o.dt_init = sec.real("dt_init", o.dt_init);
  sec.require(o.dt_init > 0.0, "dt_init", "must be positive");
  o.tol = sec.real("tol", o.tol);
  sec.require(o.tol >= 0.0, "tol", "must be non-negative");
  o.refinement_nodes = sec.list<Eigen::Index>("refinement_nodes", o.refinement_nodes);
  bool doubling = o.refinement_nodes.size() >= 3 && o.refinement_nodes.front() >= 5;
  for (std::size_t i = 0; doubling && i + 1 < o.refinement_nodes.size(); ++i) {
    doubling = o.refinement_nodes[i + 1] - 1 == 2 * (o.refinement_nodes[i] - 1);
  }
  sec.require(doubling, "refinement_nodes", "must hold >= 3 levels, each doubling the interval count");
  o.refinement_h = sec.real("refinement_h", o.refinement_h);
  sec.require(o.refinement_h > 0.0, "refinement_h", "must be positive");
  o.refinement_dt = sec.real("refinement_dt", o.refinement_dt);
  sec.require(o.refinement_dt > 0.0, "refinement_dt", "must be positive");
  o.refinement_t_end = sec.real("refinement_t_end", o.refinement_t_end);
  sec.require(o.refinement_t_end > 0.0, "refinement_t_end", "must be positive");
  o.min_order = sec.real("min_order", o.min_order);
  sec.finish();
  return o;
}

SuiteSpec parse_suite(Section sec) {
  SuiteSpec s;
  s.pairs = sec.scalar<int>("pairs", s.pairs);
  sec.require(s.pairs >= 1 && s.pairs <= 1000, "pairs", "must lie in [1, 1000]");
  s.crossings = sec.list<int>("crossings", s.crossings);
  sec.require(!s.crossings.empty() && std::all_of(s.crossings.begin(), s.crossings.end(),
                                                   [](int c) { return c >= 1 && c <= 9 && c % 2 == 1; }),
              "crossings", "must be a non-empty list of odd counts in [1, 9]");
  s.dt = sec.real("dt", s.dt);
  sec.require(s.dt > 0.0, "dt", "must be positive");
  s.ordering_tol = sec.real("ordering_tol", s.ordering_tol);
  sec.require(s.ordering_tol >= 0.0, "ordering_tol", "must be non-negative");
  sec.finish();
  return s;
}

OutputSpec parse_output(Section sec) {
  OutputSpec o;
  o.dir = sec.scalar<std::string>("dir", o.dir);
  sec.require(!o.dir.empty(), "dir", "must not be empty");
  o.plots = sec.scalar<bool>("plots", o.plots);
  sec.finish();
  return o;
}

bool valid_name(const std::string& s) {
  return !s.empty() && s.size() <= 128 && std::all_of(s.begin(), s.end(), [](char c) {
           return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
         }) && s != "." && s != "..";
}

std::vector<SweepAxis> read_sweep(const YAML::Node& node) {
  std::vector<SweepAxis> axes;
  if (!node || node.IsNull()) return axes;
  if (!node.IsMap()) throw ConfigError("'sweep' must map parameter paths to value lists", line_of(node));
  for (auto it = node.begin(); it != node.end(); ++it) {
    SweepAxis axis;
    axis.path = it->first.Scalar();
    if (axis.path.empty() || axis.path.find("sweep") == 0) {
      throw ConfigError(fmt::format("invalid sweep path '{}'", axis.path), line_of(it->first));
    }
    if (!it->second.IsSequence() || it->second.size() == 0) {
      throw ConfigError(fmt::format("sweep.{} must be a non-empty list", axis.path), line_of(it->second));
    }
    for (const auto& v : it->second) {
      if (!v.IsScalar()) throw ConfigError(fmt::format("sweep.{} values must be scalars", axis.path), line_of(v));
      axis.values.push_back(v.Scalar());
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
  }
}

RunConfig parse_node(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("config must be a mapping of sections", line_of(root));
  RunConfig c;
  Section top(root, "", 1);
  c.name = top.scalar<std::string>("name", c.name);
  top.require(valid_name(c.name), "name", "must be 1-128 characters from [A-Za-z0-9._-]");
  const std::string experiment = top.scalar<std::string>("experiment", "single");
  c.experiment = parse_experiment(experiment, top.line_for("experiment"));
  {
    const std::string seed = top.scalar<std::string>("seed", "0");
    const auto [end, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), c.seed);
    top.require(ec == std::errc() && end == seed.data() + seed.size(), "seed", "must be an unsigned 64-bit integer");
  }
  c.scenario = parse_scenario(top.child("scenario"));
  c.boundary = parse_boundary(top.child("boundary"));
  if (c.scenario.kind == ScenarioKind::TravelingWave) {
    const YAML::Node& view = root;
    const auto* neumann = std::get_if<ConstantNeumann>(&c.boundary);
    if (neumann && !(view["scenario"] && view["scenario"]["h"])) c.scenario.h = neumann->h;
  }
  c.grid = parse_grid(top.child("grid"));
  c.controller = parse_controller(top.child("controller"));
  c.run = parse_run(top.child("run"));
  c.diagnostics = parse_diagnostics(top.child("diagnostics"));
  c.oracle = parse_oracle(top.child("oracle"));
  c.suite = parse_suite(top.child("suite"));
  c.output = parse_output(top.child("output"));
  c.sweep = read_sweep(top.take("sweep"));
  top.finish();

  const int scenario_line = top.line_for("scenario");
  if (c.experiment == ExperimentKind::Single || c.experiment == ExperimentKind::Sandwich) {
    if (c.experiment == ExperimentKind::Sandwich && !std::holds_alternative<NonlinearRobin>(c.boundary)) {
      throw ConfigError("the sandwich experiment needs the nonlinear_robin boundary", top.line_for("boundary"));
    }
    try {
      (void)c.problem();
    } catch (const ContractViolation& e) {
      throw ConfigError(e.what(), scenario_line);
    } catch (const EnvelopeViolation& e) {
      throw ConfigError(e.what(), scenario_line);
    } catch (const DomainError& e) {
      throw ConfigError(e.what(), scenario_line);
    }
  }
  if (c.experiment == ExperimentKind::ZeroNumber || c.experiment == ExperimentKind::Comparison) {
    if (!std::holds_alternative<NonlinearRobin>(c.boundary)) {
      throw ConfigError("pair suites need the nonlinear_robin boundary", top.line_for("boundary"));
    }
    if (c.suite.dt > c.run.t_end) throw ConfigError("suite.dt exceeds run.t_end", top.line_for("suite"));
  }
  return c;
}

std::string num(double v) { return fmt::format("{}", v); }

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

template <class T>
std::string seq(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += num(v[i]);
    else out += fmt::format("{}", v[i]);
  }
  return out + "]";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Single: return "single";
    case ExperimentKind::Sandwich: return "sandwich";
    case ExperimentKind::NeumannOracle: return "neumann-oracle";
    case ExperimentKind::ZeroNumber: return "zero-number";
    case ExperimentKind::Comparison: return "comparison";
  }
  return "?";
}

InitialData ScenarioSpec::build() const {
  switch (kind) {
    case ScenarioKind::SymmetricCosh: return symmetric_initial(amplitude);
    case ScenarioKind::Psi: return psi_initial(delta);
    case ScenarioKind::PerturbedCosh: return perturbed_initial(amplitude, bump.amplitude, bump.center, bump.width);
    case ScenarioKind::TravelingWave: return traveling_wave_initial(h, offset);
  }
  throw ContractViolation("ScenarioSpec::build: unknown kind");
}

Grid GridSpec::build() const {
  return kind == GridKind::Uniform ? make_uniform_grid(nodes - 1) : make_graded_grid(nodes - 1, beta);
}

Problem RunConfig::problem() const { return Problem::make(grid.build(), boundary, scenario.build()); }

RunConfig parse_config(const std::string& text) { return parse_node(load_yaml(text)); }

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& c) {
  std::string out;
  auto line = [&](int indent, const std::string& key, const std::string& value) {
    out += std::string(indent, ' ') + key + ": " + value + "\n";
  };
  auto header = [&](const std::string& key) { out += key + ":\n"; };

  line(0, "name", quoted(c.name));
  line(0, "experiment", to_string(c.experiment));
  line(0, "seed", fmt::format("{}", c.seed));

  header("scenario");
  line(2, "kind", scenario_name(c.scenario.kind));
  switch (c.scenario.kind) {
    case ScenarioKind::SymmetricCosh: line(2, "amplitude", num(c.scenario.amplitude)); break;
    case ScenarioKind::Psi: line(2, "delta", num(c.scenario.delta)); break;
    case ScenarioKind::PerturbedCosh:
      line(2, "amplitude", num(c.scenario.amplitude));
      out += "  bump:\n";
      line(4, "amplitude", num(c.scenario.bump.amplitude));
      line(4, "center", num(c.scenario.bump.center));
      line(4, "width", num(c.scenario.bump.width));
      break;
    case ScenarioKind::TravelingWave:
      line(2, "h", num(c.scenario.h));
      line(2, "offset", num(c.scenario.offset));
      break;
  }

  header("boundary");
  if (std::holds_alternative<NonlinearRobin>(c.boundary)) {
    line(2, "kind", "nonlinear_robin");
  } else if (const auto* n = std::get_if<ConstantNeumann>(&c.boundary)) {
    line(2, "kind", "neumann");
    line(2, "h", num(n->h));
  } else {
    const auto& a = std::get<AffineRobin>(c.boundary);
    line(2, "kind", "affine_robin");
    line(2, "alpha_minus", num(a.alpha_minus));
    line(2, "alpha_plus", num(a.alpha_plus));
    line(2, "beta_minus", num(a.beta_minus));
    line(2, "beta_plus", num(a.beta_plus));
  }

  header("grid");
  line(2, "kind", c.grid.kind == GridKind::Uniform ? "uniform" : "graded");
  line(2, "nodes", fmt::format("{}", c.grid.nodes));
  if (c.grid.kind == GridKind::Graded) line(2, "beta", num(c.grid.beta));

  const auto& k = c.controller;
  header("controller");
  line(2, "dt_init", num(k.dt_init));
  line(2, "dt_min", num(k.dt_min));
  line(2, "dt_max", num(k.dt_max));
  line(2, "newton_tol", num(k.newton_tol));
  line(2, "newton_max_iters", fmt::format("{}", k.newton_max_iters));
  line(2, "growth", num(k.growth));
  line(2, "shrink", num(k.shrink));
  line(2, "growth_streak", fmt::format("{}", k.growth_streak));
  line(2, "fast_iters", fmt::format("{}", k.fast_iters));

  header("run");
  line(2, "t_end", num(c.run.t_end));
  line(2, "snapshot_interval", num(c.run.snapshot_interval));

  const auto& d = c.diagnostics;
  header("diagnostics");
  line(2, "enabled", d.enabled ? "true" : "false");
  line(2, "epsilon", num(d.epsilon));
  line(2, "h0", num(d.h0));
  line(2, "shape_half_width", num(d.shape_half_width));
  line(2, "shape_tol", num(d.shape_tol));
  line(2, "shape_window", num(d.shape_window));
  line(2, "shape_rate_tol", num(d.shape_rate_tol));
  line(2, "speed_window", seq(std::vector<double>{d.speed_lo, d.speed_hi}));
  line(2, "speed_tol", num(d.speed_tol));
  line(2, "envelope_after", num(d.envelope_after));
  line(2, "envelope_region", seq(std::vector<double>{d.envelope_lo, d.envelope_hi}));
  line(2, "envelope_tol", num(d.envelope_tol));
  line(2, "lower_bound_tol", num(d.lower_bound_tol));
  line(2, "ordering_tol", num(d.ordering_tol));
  line(2, "symmetry_tol", num(d.symmetry_tol));
  line(2, "psi_delta", num(d.psi_delta));
  line(2, "resolution_study", d.resolution_study ? "true" : "false");

  const auto& o = c.oracle;
  header("oracle");
  line(2, "h_values", seq(o.h_values));
  line(2, "nodes", fmt::format("{}", o.nodes));
  line(2, "t_end", num(o.t_end));
  line(2, "dt_init", num(o.dt_init));
  line(2, "tol", num(o.tol));
  line(2, "refinement_nodes", seq(o.refinement_nodes));
  line(2, "refinement_h", num(o.refinement_h));
  line(2, "refinement_dt", num(o.refinement_dt));
  line(2, "refinement_t_end", num(o.refinement_t_end));
  line(2, "min_order", num(o.min_order));

  header("suite");
  line(2, "pairs", fmt::format("{}", c.suite.pairs));
  line(2, "crossings", seq(c.suite.crossings));
  line(2, "dt", num(c.suite.dt));
  line(2, "ordering_tol", num(c.suite.ordering_tol));

  header("output");
  line(2, "dir", quoted(c.output.dir));
  line(2, "plots", c.output.plots ? "true" : "false");

  if (!c.sweep.empty()) {
    header("sweep");
    for (const auto& axis : c.sweep) {
      std::string vals = "[";
      for (std::size_t i = 0; i < axis.values.size(); ++i) vals += (i ? ", " : "") + quoted(axis.values[i]);
      line(2, quoted(axis.path), vals + "]");
    }
  }
  return out;
}

std::string config_hash(const RunConfig& config) { return sha256_hex(emit_config(config)); }

std::vector<SweepCell> expand_sweep(const std::string& text) {
  const YAML::Node root = load_yaml(text);
  const RunConfig base = parse_node(root);
  std::vector<SweepCell> cells;
  if (base.sweep.empty()) return cells;

  std::size_t total = 1;
  for (const auto& axis : base.sweep) {
    total *= axis.values.size();
    if (total > kMaxSweepCells) throw ConfigError(fmt::format("sweep exceeds {} cells", kMaxSweepCells));
  }

  std::vector<std::size_t> index(base.sweep.size(), 0);
  for (std::size_t cell = 0; cell < total; ++cell) {
    YAML::Node doc = YAML::Clone(root);
    doc.remove("sweep");
    std::string label;
    for (std::size_t a = 0; a < base.sweep.size(); ++a) {
      const auto& axis = base.sweep[a];
      std::vector<std::string> parts;
      std::stringstream ss(axis.path);
      for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
      YAML::Node target = doc;
      for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
        YAML::Node next = target[parts[p]];
        target.reset(next);
      }
      target[parts.back()] = YAML::Load(axis.values[index[a]]);
      label += (a ? "," : "") + axis.path + "=" + axis.values[index[a]];
    }
    doc["name"] = fmt::format("{}-{:04d}", base.name, cell);
    YAML::Emitter em;
    em << doc;
    SweepCell out{label, std::nullopt, {}};
    try {
      out.config = parse_config(em.c_str());
    } catch (const ConfigError& e) {
      out.error = e.what();
    }
    cells.push_back(std::move(out));

    for (std::size_t a = base.sweep.size(); a-- > 0;) {
      if (++index[a] < base.sweep[a].values.size()) break;
      index[a] = 0;
    }
  }
  return cells;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : detail::preset_table()) names.push_back(name);
  return names;
}

std::string preset_text(const std::string& name) {
  for (const auto& [n, text] : detail::preset_table()) {
    if (n == name) return text;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError(fmt::format("unknown preset '{}' (known: {})", name, known));
}

}  // namespace reaper
