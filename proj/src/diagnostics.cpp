#include "reaper/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "reaper/errors.hpp"
#include "reaper/stencil.hpp"

namespace reaper {

double default_degeneracy_tol(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const double scale = values.size() > 0 ? values.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * (1.0 + scale);
}

ZeroCount sign_change_count(const Eigen::Ref<const Eigen::VectorXd>& values, double tol) {
  if (!(tol > 0.0)) throw ContractViolation("sign_change_count: tol must be positive");
  ZeroCount zc;
  int last = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (std::abs(v) < tol) {
      zc.degenerate.push_back(i);
      continue;
    }
    const int sign = v > 0.0 ? 1 : -1;
    if (last != 0 && sign != last) ++zc.count;
    last = sign;
  }
  return zc;
}

namespace {

void require_same_shape(const State& a, const State& b, const char* what) {
  if (a.u.size() != b.u.size()) throw ContractViolation(fmt::format("{}: states have different lengths", what));
  if (std::abs(a.t - b.t) > 1e-9 * (1.0 + std::abs(a.t))) {
    throw ContractViolation(fmt::format("{}: states at different times ({} vs {})", what, a.t, b.t));
  }
}

void require_same_times(const Trajectory& a, const Trajectory& b, const char* what) {
  if (a.snapshots.size() != b.snapshots.size()) {
    throw ContractViolation(fmt::format("{}: trajectories have different snapshot counts", what));
  }
  if (!(a.grid == b.grid)) throw ContractViolation(fmt::format("{}: trajectories use different grids", what));
}

}  // namespace

ZeroCount intersection_count(const State& a, const State& b, double tol) {
  require_same_shape(a, b, "intersection_count");
  return sign_change_count(a.u - b.u, tol);
}

ZeroCount intersection_count(const State& a, const State& b) {
  require_same_shape(a, b, "intersection_count");
  const Eigen::VectorXd diff = a.u - b.u;
  return sign_change_count(diff, default_degeneracy_tol(diff));
}

ZeroCount grim_reaper_intersections(const Grid& grid, const State& state, double r, double tol) {
  const Eigen::Index n = grid.size();
  if (state.u.size() != n) throw ContractViolation("grim_reaper_intersections: state not aligned with grid");
  Eigen::VectorXd diff(n);
  const double lift = r + interior_grim_reaper_speed<double>() * state.t;
  for (Eigen::Index i = 1; i + 1 < n; ++i) diff[i] = interior_grim_reaper(grid[i]) + lift - state.u[i];
  diff[0] = diff[n - 1] = std::numeric_limits<double>::max();
  return sign_change_count(diff, tol);
}

IntersectionReport verify_nonincreasing_intersections(const Trajectory& a, const Trajectory& b, double tol) {
  require_same_times(a, b, "verify_nonincreasing_intersections");
  IntersectionReport rep;
  std::optional<int> last;
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    const State& sa = a.snapshots[k];
    const State& sb = b.snapshots[k];
    const ZeroCount zc = tol > 0.0 ? intersection_count(sa, sb, tol) : intersection_count(sa, sb);
    rep.times.push_back(sa.t);
    rep.counts.push_back(zc.count);
    rep.degenerate.push_back(zc.has_degenerate());
    if (zc.has_degenerate()) continue;
    if (last && zc.count > *last && rep.nonincreasing) {
      rep.nonincreasing = false;
      rep.first_increase = k;
    }
    last = zc.count;
  }
  return rep;
}

namespace {

void accumulate_ordering(OrderingReport& rep, const State& sa, const State& sb, double tol) {
  const double worst = (sa.u - sb.u).maxCoeff();
  rep.per_snapshot.push_back(worst);
  rep.worst_violation = rep.per_snapshot.size() == 1 ? worst : std::max(rep.worst_violation, worst);
  if (worst > tol) rep.holds = false;
}

}  // namespace

OrderingReport verify_ordering(const Trajectory& a, const Trajectory& b, double tol) {
  require_same_times(a, b, "verify_ordering");
  OrderingReport rep;
  if (a.snapshots.empty()) return rep;
  const double initial = (a.snapshots.front().u - b.snapshots.front().u).maxCoeff();
  if (initial > tol) {
    rep.precondition_ok = false;
    rep.holds = false;
    rep.worst_violation = initial;
    rep.message = fmt::format("initial data not ordered: max(a - b) = {:.3e} > tol {:.1e}", initial, tol);
    return rep;
  }
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    require_same_shape(a.snapshots[k], b.snapshots[k], "verify_ordering");
    accumulate_ordering(rep, a.snapshots[k], b.snapshots[k], tol);
  }
  return rep;
}

OrderingReport verify_ordering_shifted(const Trajectory& a, const Trajectory& b, double shift, double tol) {
  if (!(a.grid == b.grid)) throw ContractViolation("verify_ordering_shifted: trajectories use different grids");
  OrderingReport rep;
  std::size_t j = 0;
  bool first = true;
  for (const State& sa : a.snapshots) {
    const double target = sa.t + shift;
    const double slack = 1e-9 * (1.0 + std::abs(target));
    while (j < b.snapshots.size() && b.snapshots[j].t < target - slack) ++j;
    if (j == b.snapshots.size()) break;
    if (std::abs(b.snapshots[j].t - target) > slack) continue;
    const State& sb = b.snapshots[j];
    if (first) {
      const double initial = (sa.u - sb.u).maxCoeff();
      if (initial > tol) {
        rep.precondition_ok = false;
        rep.holds = false;
        rep.worst_violation = initial;
        rep.message = fmt::format("shifted data not ordered at t={}: max(a - b) = {:.3e}", sa.t, initial);
        return rep;
      }
      first = false;
    }
    accumulate_ordering(rep, sa, sb, tol);
  }
  if (first) {
    rep.precondition_ok = false;
    rep.holds = false;
    rep.message = "no overlapping snapshot times";
  }
  return rep;
}

double center_value(const Grid& grid, const State& state) {
  const Eigen::Index c = grid.center_index();
  return c >= 0 ? state.u[c] : interpolate(grid, state.u, 0.0);
}

double wave_speed_estimate(const Trajectory& traj, double t1, double t2) {
  if (!(t2 > t1)) throw ContractViolation("wave_speed_estimate: need t2 > t1");
  const double slack = 1e-9 * (1.0 + std::abs(t2));
  std::vector<double> t, y;
  for (const State& s : traj.snapshots) {
    if (s.t < t1 - slack || s.t > t2 + slack) continue;
    t.push_back(s.t);
    y.push_back(center_value(traj.grid, s));
  }
  if (t.size() < 3) throw ContractViolation("wave_speed_estimate: fewer than 3 snapshots in window");
  const auto m = static_cast<Eigen::Index>(t.size());
  // centre the abscissa so the fit stays well conditioned at large t
  const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(m);
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = t[i] - t_mean;
    rhs[i] = y[i];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  return coef[1];
}

double shape_error(const Grid& grid, const State& state, double half_width) {
  if (!(half_width > 0.0 && half_width < 1.0)) throw ContractViolation("shape_error: window must lie in (0, 1)");
  const double u0 = center_value(grid, state);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i]) > half_width) continue;
    worst = std::max(worst, std::abs(state.u[i] - u0 - interior_grim_reaper(grid[i])));
  }
  return worst;
}

EnvelopeReport gradient_envelope_check(const Grid& grid, const State& state, double h0, double lo, double hi,
                                       double tol) {
  if (!(0.0 < lo && lo < hi && hi < 1.0)) throw ContractViolation("gradient_envelope_check: need 0 < lo < hi < 1");
  const Eigen::VectorXd g = discrete_gradient(grid, state.u);
  EnvelopeReport rep;
  rep.region_lo = lo;
  rep.region_hi = hi;
  rep.h0 = h0;
  rep.tol = tol;
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  rep.worst_upper_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i + 1 < grid.size(); ++i) {
    const double ax = std::abs(grid[i]);
    if (ax < lo || ax > hi) continue;
    // mirror the left half onto (0, 1) by flipping the slope sign
    const double slope = grid[i] > 0.0 ? g[i] : -g[i];
    rep.worst_lower_margin = std::min(rep.worst_lower_margin, slope - traveling_wave_slope(ax, h0));
    rep.worst_upper_margin = std::min(rep.worst_upper_margin, interior_grim_reaper_slope(ax) - slope);
  }
  rep.lower_ok = rep.worst_lower_margin >= -tol;
  rep.upper_ok = rep.worst_upper_margin >= -tol;
  rep.worst_margin = std::min(rep.worst_lower_margin, rep.worst_upper_margin);
  return rep;
}

double interior_gradient_threshold(double eps, double t_shift) {
  if (!(eps > 0.0 && eps < 0.5)) throw ContractViolation("interior_gradient_threshold: eps must lie in (0, 1/2)");
  return (interior_grim_reaper(1.0 - eps) + interior_grim_reaper_speed<double>() * t_shift) / eps;
}

BoundsReport interior_min_gradient_check(const Grid& grid, const State& state, double eps, double t_shift) {
  BoundsReport rep;
  rep.m1 = interior_gradient_threshold(eps, t_shift);
  const Eigen::VectorXd g = discrete_gradient(grid, state.u);
  double right = std::numeric_limits<double>::infinity();
  double left = std::numeric_limits<double>::infinity();
  double interior = 0.0;
  for (Eigen::Index i = 1; i + 1 < grid.size(); ++i) {
    const double x = grid[i];
    const double s = std::abs(g[i]);
    if (x >= 1.0 - 2.0 * eps && x <= 1.0 - eps) right = std::min(right, s);
    if (x >= -1.0 + eps && x <= -1.0 + 2.0 * eps) left = std::min(left, s);
    if (std::abs(x) < 1.0 - 2.0 * eps) interior = std::max(interior, s);
  }
  if (!std::isfinite(right) || !std::isfinite(left)) {
    throw ContractViolation("interior_min_gradient_check: a wall band contains no grid node");
  }
  rep.min_slope_right = right;
  rep.min_slope_left = left;
  rep.m2_value = interior;
  rep.m1_ok = right < rep.m1 && left < rep.m1;
  rep.lower_bound_ok = lower_height_margin(grid, state) >= 0.0;
  return rep;
}

double lower_height_margin(const Grid& grid, const State& state) {
  const auto barrier = unit_lower_barrier<double>();
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    worst = std::min(worst, state.u[i] - barrier.value(grid[i], state.t));
  }
  return worst;
}

bool lower_height_bound_check(const Grid& grid, const State& state, double tol) {
  return lower_height_margin(grid, state) >= -tol;
}

AprioriReport a_priori_bounds_check(const Trajectory& traj, double m0, double max_initial_slope, double horizon) {
  AprioriReport rep;
  rep.horizon = horizon;
  rep.constants = a_priori_constants(m0, horizon, max_initial_slope);
  for (const State& s : traj.snapshots) {
    if (s.t > horizon * (1.0 + 1e-12)) break;
    rep.max_height = std::max(rep.max_height, s.u.maxCoeff());
    rep.max_slope = std::max(rep.max_slope, discrete_gradient(traj.grid, s.u).cwiseAbs().maxCoeff());
  }
  rep.height_ok = rep.max_height <= rep.constants.c2;
  rep.slope_ok = rep.max_slope <= rep.constants.c3;
  return rep;
}

double convexity_defect(const Grid& grid, const State& state) {
  if (state.u.size() != grid.size()) throw ContractViolation("convexity_defect: state not aligned with grid");
  double worst = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i + 1 < grid.size(); ++i) {
    const double hm = grid.spacing(i - 1);
    const double hp = grid.spacing(i);
    const double jump = (state.u[i + 1] - state.u[i]) / hp - (state.u[i] - state.u[i - 1]) / hm;
    worst = std::min(worst, jump * std::min(hm, hp));
  }
  return worst;
}

ZeroCurves zero_curves(const Grid& grid, const State& state, double m1) {
  const Eigen::VectorXd g = discrete_gradient(grid, state.u);
  ZeroCurves zc;
  auto crossing = [&](Eigen::Index i, double level) {
    const double a = g[i] - level;
    const double b = g[i + 1] - level;
    return grid[i] + (grid[i + 1] - grid[i]) * a / (a - b);
  };
  for (Eigen::Index i = grid.size() - 2; i >= 0; --i) {
    if ((g[i] - m1) * (g[i + 1] - m1) < 0.0) {
      zc.rho_plus = crossing(i, m1);
      break;
    }
  }
  for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
    if ((g[i] + m1) * (g[i + 1] + m1) < 0.0) {
      zc.rho_minus = crossing(i, -m1);
      break;
    }
  }
  return zc;
}

bool DiagnosticsReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass || c.informational; });
}

const CheckResult* DiagnosticsReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

nlohmann::json DiagnosticsReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : checks) {
    out.push_back({{"check", c.name},
                   {"parameters", c.parameters},
                   {"pass", c.pass},
                   {"informational", c.informational},
                   {"worst_margin", c.worst_margin},
                   {"series", c.series}});
  }
  return out;
}

}  // namespace reaper
