#pragma once

// Executable checks for the qualitative behaviour of the flow: zero-number
// counts, comparison ordering, gradient envelopes, a priori height and slope
// bounds, ascent speed and convergence of the normalized profile.

#include <Eigen/Core>
#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reaper/closed_forms.hpp"
#include "reaper/grid.hpp"
#include "reaper/solver.hpp"

namespace reaper {

struct ZeroCount {
  int count = 0;
  std::vector<Eigen::Index> degenerate;  // nodes with |value| < tol

  bool has_degenerate() const { return !degenerate.empty(); }
};

/// 1e-9 (1 + max |v|).
double default_degeneracy_tol(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Sign changes between consecutive strictly signed entries; entries with
/// |v| < tol are skipped and flagged.
ZeroCount sign_change_count(const Eigen::Ref<const Eigen::VectorXd>& values, double tol);

/// sign_change_count(a.u - b.u). States must share length and time.
ZeroCount intersection_count(const State& a, const State& b, double tol);
ZeroCount intersection_count(const State& a, const State& b);

/// Sign changes of phi0(x) + r + (pi/2) t - u(x, t). The walls count as
/// +infinity, where phi0 blows up.
ZeroCount grim_reaper_intersections(const Grid& grid, const State& state, double r, double tol);

struct IntersectionReport {
  std::vector<double> times;
  std::vector<int> counts;
  std::vector<bool> degenerate;
  bool nonincreasing = true;
  /// snapshot index of the first increase, if any
  std::optional<std::size_t> first_increase;
};

/// Per-snapshot intersection counts; the monotonicity flag ignores snapshots
/// that carry degenerate nodes. A negative tol selects the default per snapshot.
IntersectionReport verify_nonincreasing_intersections(const Trajectory& a, const Trajectory& b, double tol = -1.0);

struct OrderingReport {
  bool precondition_ok = true;
  std::string message;
  bool holds = true;
  /// max over snapshots and nodes of a - b (<= 0 when strictly ordered)
  double worst_violation = 0.0;
  std::vector<double> per_snapshot;
};

/// a <= b + tol at every snapshot. Requires a <= b + tol at the first snapshot.
OrderingReport verify_ordering(const Trajectory& a, const Trajectory& b, double tol);

/// Same check between b's snapshots shifted by `shift` in time: compares
/// a(t) with b(t + shift) for every t where both exist.
OrderingReport verify_ordering_shifted(const Trajectory& a, const Trajectory& b, double shift, double tol);

/// u at x = 0 (linear interpolation if 0 is not a node).
double center_value(const Grid& grid, const State& state);

/// Least-squares slope of u(0, t) over snapshots with t in [t1, t2].
double wave_speed_estimate(const Trajectory& traj, double t1, double t2);

/// sup over |x| <= a of |u(x) - u(0) - phi0(x)|.
double shape_error(const Grid& grid, const State& state, double half_width);

struct EnvelopeReport {
  double region_lo = 0.0;
  double region_hi = 0.0;
  double h0 = 0.0;
  double tol = 0.0;
  bool lower_ok = true;
  bool upper_ok = true;
  double worst_lower_margin = 0.0;  // min of u_x - phi'(x; h0), mirrored
  double worst_upper_margin = 0.0;  // min of tan(pi x/2) - u_x, mirrored
  double worst_margin = 0.0;

  bool ok() const { return lower_ok && upper_ok; }
};

/// phi'(x; h0) - tol <= u_x <= tan(pi x / 2) + tol for x in [lo, hi], and the
/// mirrored inequalities on [-hi, -lo].
EnvelopeReport gradient_envelope_check(const Grid& grid, const State& state, double h0, double lo, double hi,
                                       double tol);

struct BoundsReport {
  bool lower_bound_ok = true;
  bool m1_ok = true;
  double m1 = 0.0;
  double min_slope_right = 0.0;  // min |u_x| over [1 - 2 eps, 1 - eps]
  double min_slope_left = 0.0;   // min |u_x| over [-1 + eps, -1 + 2 eps]
  double m2_value = 0.0;         // max |u_x| over (-1 + 2 eps, 1 - 2 eps)
};

/// M1 = (phi0(1 - eps) + (pi/2) T) / eps.
double interior_gradient_threshold(double eps, double t_shift);

/// min |u_x| < M1 on both wall bands [1-2eps, 1-eps] and [-1+eps, -1+2eps].
BoundsReport interior_min_gradient_check(const Grid& grid, const State& state, double eps, double t_shift);

/// Lower barrier margin: min over nodes of u - (phi(x;1) + (pi/4) t + 1 - phi(1;1)).
double lower_height_margin(const Grid& grid, const State& state);
bool lower_height_bound_check(const Grid& grid, const State& state, double tol);

struct AprioriReport {
  AprioriConstants<double> constants;
  double horizon = 0.0;
  double max_height = 0.0;
  double max_slope = 0.0;
  bool height_ok = true;  // u <= C2(T)
  bool slope_ok = true;   // |u_x| <= C3(T)
};

/// Upper height and global slope bounds on [0, T] from the barrier construction.
AprioriReport a_priori_bounds_check(const Trajectory& traj, double m0, double max_initial_slope, double horizon);

/// Smallest undivided second difference
///   (D+ u - D- u) * min(h_-, h_+)
/// over interior nodes. It reduces to u[i+1] - 2 u[i] + u[i-1] on uniform
/// grids and stays at rounding level in the thin cells of graded grids.
double convexity_defect(const Grid& grid, const State& state);

struct ZeroCurves {
  std::optional<double> rho_plus;   // largest crossing of u_x = M1
  std::optional<double> rho_minus;  // smallest crossing of u_x = -M1
};

ZeroCurves zero_curves(const Grid& grid, const State& state, double m1);

/// One named check in a diagnostics report.
struct CheckResult {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  bool pass = true;
  /// Reported but excluded from all_pass(), e.g. for runs outside the theory.
  bool informational = false;
  double worst_margin = 0.0;
  nlohmann::json series = nlohmann::json::array();
};

struct DiagnosticsReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  const CheckResult* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

}  // namespace reaper
