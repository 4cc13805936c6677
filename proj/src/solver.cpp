#include "reaper/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "reaper/errors.hpp"

namespace reaper {

Problem Problem::make(Grid grid, BoundaryCondition bc, InitialData initial) {
  validate_compatibility(initial, bc, grid);
  return Problem{std::move(grid), bc, std::move(initial)};
}

void StepController::validate() const {
  if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max)) {
    throw ContractViolation("StepController: need 0 < dt_min <= dt_init <= dt_max");
  }
  if (!(newton_tol > 0.0)) throw ContractViolation("StepController: newton_tol must be positive");
  if (newton_max_iters < 1) throw ContractViolation("StepController: newton_max_iters must be >= 1");
  if (!(growth >= 1.0) || !(shrink > 0.0 && shrink < 1.0)) {
    throw ContractViolation("StepController: need growth >= 1 and 0 < shrink < 1");
  }
}

BoundaryRows apply_boundary_closure(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid& grid,
                                    const BoundaryCondition& bc) {
  if (u.size() != grid.size()) throw ContractViolation("apply_boundary_closure: samples not aligned with grid");
  const GridStencils s(grid);
  const Eigen::Index n = u.size() - 1;
  BoundaryRows rows;

  const WallLaw left = left_wall_law(bc, u[0]);
  rows.left_residual = outward_derivative_left(s, u) - left.value;
  rows.left_jac << -s.left.near - s.left.far - left.slope, s.left.near, s.left.far;

  const WallLaw right = right_wall_law(bc, u[n]);
  rows.right_residual = outward_derivative_right(s, u) - right.value;
  rows.right_jac << -s.right.near - s.right.far - right.slope, s.right.near, s.right.far;
  return rows;
}

namespace {

struct InteriorRow {
  double value;
  double d_minus;  // dF/du[i-1]
  double d_plus;   // dF/du[i+1]
};

InteriorRow interior_row(const GridStencils& s, const Eigen::Ref<const Eigen::VectorXd>& u, Eigen::Index i) {
  const double dm = u[i - 1] - u[i];
  const double dp = u[i + 1] - u[i];
  const double slope = s.d1_minus[i] * dm + s.d1_plus[i] * dp;
  const double curv = s.d2_minus[i] * dm + s.d2_plus[i] * dp;
  const double den = 1.0 + slope * slope;
  const double value = curv / den;
  const double k = 2.0 * value * slope / den;
  return InteriorRow{value, s.d2_minus[i] / den - k * s.d1_minus[i], s.d2_plus[i] / den - k * s.d1_plus[i]};
}

void check_aligned(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid& grid, const char* what) {
  if (u.size() != grid.size()) throw ContractViolation(fmt::format("{}: state not aligned with grid", what));
  if (grid.size() < 4) throw ContractViolation(fmt::format("{}: need at least 4 nodes", what));
}

void fill_wall_rows(const BoundaryRows& rows, BorderedTridiagonal<double>& jac) {
  const Eigen::Index n = jac.size() - 1;
  jac.diag[0] = rows.left_jac[0];
  jac.upper[0] = rows.left_jac[1];
  jac.corner_first = rows.left_jac[2];
  jac.diag[n] = rows.right_jac[0];
  jac.lower[n] = rows.right_jac[1];
  jac.corner_last = rows.right_jac[2];
}

}  // namespace

Eigen::VectorXd semidiscrete_residual(const State& state, const Problem& problem) {
  check_aligned(state.u, problem.grid, "semidiscrete_residual");
  const GridStencils s(problem.grid);
  const Eigen::Index n = state.u.size();
  Eigen::VectorXd f(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) f[i] = interior_row(s, state.u, i).value;
  const BoundaryRows rows = apply_boundary_closure(state.u, problem.grid, problem.bc);
  f[0] = rows.left_residual;
  f[n - 1] = rows.right_residual;
  return f;
}

BorderedTridiagonal<double> semidiscrete_jacobian(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid& grid,
                                                  const BoundaryCondition& bc) {
  check_aligned(u, grid, "semidiscrete_jacobian");
  const GridStencils s(grid);
  const Eigen::Index n = u.size();
  BorderedTridiagonal<double> jac(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const InteriorRow row = interior_row(s, u, i);
    jac.lower[i] = row.d_minus;
    jac.upper[i] = row.d_plus;
    jac.diag[i] = -(row.d_minus + row.d_plus);
  }
  fill_wall_rows(apply_boundary_closure(u, grid, bc), jac);
  return jac;
}

Eigen::VectorXd newton_residual(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& u_prev,
                                double dt, const Grid& grid, const BoundaryCondition& bc,
                                BorderedTridiagonal<double>* jac) {
  check_aligned(u, grid, "newton_residual");
  if (u_prev.size() != u.size()) throw ContractViolation("newton_residual: previous state has wrong length");
  const GridStencils s(grid);
  const Eigen::Index n = u.size();
  Eigen::VectorXd r(n);
  if (jac != nullptr && jac->size() != n) *jac = BorderedTridiagonal<double>(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const InteriorRow row = interior_row(s, u, i);
    r[i] = (u[i] - u_prev[i]) - dt * row.value;
    if (jac != nullptr) {
      jac->lower[i] = -dt * row.d_minus;
      jac->upper[i] = -dt * row.d_plus;
      jac->diag[i] = 1.0 + dt * (row.d_minus + row.d_plus);
    }
  }
  const BoundaryRows rows = apply_boundary_closure(u, grid, bc);
  r[0] = rows.left_residual;
  r[n - 1] = rows.right_residual;
  if (jac != nullptr) fill_wall_rows(rows, *jac);
  return r;
}

double scaled_residual_norm(const Eigen::VectorXd& residual, const BorderedTridiagonal<double>& jac) {
  return (residual.array() / jac.diag.array().abs()).abs().maxCoeff();
}

StepResult step_implicit(const State& state, double dt, const Problem& problem, const StepController& ctrl) {
  check_aligned(state.u, problem.grid, "step_implicit");
  if (!(dt > 0.0)) throw ContractViolation("step_implicit: dt must be positive");
  if (dt < ctrl.dt_min) throw StepTooSmall(fmt::format("step_implicit: dt={:.3e} below dt_min={:.3e}", dt, ctrl.dt_min));
  if (!(ctrl.newton_tol > 0.0)) throw ContractViolation("step_implicit: newton_tol must be positive");

  const Grid& grid = problem.grid;
  const Eigen::Index n = state.u.size();

  // Predictor: rigid vertical translation at the mid-node rate. It leaves every
  // slope intact (a nodewise explicit step does not, in the thin wall cells)
  // and is exact for translating profiles.
  Eigen::VectorXd u = state.u;
  {
    const Eigen::VectorXd rate = semidiscrete_residual(state, problem);
    u.array() += dt * rate[n / 2];
  }

  BorderedTridiagonal<double> jac(n);
  double previous = std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd r = newton_residual(u, state.u, dt, grid, problem.bc, &jac);
    const double norm = scaled_residual_norm(r, jac);
    if (!std::isfinite(norm)) throw NewtonDiverged("step_implicit: non-finite residual");
    // At least one correction is always applied: accepting the predictor as
    // is would leave an O(tol) defect per step, which accumulates over long runs.
    if (norm <= ctrl.newton_tol && iter > 0) return StepResult{State{state.t + dt, std::move(u)}, iter, norm};
    if (iter >= ctrl.newton_max_iters) {
      throw NewtonDiverged(fmt::format("step_implicit: no convergence in {} iterations (residual {:.3e})", iter, norm));
    }
    if (iter >= 3 && norm > previous) {
      throw NewtonDiverged(fmt::format("step_implicit: residual grew to {:.3e} at iteration {}", norm, iter));
    }
    previous = norm;
    u -= jac.solve(r);
  }
}

Eigen::VectorXd theta_field(const Grid& grid, const State& state) {
  return discrete_gradient(grid, state.u).array().atan();
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(snapshots.size());
  for (const auto& s : snapshots) t.push_back(s.t);
  return t;
}

Integrator::Integrator(Problem problem, StepController ctrl)
    : problem_(std::move(problem)), ctrl_(ctrl), state_(problem_.initial_state()) {
  ctrl_.validate();
  cs_.dt = ctrl_.dt_init;
}

Integrator::Integrator(Problem problem, StepController ctrl, State state, ControllerState controller)
    : problem_(std::move(problem)), ctrl_(ctrl), state_(std::move(state)), cs_(controller) {
  ctrl_.validate();
  check_aligned(state_.u, problem_.grid, "Integrator");
}

void Integrator::advance_to(double t_target) {
  while (state_.t < t_target) {
    const double remaining = t_target - state_.t;
    double dt = cs_.dt;
    bool lands = false;
    if (remaining <= dt + std::max(0.01 * dt, ctrl_.dt_min)) {
      dt = remaining;
      lands = true;
    }

    StepResult result;
    try {
      StepController local = ctrl_;
      if (lands) local.dt_min = std::min(ctrl_.dt_min, dt);
      result = step_implicit(state_, dt, problem_, local);
    } catch (const NewtonDiverged&) {
      cs_.dt = std::min(cs_.dt, dt) * ctrl_.shrink;
      cs_.streak = 0;
      ++cs_.rejected;
      if (cs_.dt < ctrl_.dt_min) {
        throw StepTooSmall(fmt::format("advance: dt fell to {:.3e} at t={:.6f}", cs_.dt, state_.t));
      }
      continue;
    }

    state_ = std::move(result.state);
    if (lands) state_.t = t_target;
    ++cs_.steps;
    cs_.newton_iterations += static_cast<std::uint64_t>(result.iterations);
    cs_.dt_smallest = cs_.steps == 1 ? dt : std::min(cs_.dt_smallest, dt);
    cs_.dt_largest = std::max(cs_.dt_largest, dt);
    stats_.dt_history.push_back(dt);

    if (result.iterations <= ctrl_.fast_iters) {
      if (++cs_.streak >= ctrl_.growth_streak) {
        cs_.dt = std::min(cs_.dt * ctrl_.growth, ctrl_.dt_max);
        cs_.streak = 0;
      }
    } else {
      cs_.streak = 0;
    }
  }
}

double snapshot_time(std::int64_t k, double interval) {
  // 17 * 0.1 is 1.7000000000000002 but 17 / 10.0 is the double nearest 1.7,
  // which is what a user writes as an end time. Dividing keeps a run stopped
  // at such a time in step with an uninterrupted one.
  const double per_unit = std::round(1.0 / interval);
  if (per_unit >= 1.0 && std::abs(per_unit * interval - 1.0) <= 1e-12) return static_cast<double>(k) / per_unit;
  return static_cast<double>(k) * interval;
}

namespace {

void run_snapshots(Integrator& integrator, Trajectory& traj, double t_end, const AdvanceOptions& opts,
                   const std::vector<Observer>& observers, Trajectory* partial) {
  if (!(opts.snapshot_interval > 0.0)) throw ContractViolation("advance: snapshot interval must be positive");
  const double t_start = integrator.state().t;
  const double slack = 1e-9 * opts.snapshot_interval;
  auto k = static_cast<std::int64_t>(std::floor(t_start / opts.snapshot_interval + 1e-9)) + 1;
  const auto started = std::chrono::steady_clock::now();
  while (integrator.state().t < t_end) {
    double target = snapshot_time(k, opts.snapshot_interval);
    if (target >= t_end - slack) target = t_end;
    try {
      integrator.advance_to(target);
    } catch (...) {
      traj.controller = integrator.controller();
      if (partial != nullptr) *partial = traj;
      throw;
    }
    traj.snapshots.push_back(integrator.state());
    for (const auto& obs : observers) obs(integrator.state());
    ++k;
  }
  traj.controller = integrator.controller();
  const auto& hist = integrator.stats().dt_history;
  traj.stats.dt_history.insert(traj.stats.dt_history.end(), hist.begin(), hist.end());
  traj.stats.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

}  // namespace

Trajectory advance(const Problem& problem, double t_end, const StepController& ctrl, const AdvanceOptions& opts,
                   const std::vector<Observer>& observers, Trajectory* partial) {
  if (!(t_end > 0.0)) throw ContractViolation("advance: t_end must be positive");
  Integrator integrator(problem, ctrl);
  Trajectory traj;
  traj.grid = problem.grid;
  traj.bc_description = describe(problem.bc);
  traj.initial_tag = problem.initial.tag();
  traj.outside_theory = outside_convergence_theory(problem.bc);
  traj.snapshots.push_back(integrator.state());
  for (const auto& obs : observers) obs(integrator.state());
  run_snapshots(integrator, traj, t_end, opts, observers, partial);
  return traj;
}

void extend(Trajectory& traj, const Problem& problem, double t_end, const StepController& ctrl,
            const AdvanceOptions& opts, const std::vector<Observer>& observers) {
  if (traj.snapshots.empty()) throw ContractViolation("extend: empty trajectory");
  if (!(traj.grid == problem.grid)) throw ContractViolation("extend: trajectory grid differs from problem grid");
  if (traj.back().t >= t_end) return;
  Integrator integrator(problem, ctrl, traj.back(), traj.controller);
  run_snapshots(integrator, traj, t_end, opts, observers, nullptr);
}

}  // namespace reaper
