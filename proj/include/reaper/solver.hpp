#pragma once

// Backward-Euler / Newton integration of u_t = u_xx / (1 + u_x^2) on [-1, 1].
//
// Interior rows use three-point nonuniform central differences. Each wall row
// is the algebraic closure  d_nu u - g(u_wall) = 0  with a second-order
// one-sided derivative, which keeps the Newton matrix tridiagonal up to two
// corner entries (see BorderedTridiagonal).

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reaper/boundary.hpp"
#include "reaper/grid.hpp"
#include "reaper/scenarios.hpp"
#include "reaper/stencil.hpp"
#include "reaper/tridiagonal.hpp"

namespace reaper {

struct State {
  double t = 0.0;
  Eigen::VectorXd u;
};

struct Problem {
  Grid grid;
  BoundaryCondition bc;
  InitialData initial;

  /// Builds the problem and checks the wall compatibility of `initial`.
  static Problem make(Grid grid, BoundaryCondition bc, InitialData initial);
  State initial_state() const { return State{0.0, initial.sample(grid)}; }
};

struct StepController {
  double dt_init = 1e-3;
  double dt_min = 1e-10;
  double dt_max = 1e-2;
  double newton_tol = 1e-10;
  int newton_max_iters = 25;
  double growth = 1.2;
  double shrink = 0.5;
  /// consecutive fast steps required before growing dt
  int growth_streak = 3;
  /// a step is "fast" when Newton needs at most this many iterations
  int fast_iters = 4;

  void validate() const;

  bool operator==(const StepController&) const = default;
};

/// Wall rows of the discrete problem: residuals and their Jacobian entries.
/// `left_jac` holds d/du[0], d/du[1], d/du[2]; `right_jac` holds
/// d/du[n-1], d/du[n-2], d/du[n-3].
struct BoundaryRows {
  double left_residual = 0.0;
  double right_residual = 0.0;
  Eigen::Vector3d left_jac = Eigen::Vector3d::Zero();
  Eigen::Vector3d right_jac = Eigen::Vector3d::Zero();
};

BoundaryRows apply_boundary_closure(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid& grid,
                                    const BoundaryCondition& bc);

/// Interior entries: u_xx / (1 + u_x^2). Wall entries: the closure residuals.
Eigen::VectorXd semidiscrete_residual(const State& state, const Problem& problem);

/// Jacobian of semidiscrete_residual with respect to u.
BorderedTridiagonal<double> semidiscrete_jacobian(const Eigen::Ref<const Eigen::VectorXd>& u, const Grid& grid,
                                                  const BoundaryCondition& bc);

/// Backward-Euler system  R(u) = u - u_prev - dt F(u)  (interior),
/// closure residuals (walls); returns R and fills `jac` when non-null.
Eigen::VectorXd newton_residual(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& u_prev,
                                double dt, const Grid& grid, const BoundaryCondition& bc,
                                BorderedTridiagonal<double>* jac = nullptr);

/// max_i |R_i / J_ii|: the Newton residual measured in units of u.
double scaled_residual_norm(const Eigen::VectorXd& residual, const BorderedTridiagonal<double>& jac);

struct StepResult {
  State state;
  int iterations = 0;
  double residual = 0.0;
};

/// One backward-Euler step. Throws NewtonDiverged when the iteration cap is
/// hit or the residual grows, StepTooSmall when dt < ctrl.dt_min.
StepResult step_implicit(const State& state, double dt, const Problem& problem, const StepController& ctrl);

/// arctan of the discrete gradient; values lie in (-pi/2, pi/2).
Eigen::VectorXd theta_field(const Grid& grid, const State& state);

/// Adaptive-step bookkeeping; persisted so that runs can be resumed exactly.
struct ControllerState {
  double dt = 1e-3;
  int streak = 0;
  std::uint64_t steps = 0;
  std::uint64_t newton_iterations = 0;
  std::uint64_t rejected = 0;
  double dt_smallest = 0.0;
  double dt_largest = 0.0;
};

struct RunStats {
  double wall_seconds = 0.0;
  std::vector<double> dt_history;  // accepted step sizes, in order
};

struct Trajectory {
  Grid grid;
  std::string bc_description;
  std::string initial_tag;
  std::vector<State> snapshots;
  ControllerState controller;
  RunStats stats;
  bool outside_theory = false;

  const State& back() const { return snapshots.back(); }
  std::vector<double> times() const;
};

struct AdvanceOptions {
  double snapshot_interval = 0.1;
};

using Observer = std::function<void(const State&)>;

/// Steps a problem forward with the adaptive controller.
class Integrator {
 public:
  Integrator(Problem problem, StepController ctrl);
  Integrator(Problem problem, StepController ctrl, State state, ControllerState controller);

  /// Advances exactly to t_target (the last step is clipped).
  void advance_to(double t_target);

  const State& state() const { return state_; }
  const ControllerState& controller() const { return cs_; }
  const Problem& problem() const { return problem_; }
  const RunStats& stats() const { return stats_; }

 private:
  Problem problem_;
  StepController ctrl_;
  State state_;
  ControllerState cs_;
  RunStats stats_;
};

/// Integrates from t = 0 to t_end, snapshotting at multiples of the interval
/// (and at t_end). Observers fire on every snapshot. On StepTooSmall the
/// exception propagates with the partial trajectory available via `partial`.
Trajectory advance(const Problem& problem, double t_end, const StepController& ctrl, const AdvanceOptions& opts,
                   const std::vector<Observer>& observers = {}, Trajectory* partial = nullptr);

/// Continues `traj` (whose last snapshot and controller state must come from
/// this problem) up to t_end with the same snapshot cadence.
void extend(Trajectory& traj, const Problem& problem, double t_end, const StepController& ctrl,
            const AdvanceOptions& opts, const std::vector<Observer>& observers = {});

/// Snapshot time k * interval, computed without accumulation (as k / n when
/// the interval is 1/n, so decimal times come out as their literals).
double snapshot_time(std::int64_t k, double interval);

}  // namespace reaper
