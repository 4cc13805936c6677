#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <string>
#include <vector>

#include "reaper/boundary.hpp"
#include "reaper/grid.hpp"
#include "reaper/solver.hpp"

namespace reaper {

struct RefinementLevel {
  Eigen::Index nodes = 0;
  double dt = 0.0;
  double error = 0.0;
};

struct RefinementStudy {
  std::vector<RefinementLevel> levels;
  double observed_order = 0.0;

  std::string to_csv() const;
  nlohmann::json summary() const;
};

struct NeumannWaveRun {
  double error = 0.0;  // max over snapshots of the sup-norm error
  double speed = 0.0;  // least-squares speed of u(0, t) over [0, t_end]
  Trajectory trajectory;
};

/// Integrates ConstantNeumann(h) on a uniform grid with `nodes` nodes from the
/// exact wave phi(x; h) and compares against phi(x; h) + arctan(h) t.
/// `dt` is the initial step; with `fixed_step` the controller never changes it.
NeumannWaveRun neumann_wave_run(Eigen::Index nodes, double dt, double h, double t_end, bool fixed_step = true);
double neumann_wave_error(Eigen::Index nodes, double dt, double h, double t_end);

/// Mean of log2(e_i / e_{i+1}). Levels must double the interval count and
/// there must be at least three.
double observed_order(const RefinementStudy& study);

/// Neumann-wave errors on the given node counts, with observed order filled in.
RefinementStudy neumann_refinement_study(const std::vector<Eigen::Index>& nodes, double dt, double h, double t_end);

/// Max relative deviation between the analytic Jacobian of the semidiscrete
/// residual and central differences. Node j is perturbed by
/// scale * (local spacing) * (1 + |u_x|), i.e. `scale` is relative to the
/// natural variation of u across a cell. Each row is normalized by its
/// largest analytic entry.
double jacobian_fd_check(const Eigen::VectorXd& u, const Grid& grid, const BoundaryCondition& bc, double scale);

/// Smooth pseudo-random state: c0 + sum_k a_k cos(k pi x / 2 + phase_k).
Eigen::VectorXd random_smooth_state(const Grid& grid, std::uint64_t seed);

}  // namespace reaper
