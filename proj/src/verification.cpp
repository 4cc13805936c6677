#include "reaper/verification.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "reaper/closed_forms.hpp"
#include "reaper/diagnostics.hpp"
#include "reaper/errors.hpp"
#include "reaper/stencil.hpp"

namespace reaper {

NeumannWaveRun neumann_wave_run(Eigen::Index nodes, double dt, double h, double t_end, bool fixed_step) {
  if (nodes < 5 || !(dt > 0.0) || !(h > 0.0) || !(t_end > 0.0)) {
    throw ContractViolation("neumann_wave_run: parameters must be positive (nodes >= 5)");
  }
  const Problem problem = Problem::make(make_uniform_grid(nodes - 1), ConstantNeumann{h}, traveling_wave_initial(h));
  StepController ctrl;
  ctrl.dt_init = dt;
  ctrl.dt_min = std::min(1e-10, dt);
  ctrl.dt_max = fixed_step ? dt : std::max(dt, 1e-2);

  const auto wave = TravelingWave<double>::make(h);
  NeumannWaveRun run;
  run.trajectory = advance(problem, t_end, ctrl, AdvanceOptions{t_end / 20.0});
  for (const State& s : run.trajectory.snapshots) {
    double err = 0.0;
    for (Eigen::Index i = 0; i < problem.grid.size(); ++i) {
      err = std::max(err, std::abs(s.u[i] - wave.value(problem.grid[i], s.t)));
    }
    run.error = std::max(run.error, err);
  }
  run.speed = wave_speed_estimate(run.trajectory, 0.0, t_end);
  return run;
}

double neumann_wave_error(Eigen::Index nodes, double dt, double h, double t_end) {
  return neumann_wave_run(nodes, dt, h, t_end).error;
}

double observed_order(const RefinementStudy& study) {
  const auto& lv = study.levels;
  if (lv.size() < 3) throw ContractViolation("observed_order: need at least three levels");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < lv.size(); ++i) {
    if (lv[i + 1].nodes - 1 != 2 * (lv[i].nodes - 1)) {
      throw ContractViolation("observed_order: levels must double the interval count");
    }
    if (!(lv[i].error > 0.0 && lv[i + 1].error > 0.0)) {
      throw ContractViolation("observed_order: errors must be positive");
    }
    sum += std::log2(lv[i].error / lv[i + 1].error);
  }
  return sum / static_cast<double>(lv.size() - 1);
}

RefinementStudy neumann_refinement_study(const std::vector<Eigen::Index>& nodes, double dt, double h, double t_end) {
  RefinementStudy study;
  for (Eigen::Index n : nodes) study.levels.push_back({n, dt, neumann_wave_error(n, dt, h, t_end)});
  study.observed_order = observed_order(study);
  return study;
}

std::string RefinementStudy::to_csv() const {
  std::string out = "N,dt,error\n";
  for (const auto& l : levels) out += fmt::format("{},{:.17g},{:.17g}\n", l.nodes, l.dt, l.error);
  return out;
}

nlohmann::json RefinementStudy::summary() const {
  nlohmann::json j;
  j["observed_order"] = observed_order;
  j["levels"] = nlohmann::json::array();
  for (const auto& l : levels) j["levels"].push_back({{"N", l.nodes}, {"dt", l.dt}, {"error", l.error}});
  return j;
}

double jacobian_fd_check(const Eigen::VectorXd& u, const Grid& grid, const BoundaryCondition& bc, double scale) {
  if (!(scale >= 1e-8 && scale <= 1e-4)) throw ContractViolation("jacobian_fd_check: scale must lie in [1e-8, 1e-4]");
  const Eigen::Index n = grid.size();
  const auto analytic = semidiscrete_jacobian(u, grid, bc);
  const Eigen::VectorXd slope = discrete_gradient(grid, u);
  Problem probe{grid, bc, InitialData{ExplicitSamples{u}}};

  Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cell = std::min(j > 0 ? grid.spacing(j - 1) : grid.spacing(0), j + 1 < n ? grid.spacing(j) : grid.spacing(n - 2));
    const double step = scale * cell * (1.0 + std::abs(slope[j]));
    State plus{0.0, u};
    State minus{0.0, u};
    plus.u[j] += step;
    minus.u[j] -= step;
    const Eigen::VectorXd col = (semidiscrete_residual(plus, probe) - semidiscrete_residual(minus, probe)) / (2.0 * step);
    fd.col(j) = col;
  }

  const Eigen::MatrixXd dense = analytic.to_dense();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_scale = dense.row(i).cwiseAbs().maxCoeff();
    if (row_scale == 0.0) continue;
    worst = std::max(worst, (dense.row(i) - fd.row(i)).cwiseAbs().maxCoeff() / row_scale);
  }
  return worst;
}

Eigen::VectorXd random_smooth_state(const Grid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double base = 1.0 + 2.0 * unit(rng);
  constexpr int modes = 4;
  double amp[modes], phase[modes];
  for (int k = 0; k < modes; ++k) {
    amp[k] = (2.0 * unit(rng) - 1.0) / (1.0 + k);
    phase[k] = 2.0 * std::numbers::pi * unit(rng);
  }
  Eigen::VectorXd u(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    double v = base;
    for (int k = 0; k < modes; ++k) v += amp[k] * std::cos((k + 1) * std::numbers::pi * grid[i] / 2.0 + phase[k]);
    u[i] = v;
  }
  return u;
}

}  // namespace reaper
