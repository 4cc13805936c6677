#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "reaper/boundary.hpp"
#include "reaper/closed_forms.hpp"
#include "reaper/errors.hpp"
#include "reaper/grid.hpp"
#include "reaper/scenarios.hpp"
#include "reaper/solver.hpp"
#include "reaper/stencil.hpp"
#include "reaper/tridiagonal.hpp"
#include "reaper/verification.hpp"

using namespace reaper;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd sample(const Grid& g, double (*f)(double)) {
  Eigen::VectorXd u(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = f(g[i]);
  return u;
}

Eigen::VectorXd wave_samples(const Grid& g, double h, double shift) {
  Eigen::VectorXd u(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = traveling_wave_profile(g[i], h) + shift;
  return u;
}

Problem neumann_wave_problem(const Grid& g, double h) { return Problem::make(g, ConstantNeumann{h}, traveling_wave_initial(h)); }

}  // namespace

TEST_CASE("graded grid nodes") {
  const Grid g1 = make_graded_grid(4, 1.0);
  const Grid g2 = make_graded_grid(4, 2.0);
  const double uniform[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double graded[] = {-1.0, -0.75, 0.0, 0.75, 1.0};
  REQUIRE(g1.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(g1[i] == doctest::Approx(uniform[i]));
    CHECK(g2[i] == doctest::Approx(graded[i]));
  }
}

TEST_CASE("grids are mirror symmetric and refine toward the walls") {
  for (double beta : {1.0, 2.0, 3.0, 5.5}) {
    const Grid g = make_graded_grid(600, beta);
    REQUIRE(g.size() == 601);
    CHECK(g[g.center_index()] == 0.0);
    for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(g[i] == -g[g.size() - 1 - i]);
    if (beta > 1.0) CHECK(g.spacing(0) < g.spacing(299));
  }
  const Grid u = make_uniform_grid(100);
  CHECK(u.size() == 101);
  CHECK(u.min_spacing() == doctest::Approx(u.max_spacing()));
}

TEST_CASE("grid preconditions") {
  CHECK_THROWS_AS(make_graded_grid(5, 2.0), ContractViolation);
  CHECK_THROWS_AS(make_graded_grid(0, 2.0), ContractViolation);
  CHECK_THROWS_AS(make_graded_grid(10, 0.5), ContractViolation);
  CHECK_THROWS_AS(make_uniform_grid(1), ContractViolation);
}

TEST_CASE("interpolation is exact on linear data") {
  const Grid g = make_graded_grid(20, 2.0);
  Eigen::VectorXd u(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = 3.0 * g[i] - 1.0;
  for (double x : {-1.0, -0.37, 0.0, 0.81, 1.0}) CHECK(interpolate(g, u, x) == doctest::Approx(3.0 * x - 1.0));
  CHECK_THROWS_AS(interpolate(g, Eigen::VectorXd::Zero(3), 0.0), ContractViolation);
}

TEST_CASE("residual of the exact Neumann wave is its speed") {
  const Grid g = make_uniform_grid(800);
  const Problem p = neumann_wave_problem(g, 1.0);
  const Eigen::VectorXd f = semidiscrete_residual(p.initial_state(), p);
  double worst = 0.0;
  for (Eigen::Index i = 1; i + 1 < g.size(); ++i) worst = std::max(worst, std::abs(f[i] - kPi / 4));
  CHECK(worst <= 1e-4);
}

TEST_CASE("constant state has zero interior residual") {
  const Grid g = make_graded_grid(64, 2.0);
  const Problem p{g, ConstantNeumann{0.7}, traveling_wave_initial(0.7)};
  const Eigen::VectorXd f = semidiscrete_residual(State{0.0, Eigen::VectorXd::Constant(g.size(), 5.0)}, p);
  for (Eigen::Index i = 1; i + 1 < g.size(); ++i) CHECK(f[i] == 0.0);
}

TEST_CASE("interior residual of phi0 is pi/2") {
  const Grid g = make_uniform_grid(2000);
  const Problem p{g, NonlinearRobin{}, symmetric_initial(1.0)};
  Eigen::VectorXd u(g.size());
  // phi0 diverges at the walls; only nodes with |x| <= 0.9 are checked
  for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = interior_grim_reaper(std::clamp(g[i], -0.99, 0.99));
  const Eigen::VectorXd f = semidiscrete_residual(State{0.0, u}, p);
  for (Eigen::Index i = 1; i + 1 < g.size(); ++i) {
    if (std::abs(g[i]) <= 0.9) CHECK(f[i] == doctest::Approx(kPi / 2).epsilon(1e-4));
  }
}

TEST_CASE("boundary closure is second order for compatible data") {
  auto wall_residual = [](Eigen::Index n, bool robin) {
    const Grid g = make_uniform_grid(n);
    if (robin) {
      const Eigen::VectorXd u = symmetric_initial(1.0).sample(g);
      const BoundaryRows r = apply_boundary_closure(u, g, NonlinearRobin{});
      return std::max(std::abs(r.left_residual), std::abs(r.right_residual));
    }
    const BoundaryRows r = apply_boundary_closure(wave_samples(g, 1.0, 2.5), g, ConstantNeumann{1.0});
    return std::max(std::abs(r.left_residual), std::abs(r.right_residual));
  };
  for (bool robin : {false, true}) {
    const double e1 = wall_residual(100, robin);
    const double e2 = wall_residual(200, robin);
    CHECK(e1 > 0.0);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("symmetric data gives mirrored wall residuals") {
  const Grid g = make_graded_grid(100, 3.0);
  const Eigen::VectorXd u = psi_initial(1.0).sample(g);
  const BoundaryRows r = apply_boundary_closure(u, g, NonlinearRobin{});
  CHECK(std::abs(r.left_residual) == doctest::Approx(std::abs(r.right_residual)).epsilon(1e-12));
}

TEST_CASE("bordered tridiagonal solve matches a dense solve") {
  const Grid g = make_graded_grid(40, 2.0);
  const Eigen::VectorXd u = random_smooth_state(g, 11);
  const BorderedTridiagonal<double> j = semidiscrete_jacobian(u, g, NonlinearRobin{});
  BorderedTridiagonal<double> a = j;
  for (Eigen::Index i = 1; i + 1 < a.size(); ++i) a.diag[i] += 50.0;  // shifted like I - dt J
  const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(a.size(), -1.0, 2.0);
  const Eigen::VectorXd x = a.solve(rhs);
  const Eigen::VectorXd dense = a.to_dense().fullPivLu().solve(rhs);
  CHECK((x - dense).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + dense.lpNorm<Eigen::Infinity>()));
  CHECK((a.multiply(x) - rhs).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("one implicit step of the exact wave") {
  const Grid g = make_uniform_grid(400);
  const Problem p = neumann_wave_problem(g, 1.0);
  const StepResult r = step_implicit(p.initial_state(), 1e-3, p, StepController{});
  CHECK(r.state.t == doctest::Approx(1e-3));
  CHECK(r.iterations >= 1);
  const Eigen::VectorXd d = r.state.u - wave_samples(g, 1.0, kPi / 4 * 1e-3);
  CHECK((d.maxCoeff() - d.minCoeff()) / 2.0 <= 5e-6);
}

TEST_CASE("stationary affine data stays put") {
  const Grid g = make_uniform_grid(50);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(g.size(), 2.0);
  const Problem p{g, AffineRobin{0.0, 0.0, 0.0, 0.0}, InitialData{ExplicitSamples{c}}};
  const StepResult r = step_implicit(State{0.0, c}, 1e-2, p, StepController{});
  CHECK((r.state.u - c).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("step controller validation") {
  StepController c;
  CHECK_NOTHROW(c.validate());
  c.dt_min = 1.0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = StepController{};
  c.shrink = 1.0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);
  c = StepController{};
  c.newton_max_iters = 0;
  CHECK_THROWS_AS(c.validate(), ContractViolation);

  const Grid g = make_uniform_grid(50);
  const Problem p = neumann_wave_problem(g, 1.0);
  CHECK_THROWS_AS(step_implicit(p.initial_state(), 1e-12, p, StepController{}), StepTooSmall);
  CHECK_THROWS_AS(step_implicit(p.initial_state(), 0.0, p, StepController{}), ContractViolation);
}

TEST_CASE("snapshot bookkeeping") {
  const Grid g = make_uniform_grid(100);
  const Problem p = neumann_wave_problem(g, 1.0);
  int observed = 0;
  const Trajectory t = advance(p, 1.0, StepController{}, AdvanceOptions{0.1}, {[&](const State&) { ++observed; }});
  REQUIRE(t.snapshots.size() == 11);
  CHECK(observed == 11);
  CHECK(t.snapshots.front().t == 0.0);
  CHECK(t.back().t == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 1; k < t.snapshots.size(); ++k) CHECK(t.snapshots[k].t > t.snapshots[k - 1].t);
  CHECK_THROWS_AS(advance(p, 1.0, StepController{}, AdvanceOptions{0.0}), ContractViolation);
  CHECK_THROWS_AS(advance(p, 0.0, StepController{}, AdvanceOptions{0.1}), ContractViolation);
}

TEST_CASE("extending a trajectory reproduces a single run exactly") {
  const Grid g = make_graded_grid(100, 2.0);
  const Problem p = Problem::make(g, NonlinearRobin{}, symmetric_initial(1.0));
  const AdvanceOptions opts{0.1};
  const Trajectory whole = advance(p, 3.0, StepController{}, opts);
  Trajectory part = advance(p, 1.7, StepController{}, opts);
  extend(part, p, 3.0, StepController{}, opts);
  REQUIRE(part.snapshots.size() == whole.snapshots.size());
  for (std::size_t k = 0; k < whole.snapshots.size(); ++k) {
    CHECK(part.snapshots[k].t == whole.snapshots[k].t);
    CHECK((part.snapshots[k].u - whole.snapshots[k].u).lpNorm<Eigen::Infinity>() == 0.0);
  }
  CHECK_THROWS_AS(extend(part, Problem::make(make_uniform_grid(100), NonlinearRobin{}, symmetric_initial(1.0)), 4.0,
                         StepController{}, opts),
                  ContractViolation);
}

TEST_CASE("long nonlinear Robin run keeps the wall closure") {
  const Grid g = make_graded_grid(600, 3.0);
  const Problem p = Problem::make(g, NonlinearRobin{}, symmetric_initial(1.0));
  const Trajectory t = advance(p, 15.0, StepController{}, AdvanceOptions{1.0});
  const GridStencils s(g);
  const Eigen::VectorXd& u = t.back().u;
  CHECK(std::abs(outward_derivative_right(s, u) - u[u.size() - 1]) <= 1e-6 * (1.0 + u[u.size() - 1]));
  CHECK(std::abs(outward_derivative_left(s, u) - u[0]) <= 1e-6 * (1.0 + u[0]));
  CHECK(u.minCoeff() > 20.0);
}

TEST_CASE("theta field") {
  const Grid g = make_uniform_grid(400);
  const Eigen::VectorXd th0 = theta_field(g, State{0.0, Eigen::VectorXd::Constant(g.size(), 3.0)});
  CHECK(th0.lpNorm<Eigen::Infinity>() == 0.0);

  auto phi0 = [](double x) { return interior_grim_reaper(std::clamp(x, -0.99, 0.99)); };
  Eigen::VectorXd u(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = phi0(g[i]);
  const Eigen::VectorXd th = theta_field(g, State{0.0, u});
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) <= 0.9) worst = std::max(worst, std::abs(th[i] - kPi / 2 * g[i]));
    CHECK(std::abs(th[i]) < kPi / 2);
  }
  CHECK(worst <= 1e-3);

  const Eigen::VectorXd even = symmetric_initial(1.0).sample(g);
  const Eigen::VectorXd odd = theta_field(g, State{0.0, even});
  for (Eigen::Index i = 0; i < g.size(); ++i) CHECK(odd[i] == doctest::Approx(-odd[g.size() - 1 - i]).epsilon(1e-12));
}

TEST_CASE("wall law bookkeeping") {
  CHECK(prescribed_slope_right(NonlinearRobin{}, 2.5) == 2.5);
  CHECK(prescribed_slope_left(NonlinearRobin{}, 2.5) == -2.5);
  CHECK(prescribed_slope_right(ConstantNeumann{1.5}, 9.0) == 1.5);
  CHECK(prescribed_slope_left(ConstantNeumann{1.5}, 9.0) == -1.5);
  CHECK(prescribed_slope_right(AffineRobin{-0.5, 0.5, -0.2, 0.3}, 2.0) == doctest::Approx(1.3));
  CHECK_FALSE(outside_convergence_theory(NonlinearRobin{}));
  CHECK(outside_convergence_theory(AffineRobin{-0.5, 0.5, 0.0, 0.0}));
  CHECK_FALSE(outside_convergence_theory(AffineRobin{0.5, 0.5, 0.0, 0.0}));
  CHECK(describe(ConstantNeumann{2.0}) == "neumann(h=2)");
}
