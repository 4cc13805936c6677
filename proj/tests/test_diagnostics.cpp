#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "reaper/boundary.hpp"
#include "reaper/closed_forms.hpp"
#include "reaper/diagnostics.hpp"
#include "reaper/errors.hpp"
#include "reaper/grid.hpp"
#include "reaper/scenarios.hpp"
#include "reaper/solver.hpp"

using namespace reaper;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

template <class F>
Eigen::VectorXd sample(const Grid& g, F f) {
  Eigen::VectorXd u(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) u[i] = f(g[i]);
  return u;
}

Trajectory from_states(const Grid& g, std::vector<State> states) {
  Trajectory t;
  t.grid = g;
  t.snapshots = std::move(states);
  return t;
}

StepController fixed(double dt) {
  StepController c;
  c.dt_init = dt;
  c.dt_max = dt;
  return c;
}

}  // namespace

TEST_CASE("sign changes on small vectors") {
  CHECK(sign_change_count(vec({1, -1, 1}), 1e-12).count == 2);
  CHECK(sign_change_count(vec({1, 2, 3}), 1e-12).count == 0);
  CHECK(sign_change_count(vec({-1, -2}), 1e-12).count == 0);

  const ZeroCount z = sign_change_count(vec({1, 1e-15, -1}), 1e-12);
  CHECK(z.count == 1);
  REQUIRE(z.degenerate.size() == 1);
  CHECK(z.degenerate[0] == 1);

  // a touching zero is flagged but does not count
  const ZeroCount touch = sign_change_count(vec({1, 0, 1}), 1e-12);
  CHECK(touch.count == 0);
  CHECK(touch.has_degenerate());

  CHECK(default_degeneracy_tol(vec({0.0, -3.0})) == doctest::Approx(4e-9));
}

TEST_CASE("sin(3 pi x) has five interior sign changes") {
  const Grid g = make_uniform_grid(199);  // 200 nodes, none at a zero except x = 0
  const Eigen::VectorXd v = sample(g, [](double x) { return std::sin(3.0 * kPi * x); });
  const ZeroCount z = sign_change_count(v, default_degeneracy_tol(v));
  CHECK(z.count == 5);
  // only the wall nodes, where sin(3 pi) rounds to ~1e-16, are flagged
  for (Eigen::Index i : z.degenerate) CHECK((i == 0 || i == g.size() - 1));
}

TEST_CASE("sign counts are invariant under reflection") {
  const Grid g = make_uniform_grid(300);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [a, b] = crossing_pair(seed, 3);
    const Eigen::VectorXd d = a.sample(g) - b.sample(g);
    const Eigen::VectorXd r = d.reverse();
    CHECK(sign_change_count(d, 1e-12).count == sign_change_count(r, 1e-12).count);
  }
}

TEST_CASE("intersections of identical and shifted states") {
  const Grid g = make_uniform_grid(100);
  const State a{0.0, symmetric_initial(1.0).sample(g)};
  const ZeroCount same = intersection_count(a, a);
  CHECK(same.count == 0);
  CHECK(same.degenerate.size() == static_cast<std::size_t>(g.size()));

  State b = a;
  b.u.array() += 0.5;
  const ZeroCount shifted = intersection_count(a, b);
  CHECK(shifted.count == 0);
  CHECK_FALSE(shifted.has_degenerate());

  const State short_state{0.0, Eigen::VectorXd::Zero(3)};
  CHECK_THROWS_AS(intersection_count(a, short_state), ContractViolation);
}

TEST_CASE("grim reaper intersections treat the walls as +infinity") {
  const Grid g = make_uniform_grid(200);
  // a flat state far below the interior reaper meets it nowhere
  const State low{0.0, Eigen::VectorXd::Constant(g.size(), -5.0)};
  CHECK(grim_reaper_intersections(g, low, 0.0, 1e-12).count == 0);
  // a flat state above phi0(0) is crossed twice as phi0 blows up at the walls
  const State high{0.0, Eigen::VectorXd::Constant(g.size(), 1.0)};
  CHECK(grim_reaper_intersections(g, high, 0.0, 1e-12).count == 2);
}

TEST_CASE("ordering of identical trajectories has zero margin") {
  const Grid g = make_uniform_grid(100);
  const Eigen::VectorXd u = symmetric_initial(1.0).sample(g);
  const Trajectory a = from_states(g, {State{0.0, u}, State{0.1, u}});
  const OrderingReport r = verify_ordering(a, a, 0.0);
  CHECK(r.precondition_ok);
  CHECK(r.holds);
  CHECK(r.worst_violation == 0.0);

  Trajectory up = a;
  for (auto& s : up.snapshots) s.u.array() += 1.0;
  const OrderingReport ok = verify_ordering(a, up, 1e-12);
  CHECK(ok.holds);
  CHECK(ok.worst_violation == doctest::Approx(-1.0));

  const OrderingReport bad = verify_ordering(up, a, 1e-12);
  CHECK_FALSE(bad.precondition_ok);
  CHECK_FALSE(bad.holds);
}

TEST_CASE("shifted ordering compares matching times") {
  const Grid g = make_uniform_grid(50);
  std::vector<State> s;
  for (int k = 0; k <= 10; ++k) s.push_back(State{0.1 * k, Eigen::VectorXd::Constant(g.size(), 0.1 * k)});
  const Trajectory t = from_states(g, s);
  // t(tau) <= t(tau + 0.3) for an increasing state
  const OrderingReport r = verify_ordering_shifted(t, t, 0.3, 1e-12);
  CHECK(r.holds);
  CHECK(r.worst_violation == doctest::Approx(-0.3));
  CHECK_FALSE(verify_ordering_shifted(t, t, -0.3, 1e-12).holds);
}

TEST_CASE("fifty random ordered pairs stay ordered") {
  // The slope-dependent coefficient makes the scheme monotone only once the
  // bumps are resolved; at 80 intervals one seed overtakes by ~1e-4.
  const Grid g = make_uniform_grid(200);
  const StepController c = fixed(5e-3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto [lo, hi] = ordered_pair(seed);
    const Trajectory a = advance(Problem::make(g, NonlinearRobin{}, lo), 0.2, c, AdvanceOptions{0.05});
    const Trajectory b = advance(Problem::make(g, NonlinearRobin{}, hi), 0.2, c, AdvanceOptions{0.05});
    const OrderingReport r = verify_ordering(a, b, 1e-10);
    CHECK(r.precondition_ok);
    CHECK(r.holds);
  }
}

TEST_CASE("wave speed of the exact Neumann wave") {
  const double h = 1.0;
  const Grid g = make_uniform_grid(400);
  const Problem p = Problem::make(g, ConstantNeumann{h}, traveling_wave_initial(h, 0.0));
  const Trajectory t = advance(p, 2.0, fixed(1e-3), AdvanceOptions{0.1});
  CHECK(wave_speed_estimate(t, 0.5, 2.0) == doctest::Approx(kPi / 4).epsilon(1e-5));
  CHECK(center_value(g, t.back()) == doctest::Approx(kPi / 4 * 2.0).epsilon(1e-4));
  CHECK_THROWS_AS(wave_speed_estimate(t, 3.0, 4.0), ContractViolation);
}

TEST_CASE("shape error against the interior reaper") {
  const Grid g = make_uniform_grid(400);
  const State exact{0.0, sample(g, [](double x) { return std::abs(x) < 1.0 ? interior_grim_reaper(x) + 3.0 : 0.0; })};
  CHECK(shape_error(g, exact, 0.8) <= 1e-14);

  const State wave{0.0, sample(g, [](double x) { return traveling_wave_profile(x, 1.0) + 2.5; })};
  double dense = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) <= 0.8) dense = std::max(dense, std::abs(traveling_wave_profile(g[i], 1.0) - interior_grim_reaper(g[i])));
  }
  CHECK(shape_error(g, wave, 0.8) == doctest::Approx(dense).epsilon(1e-12));

  State lifted = wave;
  lifted.u.array() += 17.0;
  CHECK(shape_error(g, lifted, 0.8) == doctest::Approx(shape_error(g, wave, 0.8)).epsilon(1e-12));
}

TEST_CASE("gradient envelope on the envelope profiles") {
  const Grid g = make_uniform_grid(2000);
  // the lower profile sits on its own lower envelope
  const State lower{0.0, sample(g, [](double x) { return traveling_wave_profile(x, 1.0); })};
  const EnvelopeReport r = gradient_envelope_check(g, lower, 1.0, 0.1, 0.9, 1e-4);
  CHECK(r.ok());
  CHECK(std::abs(r.worst_lower_margin) <= 1e-4);
  CHECK(r.worst_upper_margin > 0.0);

  // steeper than tan(pi x / 2) near the walls
  const State steep{0.0, sample(g, [](double x) { return 3.0 * x * x * x * x * x * x; })};
  CHECK_FALSE(gradient_envelope_check(g, steep, 1.0, 0.1, 0.9, 1e-4).upper_ok);

  // a flat state misses the lower envelope
  const State flat{0.0, Eigen::VectorXd::Zero(g.size())};
  const EnvelopeReport f = gradient_envelope_check(g, flat, 1.0, 0.1, 0.9, 1e-4);
  CHECK_FALSE(f.lower_ok);
  CHECK(f.upper_ok);

  CHECK_THROWS_AS(gradient_envelope_check(g, flat, 1.0, 0.5, 0.2, 1e-4), ContractViolation);
}

TEST_CASE("interior gradient threshold") {
  const double eps = 0.2;
  const double m1 = interior_gradient_threshold(eps, 0.0);
  CHECK(m1 == doctest::Approx(interior_grim_reaper(0.8) / 0.2).epsilon(1e-14));
  CHECK(interior_gradient_threshold(eps, 1.0) == doctest::Approx((interior_grim_reaper(0.8) + kPi / 2) / 0.2));
  CHECK_THROWS_AS(interior_gradient_threshold(0.0, 1.0), ContractViolation);
  CHECK_THROWS_AS(interior_gradient_threshold(0.5, 1.0), ContractViolation);

  // phi0 has slope tan(0.4 pi) at 0.8, which lies below M1
  const Grid g = make_uniform_grid(2000);
  const State reaper{0.0, sample(g, [](double x) { return std::abs(x) < 1.0 ? interior_grim_reaper(x) : 0.0; })};
  CHECK(3.07768353717525413 < m1);
  const BoundsReport b = interior_min_gradient_check(g, reaper, eps, 0.0);
  CHECK(b.m1_ok);
  // the slope increases towards the wall, so the band minimum sits at 1 - 2 eps
  CHECK(b.min_slope_right == doctest::Approx(std::tan(0.3 * kPi)).epsilon(1e-3));
  CHECK(b.min_slope_left == doctest::Approx(std::tan(0.3 * kPi)).epsilon(1e-3));

  const State constant{0.0, Eigen::VectorXd::Constant(g.size(), 4.0)};
  const BoundsReport c = interior_min_gradient_check(g, constant, eps, 0.0);
  CHECK(c.min_slope_right == 0.0);
  CHECK(c.min_slope_left == 0.0);
  CHECK(c.m2_value == 0.0);
}

TEST_CASE("lower height bound at the initial time") {
  const Grid g = make_graded_grid(200, 3.0);
  const double shift = 1.0 - traveling_wave_boundary_height(1.0);
  const State barrier{0.0, sample(g, [&](double x) { return traveling_wave_profile(x, 1.0) + shift; })};
  CHECK(std::abs(lower_height_margin(g, barrier)) <= 1e-14);
  CHECK(lower_height_bound_check(g, barrier, 1e-12));

  const State sym{0.0, symmetric_initial(1.0).sample(g)};
  CHECK(lower_height_margin(g, sym) > 0.0);

  State late = barrier;
  late.t = 1.0;  // the barrier has moved up by pi/4
  CHECK(lower_height_margin(g, late) == doctest::Approx(-kPi / 4).epsilon(1e-12));
  CHECK_FALSE(lower_height_bound_check(g, late, 1e-8));
}

TEST_CASE("convexity defect") {
  const Grid g = make_uniform_grid(100);
  const State parabola{0.0, sample(g, [](double x) { return x * x; })};
  CHECK(convexity_defect(g, parabola) == doctest::Approx(2.0 * 0.02 * 0.02).epsilon(1e-9));
  const State line{0.0, sample(g, [](double x) { return 3.0 * x - 1.0; })};
  CHECK(std::abs(convexity_defect(g, line)) <= 1e-14);
  const State cap{0.0, sample(g, [](double x) { return -x * x; })};
  CHECK(convexity_defect(g, cap) < 0.0);
}

TEST_CASE("symmetric data stays symmetric and psi data stays convex") {
  const Grid g = make_graded_grid(200, 3.0);
  const StepController c = fixed(1e-3);
  const Trajectory sym = advance(Problem::make(g, NonlinearRobin{}, symmetric_initial(1.0)), 0.5, c, AdvanceOptions{0.1});
  for (const State& s : sym.snapshots) CHECK((s.u - s.u.reverse()).cwiseAbs().maxCoeff() <= 1e-10);

  const Trajectory psi = advance(Problem::make(g, NonlinearRobin{}, psi_initial(1.0)), 0.5, c, AdvanceOptions{0.1});
  for (std::size_t k = 1; k < psi.snapshots.size(); ++k) {
    CHECK(center_value(g, psi.snapshots[k]) >= center_value(g, psi.snapshots[k - 1]));
    CHECK(convexity_defect(g, psi.snapshots[k]) >= -1e-12);
  }
}

TEST_CASE("report honours informational checks") {
  DiagnosticsReport r;
  r.checks.push_back(CheckResult{"a", {}, true, false, 0.1, {}});
  r.checks.push_back(CheckResult{"b", {}, false, true, -0.2, {}});
  CHECK(r.all_pass());
  REQUIRE(r.find("b") != nullptr);
  CHECK(r.find("b")->worst_margin == -0.2);
  CHECK(r.find("c") == nullptr);

  r.checks.push_back(CheckResult{"c", {}, false, false, -1.0, {}});
  CHECK_FALSE(r.all_pass());
  const auto j = r.to_json();
  CHECK(j.dump().find("\"c\"") != std::string::npos);
}
