#pragma once

#include <string>
#include <variant>

namespace reaper {

/// u_x(+-1, t) = +-u(+-1, t): slopes grow with the height of the curve.
struct NonlinearRobin {
  bool operator==(const NonlinearRobin&) const = default;
};

/// u_x(+-1, t) = +-h.
struct ConstantNeumann {
  double h = 1.0;

  bool operator==(const ConstantNeumann&) const = default;
};

/// u_x(+-1, t) = alpha_+- u(+-1, t) + beta_+-.
struct AffineRobin {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double beta_minus = 0.0;
  double beta_plus = 0.0;

  bool operator==(const AffineRobin&) const = default;
};

using BoundaryCondition = std::variant<NonlinearRobin, ConstantNeumann, AffineRobin>;

/// Wall data in outward-normal form:  d_nu u = g(u)  with d_nu = -d_x on the
/// left wall and +d_x on the right wall. `slope` is dg/du.
struct WallLaw {
  double value = 0.0;
  double slope = 0.0;
};

WallLaw left_wall_law(const BoundaryCondition& bc, double u_wall);
WallLaw right_wall_law(const BoundaryCondition& bc, double u_wall);

/// Prescribed u_x at x = -1 and x = +1 for the given wall values.
double prescribed_slope_left(const BoundaryCondition& bc, double u_wall);
double prescribed_slope_right(const BoundaryCondition& bc, double u_wall);

std::string describe(const BoundaryCondition& bc);

/// Affine Robin data with alpha_- < 0 < alpha_+ lies outside the regime where
/// convergence results are known; runs flag it in their metadata.
bool outside_convergence_theory(const BoundaryCondition& bc);

}  // namespace reaper
