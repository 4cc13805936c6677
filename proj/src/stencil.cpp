#include "reaper/stencil.hpp"

#include "reaper/errors.hpp"

namespace reaper {

GridStencils::GridStencils(const Grid& grid) {
  const Eigen::Index n = grid.size();
  if (n < 3) throw ContractViolation("GridStencils: need at least 3 nodes");
  d1_minus = Eigen::VectorXd::Zero(n);
  d1_plus = Eigen::VectorXd::Zero(n);
  d2_minus = Eigen::VectorXd::Zero(n);
  d2_plus = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const auto w = central_weights(grid.spacing(i - 1), grid.spacing(i));
    d1_minus[i] = w.d1_minus;
    d1_plus[i] = w.d1_plus;
    d2_minus[i] = w.d2_minus;
    d2_plus[i] = w.d2_plus;
  }
  left = outward_wall_weights(grid[1] - grid[0], grid[2] - grid[0]);
  right = outward_wall_weights(grid[n - 1] - grid[n - 2], grid[n - 1] - grid[n - 3]);
}

Eigen::VectorXd discrete_gradient(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (u.size() != grid.size()) throw ContractViolation("discrete_gradient: samples not aligned with grid");
  const GridStencils s(grid);
  const Eigen::Index n = u.size();
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    g[i] = s.d1_minus[i] * (u[i - 1] - u[i]) + s.d1_plus[i] * (u[i + 1] - u[i]);
  }
  g[0] = -outward_derivative_left(s, u);
  g[n - 1] = outward_derivative_right(s, u);
  return g;
}

Eigen::VectorXd discrete_second_derivative(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (u.size() != grid.size()) {
    throw ContractViolation("discrete_second_derivative: samples not aligned with grid");
  }
  const GridStencils s(grid);
  const Eigen::Index n = u.size();
  Eigen::VectorXd d2 = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    d2[i] = s.d2_minus[i] * (u[i - 1] - u[i]) + s.d2_plus[i] * (u[i + 1] - u[i]);
  }
  return d2;
}

}  // namespace reaper
