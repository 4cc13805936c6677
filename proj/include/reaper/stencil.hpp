#pragma once

// Three-point finite-difference weights on nonuniform nodes.
//
// All stencils are written in difference form, e.g. u_x ~ wm (u[i-1] - u[i]) +
// wp (u[i+1] - u[i]), so that tiny wall cells do not amplify the rounding of
// O(1) node values, and so that a mirrored grid produces mirrored results
// bit for bit.

#include <Eigen/Core>

#include "reaper/grid.hpp"

namespace reaper {

template <typename Scalar>
struct CentralWeights {
  // first derivative
  Scalar d1_minus{};
  Scalar d1_plus{};
  // second derivative
  Scalar d2_minus{};
  Scalar d2_plus{};
};

/// Weights at a node with left spacing `hm` and right spacing `hp`.
template <typename Scalar>
CentralWeights<Scalar> central_weights(Scalar hm, Scalar hp) {
  CentralWeights<Scalar> w;
  const Scalar sum = hm + hp;
  w.d1_minus = -hp / (hm * sum);
  w.d1_plus = hm / (hp * sum);
  w.d2_minus = Scalar(2) / (hm * sum);
  w.d2_plus = Scalar(2) / (hp * sum);
  return w;
}

/// Second-order one-sided derivative at a wall, in outward-normal form:
///   d_nu u ~ near (u[wall+-1] - u[wall]) + far (u[wall+-2] - u[wall])
/// where `d_near` and `d_far` are the distances from the wall to the first
/// and second interior nodes.
template <typename Scalar>
struct WallWeights {
  Scalar near{};
  Scalar far{};
};

template <typename Scalar>
WallWeights<Scalar> outward_wall_weights(Scalar d_near, Scalar d_far) {
  // Inward derivative weights are d_far/(d_near (d_far - d_near)) and
  // -d_near/(d_far (d_far - d_near)); the outward normal flips both.
  const Scalar gap = d_far - d_near;
  return WallWeights<Scalar>{-d_far / (d_near * gap), d_near / (d_far * gap)};
}

/// Precomputed stencils for every node of a grid.
struct GridStencils {
  Eigen::VectorXd d1_minus, d1_plus, d2_minus, d2_plus;  // interior rows
  WallWeights<double> left, right;

  explicit GridStencils(const Grid& grid);
};

/// Outward normal derivative at the left (-u_x(-1)) and right (u_x(1)) walls.
template <typename Derived>
typename Derived::Scalar outward_derivative_left(const GridStencils& s, const Eigen::MatrixBase<Derived>& u) {
  return s.left.near * (u[1] - u[0]) + s.left.far * (u[2] - u[0]);
}

template <typename Derived>
typename Derived::Scalar outward_derivative_right(const GridStencils& s, const Eigen::MatrixBase<Derived>& u) {
  const Eigen::Index n = u.size() - 1;
  return s.right.near * (u[n - 1] - u[n]) + s.right.far * (u[n - 2] - u[n]);
}

/// Discrete u_x at every node: central in the interior, one-sided at walls.
Eigen::VectorXd discrete_gradient(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Discrete u_xx at interior nodes; wall entries are set to zero.
Eigen::VectorXd discrete_second_derivative(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u);

}  // namespace reaper
