#pragma once

#include <Eigen/Core>

#include <string>

namespace reaper {

enum class GridKind { Uniform, Graded };

/// Node layout on [-1, 1]. `nodes` holds intervals()+1 strictly increasing
/// points with nodes[0] = -1 and nodes[last] = +1.
struct Grid {
  Eigen::VectorXd nodes;
  GridKind kind = GridKind::Uniform;
  double grading = 1.0;

  Eigen::Index size() const { return nodes.size(); }
  Eigen::Index intervals() const { return nodes.size() - 1; }
  double operator[](Eigen::Index i) const { return nodes[i]; }
  double spacing(Eigen::Index i) const { return nodes[i + 1] - nodes[i]; }
  double min_spacing() const;
  double max_spacing() const;
  /// Index of the node at x = 0, or -1 when 0 is not a node.
  Eigen::Index center_index() const;
  std::string describe() const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.kind == b.kind && a.grading == b.grading && a.nodes == b.nodes;
  }
};

/// `intervals` equal cells; intervals >= 2.
Grid make_uniform_grid(Eigen::Index intervals);

/// x_j = sgn(s_j) (1 - (1 - |s_j|)^grading) for uniform s_j in [-1, 1].
/// `intervals` must be even so that 0 is a node and the set is symmetric.
Grid make_graded_grid(Eigen::Index intervals, double grading);

/// Linear interpolation of samples aligned with `grid` at abscissa x.
double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u, double x);

}  // namespace reaper
