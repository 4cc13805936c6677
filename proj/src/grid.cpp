#include "reaper/grid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "reaper/errors.hpp"

namespace reaper {

double Grid::min_spacing() const {
  double best = spacing(0);
  for (Eigen::Index i = 1; i < intervals(); ++i) best = std::min(best, spacing(i));
  return best;
}

double Grid::max_spacing() const {
  double best = spacing(0);
  for (Eigen::Index i = 1; i < intervals(); ++i) best = std::max(best, spacing(i));
  return best;
}

Eigen::Index Grid::center_index() const {
  const auto it = std::lower_bound(nodes.data(), nodes.data() + nodes.size(), 0.0);
  if (it != nodes.data() + nodes.size() && *it == 0.0) return it - nodes.data();
  return -1;
}

std::string Grid::describe() const {
  if (kind == GridKind::Uniform) return fmt::format("uniform(N={})", size());
  return fmt::format("graded(N={}, beta={})", size(), grading);
}

namespace {

// s_j = (2j - n)/n is exactly antisymmetric in j <-> n - j.
double reference_coordinate(Eigen::Index j, Eigen::Index n) {
  return static_cast<double>(2 * j - n) / static_cast<double>(n);
}

}  // namespace

Grid make_uniform_grid(Eigen::Index intervals) {
  if (intervals < 2) throw ContractViolation("make_uniform_grid: need at least 2 intervals");
  Grid g;
  g.kind = GridKind::Uniform;
  g.grading = 1.0;
  g.nodes.resize(intervals + 1);
  for (Eigen::Index j = 0; j <= intervals; ++j) g.nodes[j] = reference_coordinate(j, intervals);
  return g;
}

Grid make_graded_grid(Eigen::Index intervals, double grading) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw ContractViolation("make_graded_grid: interval count must be even and >= 2");
  }
  if (!(grading >= 1.0) || !std::isfinite(grading)) {
    throw ContractViolation("make_graded_grid: grading strength must be >= 1");
  }
  if (grading == 1.0) return make_uniform_grid(intervals);

  Grid g;
  g.kind = GridKind::Graded;
  g.grading = grading;
  g.nodes.resize(intervals + 1);
  for (Eigen::Index j = 0; j <= intervals; ++j) {
    const double s = reference_coordinate(j, intervals);
    const double mag = 1.0 - std::pow(1.0 - std::abs(s), grading);
    g.nodes[j] = s < 0 ? -mag : mag;
  }
  g.nodes[0] = -1.0;
  g.nodes[intervals] = 1.0;
  return g;
}

double interpolate(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& u, double x) {
  if (u.size() != grid.size()) throw ContractViolation("interpolate: samples not aligned with grid");
  if (x <= grid[0]) return u[0];
  if (x >= grid[grid.size() - 1]) return u[grid.size() - 1];
  const auto* begin = grid.nodes.data();
  const auto it = std::upper_bound(begin, begin + grid.size(), x);
  const Eigen::Index hi = it - begin;
  const Eigen::Index lo = hi - 1;
  if (grid[lo] == x) return u[lo];
  const double w = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - w) * u[lo] + w * u[hi];
}

}  // namespace reaper
