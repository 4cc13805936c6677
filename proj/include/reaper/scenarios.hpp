#pragma once

// Initial data for the band problem. Every analytic kind satisfies the wall
// compatibility of its intended boundary condition exactly; the cosh family
// uses A cosh(k x) with k tanh k = 1 so that u0'(+-1) = +-u0(+-1).

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "reaper/boundary.hpp"
#include "reaper/grid.hpp"

namespace reaper {

/// amplitude (1 - r^2)^3 with r = (x - center)/width; C^2 with compact support.
struct Bump {
  double amplitude = 0.0;
  double center = 0.0;
  double width = 0.1;

  double value(double x) const;
  double slope(double x) const;

  bool operator==(const Bump&) const = default;
};

struct SymmetricCosh {
  double amplitude = 1.0;
  double k = 0.0;
};

/// delta [sqrt(2)/2 - 4/(pi+4) cos(pi x/4)]
struct PsiProfile {
  double delta = 1.0;
};

/// A cosh(k x) + sum of bumps + tilt * x. The tilt term is itself compatible
/// with u_x(+-1) = +-u(+-1), so any tilt keeps the data admissible.
struct PerturbedCosh {
  double amplitude = 1.0;
  double k = 0.0;
  std::vector<Bump> bumps;
  double tilt = 0.0;
};

/// A cosh(k x) + epsilon [x prod_j (x^2 - r_j^2) + kappa (|x| - 0.9)_+^3 sgn x].
/// The odd polynomial has exactly 1 + 2 * roots.size() simple zeros; kappa is
/// chosen so the wall compatibility holds.
struct CrossingPerturbation {
  double amplitude = 1.0;
  double k = 0.0;
  double epsilon = 0.1;
  std::vector<double> roots;
  double kappa = 0.0;
};

/// phi(x; h) + offset, the exact Neumann wave at t = 0.
struct TravelingWaveData {
  double h = 1.0;
  double offset = 0.0;
};

struct ExplicitSamples {
  Eigen::VectorXd values;
  /// Allowed residual of the discrete wall closure.
  double compat_tol = 1e-8;
};

using InitialDataKind =
    std::variant<SymmetricCosh, PsiProfile, PerturbedCosh, CrossingPerturbation, TravelingWaveData, ExplicitSamples>;

struct InitialData {
  InitialDataKind kind;

  bool analytic() const { return !std::holds_alternative<ExplicitSamples>(kind); }
  double value(double x) const;
  double slope(double x) const;
  Eigen::VectorXd sample(const Grid& grid) const;
  std::string tag() const;
  nlohmann::json to_json() const;
};

/// Unique positive root of k tanh k = 1 (bisection on [0.5, 2] to 1e-12).
double solve_compatibility_k();

/// A cosh(k x). Rejects A < 1 and, with EnvelopeViolation, any A for which
/// A k sinh(k x) >= tan(pi x / 2) somewhere on (0, 1).
InitialData symmetric_initial(double amplitude);

InitialData psi_initial(double delta);

/// symmetric_initial(A) plus one bump. The bump support must sit inside
/// (-0.9, 0.9) and the data must stay >= 1.
InitialData perturbed_initial(double amplitude, double bump_amplitude, double center, double width);

InitialData traveling_wave_initial(double h, double offset = 0.0);

/// Largest |u0'(+-1) - g(u0(+-1))| for analytic data, or the largest discrete
/// closure residual for sampled data.
double compatibility_defect(const InitialData& data, const BoundaryCondition& bc, const Grid& grid);

/// Throws ContractViolation when the defect exceeds 1e-8 (analytic) or the
/// sample tolerance (explicit).
void validate_compatibility(const InitialData& data, const BoundaryCondition& bc, const Grid& grid);

/// Two nonlinear-Robin-compatible initial data whose difference changes sign
/// exactly `crossings` times (odd, 1..9) and never vanishes at the walls.
std::pair<InitialData, InitialData> crossing_pair(std::uint64_t seed, int crossings);

/// Two nonlinear-Robin-compatible initial data with first <= second nodewise.
std::pair<InitialData, InitialData> ordered_pair(std::uint64_t seed);

/// Dense-sample count of sign changes of b - a on [-1, 1].
int dense_sign_changes(const InitialData& a, const InitialData& b, int samples = 20001);

}  // namespace reaper
