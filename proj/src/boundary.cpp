#include "reaper/boundary.hpp"

#include <fmt/format.h>

namespace reaper {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double prescribed_slope_left(const BoundaryCondition& bc, double u_wall) {
  return std::visit(overloaded{
                        [&](const NonlinearRobin&) { return -u_wall; },
                        [&](const ConstantNeumann& n) { return -n.h; },
                        [&](const AffineRobin& r) { return r.alpha_minus * u_wall + r.beta_minus; },
                    },
                    bc);
}

double prescribed_slope_right(const BoundaryCondition& bc, double u_wall) {
  return std::visit(overloaded{
                        [&](const NonlinearRobin&) { return u_wall; },
                        [&](const ConstantNeumann& n) { return n.h; },
                        [&](const AffineRobin& r) { return r.alpha_plus * u_wall + r.beta_plus; },
                    },
                    bc);
}

WallLaw left_wall_law(const BoundaryCondition& bc, double u_wall) {
  // outward derivative is -u_x(-1)
  return std::visit(overloaded{
                        [&](const NonlinearRobin&) { return WallLaw{u_wall, 1.0}; },
                        [&](const ConstantNeumann& n) { return WallLaw{n.h, 0.0}; },
                        [&](const AffineRobin& r) {
                          return WallLaw{-(r.alpha_minus * u_wall + r.beta_minus), -r.alpha_minus};
                        },
                    },
                    bc);
}

WallLaw right_wall_law(const BoundaryCondition& bc, double u_wall) {
  return std::visit(overloaded{
                        [&](const NonlinearRobin&) { return WallLaw{u_wall, 1.0}; },
                        [&](const ConstantNeumann& n) { return WallLaw{n.h, 0.0}; },
                        [&](const AffineRobin& r) {
                          return WallLaw{r.alpha_plus * u_wall + r.beta_plus, r.alpha_plus};
                        },
                    },
                    bc);
}

std::string describe(const BoundaryCondition& bc) {
  return std::visit(overloaded{
                        [](const NonlinearRobin&) { return std::string("nonlinear_robin"); },
                        [](const ConstantNeumann& n) { return fmt::format("neumann(h={})", n.h); },
                        [](const AffineRobin& r) {
                          return fmt::format("affine_robin(alpha-={}, alpha+={}, beta-={}, beta+={})",
                                             r.alpha_minus, r.alpha_plus, r.beta_minus, r.beta_plus);
                        },
                    },
                    bc);
}

bool outside_convergence_theory(const BoundaryCondition& bc) {
  const auto* r = std::get_if<AffineRobin>(&bc);
  return r != nullptr && r->alpha_minus < 0.0 && 0.0 < r->alpha_plus;
}

}  // namespace reaper
