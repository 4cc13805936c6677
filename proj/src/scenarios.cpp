#include "reaper/scenarios.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "reaper/closed_forms.hpp"
#include "reaper/errors.hpp"
#include "reaper/stencil.hpp"

namespace reaper {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kPi = std::numbers::pi;
constexpr double kCorrectionStart = 0.9;

double psi_scale() { return 4.0 / (kPi + 4.0); }

double odd_poly(const CrossingPerturbation& c, double x) {
  double p = x;
  for (double r : c.roots) p *= x * x - r * r;
  return p;
}

double odd_poly_slope(const CrossingPerturbation& c, double x) {
  // d/dx [x prod (x^2 - r^2)] = prod + x sum_j 2x prod_{i != j}
  double prod = 1.0;
  for (double r : c.roots) prod *= x * x - r * r;
  double sum = 0.0;
  for (std::size_t j = 0; j < c.roots.size(); ++j) {
    double others = 1.0;
    for (std::size_t i = 0; i < c.roots.size(); ++i)
      if (i != j) others *= x * x - c.roots[i] * c.roots[i];
    sum += 2.0 * x * x * others;
  }
  return prod + sum;
}

double wall_correction(double kappa, double x) {
  const double d = std::abs(x) - kCorrectionStart;
  if (d <= 0.0) return 0.0;
  return kappa * std::copysign(d * d * d, x);
}

double wall_correction_slope(double kappa, double x) {
  const double d = std::abs(x) - kCorrectionStart;
  if (d <= 0.0) return 0.0;
  return 3.0 * kappa * d * d;
}

}  // namespace

double Bump::value(double x) const {
  const double r = (x - center) / width;
  if (std::abs(r) >= 1.0) return 0.0;
  const double q = 1.0 - r * r;
  return amplitude * q * q * q;
}

double Bump::slope(double x) const {
  const double r = (x - center) / width;
  if (std::abs(r) >= 1.0) return 0.0;
  const double q = 1.0 - r * r;
  return amplitude * 3.0 * q * q * (-2.0 * r) / width;
}

double InitialData::value(double x) const {
  return std::visit(
      overloaded{
          [&](const SymmetricCosh& c) { return c.amplitude * std::cosh(c.k * x); },
          [&](const PsiProfile& p) {
            return p.delta * (std::numbers::sqrt2 / 2.0 - psi_scale() * std::cos(kPi * x / 4.0));
          },
          [&](const PerturbedCosh& p) {
            double v = p.amplitude * std::cosh(p.k * x) + p.tilt * x;
            for (const auto& b : p.bumps) v += b.value(x);
            return v;
          },
          [&](const CrossingPerturbation& c) {
            return c.amplitude * std::cosh(c.k * x) + c.epsilon * (odd_poly(c, x) + wall_correction(c.kappa, x));
          },
          [&](const TravelingWaveData& w) { return traveling_wave_profile(x, w.h) + w.offset; },
          [&](const ExplicitSamples&) -> double {
            throw ContractViolation("InitialData::value: explicit samples have no analytic form");
          },
      },
      kind);
}

double InitialData::slope(double x) const {
  return std::visit(
      overloaded{
          [&](const SymmetricCosh& c) { return c.amplitude * c.k * std::sinh(c.k * x); },
          [&](const PsiProfile& p) { return p.delta * psi_scale() * (kPi / 4.0) * std::sin(kPi * x / 4.0); },
          [&](const PerturbedCosh& p) {
            double v = p.amplitude * p.k * std::sinh(p.k * x) + p.tilt;
            for (const auto& b : p.bumps) v += b.slope(x);
            return v;
          },
          [&](const CrossingPerturbation& c) {
            return c.amplitude * c.k * std::sinh(c.k * x) +
                   c.epsilon * (odd_poly_slope(c, x) + wall_correction_slope(c.kappa, x));
          },
          [&](const TravelingWaveData& w) { return traveling_wave_slope(x, w.h); },
          [&](const ExplicitSamples&) -> double {
            throw ContractViolation("InitialData::slope: explicit samples have no analytic form");
          },
      },
      kind);
}

Eigen::VectorXd InitialData::sample(const Grid& grid) const {
  if (const auto* s = std::get_if<ExplicitSamples>(&kind)) {
    if (s->values.size() != grid.size()) throw ContractViolation("InitialData::sample: sample count != grid size");
    return s->values;
  }
  Eigen::VectorXd u(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) u[i] = value(grid[i]);
  return u;
}

std::string InitialData::tag() const {
  return std::visit(overloaded{
                        [](const SymmetricCosh&) { return std::string("symmetric_cosh"); },
                        [](const PsiProfile&) { return std::string("psi"); },
                        [](const PerturbedCosh&) { return std::string("perturbed_cosh"); },
                        [](const CrossingPerturbation&) { return std::string("crossing_perturbation"); },
                        [](const TravelingWaveData&) { return std::string("traveling_wave"); },
                        [](const ExplicitSamples&) { return std::string("explicit_samples"); },
                    },
                    kind);
}

nlohmann::json InitialData::to_json() const {
  nlohmann::json j;
  j["kind"] = tag();
  std::visit(overloaded{
                 [&](const SymmetricCosh& c) {
                   j["A"] = c.amplitude;
                   j["k"] = c.k;
                 },
                 [&](const PsiProfile& p) { j["delta"] = p.delta; },
                 [&](const PerturbedCosh& p) {
                   j["A"] = p.amplitude;
                   j["k"] = p.k;
                   j["tilt"] = p.tilt;
                   j["bumps"] = nlohmann::json::array();
                   for (const auto& b : p.bumps)
                     j["bumps"].push_back({{"amplitude", b.amplitude}, {"center", b.center}, {"width", b.width}});
                 },
                 [&](const CrossingPerturbation& c) {
                   j["A"] = c.amplitude;
                   j["k"] = c.k;
                   j["epsilon"] = c.epsilon;
                   j["roots"] = c.roots;
                   j["kappa"] = c.kappa;
                 },
                 [&](const TravelingWaveData& w) {
                   j["h"] = w.h;
                   j["offset"] = w.offset;
                 },
                 [&](const ExplicitSamples& s) {
                   j["count"] = s.values.size();
                   j["compat_tol"] = s.compat_tol;
                 },
             },
             kind);
  return j;
}

double solve_compatibility_k() {
  static const double k = [] {
    // k tanh k is increasing, so bisect until the bracket is adjacent doubles
    double lo = 0.5, hi = 2.0;
    for (;;) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (mid * std::tanh(mid) < 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }();
  return k;
}

InitialData symmetric_initial(double amplitude) {
  if (!(amplitude >= 1.0) || !std::isfinite(amplitude)) {
    throw ContractViolation("symmetric_initial: amplitude must be >= 1");
  }
  const double k = solve_compatibility_k();
  constexpr int samples = 4000;
  for (int i = 1; i < samples; ++i) {
    const double x = static_cast<double>(i) / samples;
    const double slope = amplitude * k * std::sinh(k * x);
    if (!(slope > 0.0 && slope < interior_grim_reaper_slope(x))) {
      throw EnvelopeViolation(
          fmt::format("symmetric_initial: A={} violates 0 < u0' < tan(pi x/2) at x={}", amplitude, x));
    }
  }
  return InitialData{SymmetricCosh{amplitude, k}};
}

InitialData psi_initial(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ContractViolation("psi_initial: delta must be positive");
  InitialData data{PsiProfile{delta}};
  constexpr int samples = 4000;
  const double curvature_scale = delta * psi_scale() * kPi * kPi / 16.0;
  for (int i = 1; i <= samples; ++i) {
    const double x = static_cast<double>(i) / samples;
    const double v = data.value(x);
    const double s = data.slope(x);
    const double curvature = curvature_scale * std::cos(kPi * x / 4.0);
    const bool slope_ok = s > 0.0 && (x >= 1.0 || s < interior_grim_reaper_slope(x));
    if (!(v > 0.0 && slope_ok && curvature > 0.0)) {
      throw EnvelopeViolation(fmt::format("psi_initial: delta={} fails the profile requirements at x={}", delta, x));
    }
  }
  if (std::abs(data.slope(1.0) - data.value(1.0)) > 1e-12 * (1.0 + delta)) {
    throw EnvelopeViolation("psi_initial: psi'(1) != psi(1)");
  }
  return data;
}

InitialData perturbed_initial(double amplitude, double bump_amplitude, double center, double width) {
  if (!(width > 0.0) || center - width <= -0.9 || center + width >= 0.9) {
    throw ContractViolation("perturbed_initial: bump support must lie inside (-0.9, 0.9)");
  }
  const auto base = symmetric_initial(amplitude);
  PerturbedCosh p;
  p.amplitude = amplitude;
  p.k = std::get<SymmetricCosh>(base.kind).k;
  if (bump_amplitude != 0.0) p.bumps.push_back(Bump{bump_amplitude, center, width});
  InitialData data{p};
  for (int i = 0; i <= 4000; ++i) {
    const double x = -1.0 + 2.0 * i / 4000.0;
    if (data.value(x) < 1.0) throw ContractViolation("perturbed_initial: data drops below 1");
  }
  return data;
}

InitialData traveling_wave_initial(double h, double offset) {
  return InitialData{TravelingWaveData{h, offset}};
}

double compatibility_defect(const InitialData& data, const BoundaryCondition& bc, const Grid& grid) {
  if (data.analytic()) {
    const double left = std::abs(data.slope(-1.0) - prescribed_slope_left(bc, data.value(-1.0)));
    const double right = std::abs(data.slope(1.0) - prescribed_slope_right(bc, data.value(1.0)));
    return std::max(left, right);
  }
  const Eigen::VectorXd u = data.sample(grid);
  const GridStencils s(grid);
  const double left = std::abs(outward_derivative_left(s, u) - left_wall_law(bc, u[0]).value);
  const double right =
      std::abs(outward_derivative_right(s, u) - right_wall_law(bc, u[u.size() - 1]).value);
  return std::max(left, right);
}

void validate_compatibility(const InitialData& data, const BoundaryCondition& bc, const Grid& grid) {
  const double tol = data.analytic() ? 1e-8 : std::get<ExplicitSamples>(data.kind).compat_tol;
  const double defect = compatibility_defect(data, bc, grid);
  if (!(defect <= tol)) {
    throw ContractViolation(fmt::format("initial data {} incompatible with {}: wall defect {:.3e} > {:.1e}",
                                        data.tag(), describe(bc), defect, tol));
  }
}

int dense_sign_changes(const InitialData& a, const InitialData& b, int samples) {
  int count = 0;
  int last = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = -1.0 + 2.0 * i / (samples - 1);
    const double d = b.value(x) - a.value(x);
    const int sign = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (last != 0 && sign != last) ++count;
    last = sign;
  }
  return count;
}

std::pair<InitialData, InitialData> crossing_pair(std::uint64_t seed, int crossings) {
  if (crossings < 1 || crossings > 9 || crossings % 2 == 0) {
    throw ContractViolation("crossing_pair: crossings must be odd and in [1, 9]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double k = solve_compatibility_k();
  const int pairs = (crossings - 1) / 2;

  for (int attempt = 0; attempt < 64; ++attempt) {
    CrossingPerturbation c;
    c.k = k;
    c.amplitude = 1.2 + 0.4 * unit(rng);
    c.epsilon = 0.05 + 0.1 * unit(rng);
    // roots spread over (0.15, 0.8) with jitter, kept apart
    for (int j = 0; j < pairs; ++j) {
      const double lo = 0.15 + 0.65 * j / pairs;
      const double hi = 0.15 + 0.65 * (j + 1) / pairs;
      c.roots.push_back(lo + (0.2 + 0.6 * unit(rng)) * (hi - lo));
    }
    // kappa fixes P'(1) + 3 kappa d^2 = P(1) + kappa d^3 with d = 0.1
    CrossingPerturbation probe = c;
    const double defect = odd_poly_slope(probe, 1.0) - odd_poly(probe, 1.0);
    const double d = 1.0 - kCorrectionStart;
    c.kappa = -defect / (3.0 * d * d - d * d * d);

    PerturbedCosh base;
    base.amplitude = c.amplitude;
    base.k = k;
    InitialData a{base};
    InitialData b{c};
    if (dense_sign_changes(a, b) == crossings && b.value(1.0) - a.value(1.0) != 0.0) return {a, b};
  }
  throw ContractViolation("crossing_pair: could not build a pair with the requested crossings");
}

std::pair<InitialData, InitialData> ordered_pair(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double k = solve_compatibility_k();

  PerturbedCosh lower;
  lower.amplitude = 1.15 + 0.35 * unit(rng);
  lower.k = k;
  lower.tilt = 0.1 * (unit(rng) - 0.5);
  const int nb = 1 + static_cast<int>(unit(rng) * 3.0);
  for (int i = 0; i < nb; ++i) {
    const double width = 0.1 + 0.2 * unit(rng);
    const double center = (0.85 - width) * (2.0 * unit(rng) - 1.0);
    lower.bumps.push_back(Bump{0.1 * (2.0 * unit(rng) - 1.0), center, width});
  }

  PerturbedCosh upper = lower;
  // half of the pairs touch at the walls initially
  upper.amplitude += unit(rng) < 0.5 ? 0.0 : 0.1 * unit(rng);
  const int extra = 1 + static_cast<int>(unit(rng) * 2.0);
  for (int i = 0; i < extra; ++i) {
    const double width = 0.1 + 0.2 * unit(rng);
    const double center = (0.85 - width) * (2.0 * unit(rng) - 1.0);
    upper.bumps.push_back(Bump{0.05 + 0.2 * unit(rng), center, width});
  }
  return {InitialData{lower}, InitialData{upper}};
}

}  // namespace reaper
