#pragma once

// Exact translating solutions of u_t = u_xx / (1 + u_x^2) on the band [-1, 1].
//
// The Neumann family  phi(x; h) + c(h) t,  c(h) = arctan h,  has wall slopes +-h.
// The interior grim reaper  phi0(x) + (pi/2) t  spans (-1, 1) and is the
// long-time attractor of the flow with u_x(+-1, t) = +-u(+-1, t).

#include <cmath>
#include <numbers>

#include "reaper/errors.hpp"

namespace reaper {

namespace detail {

/// ln cos(y) written as log1p(cos y - 1) with cos y - 1 = -2 sin^2(y/2).
template <typename Scalar>
Scalar log_cos(Scalar y) {
  using std::log1p;
  using std::sin;
  const Scalar s = sin(y / Scalar(2));
  return log1p(Scalar(-2) * s * s);
}

template <typename Scalar>
void require_positive_slope(Scalar h, const char* what) {
  if (!(h > Scalar(0)) || !std::isfinite(static_cast<double>(h))) {
    throw DomainError(std::string(what) + ": boundary slope must be positive and finite");
  }
}

}  // namespace detail

template <typename Scalar = double>
Scalar grim_reaper_speed(Scalar h) {
  detail::require_positive_slope(h, "grim_reaper_speed");
  using std::atan;
  return atan(h);
}

/// phi(x; h) = -(1/c) ln cos(c x). Finite on |x| <= 1 because c < pi/2.
template <typename Scalar = double>
Scalar traveling_wave_profile(Scalar x, Scalar h) {
  const Scalar c = grim_reaper_speed(h);
  if (!(std::abs(x) <= Scalar(1))) {
    throw DomainError("traveling_wave_profile: |x| must be <= 1");
  }
  return -detail::log_cos(c * x) / c;
}

/// phi'(x; h) = tan(c x).
template <typename Scalar = double>
Scalar traveling_wave_slope(Scalar x, Scalar h) {
  const Scalar c = grim_reaper_speed(h);
  using std::tan;
  return tan(c * x);
}

/// phi(+-1; h) = ln(1 + h^2) / (2 arctan h).
template <typename Scalar = double>
Scalar traveling_wave_boundary_height(Scalar h) {
  const Scalar c = grim_reaper_speed(h);
  using std::log1p;
  return log1p(h * h) / (Scalar(2) * c);
}

template <typename Scalar = double>
Scalar interior_grim_reaper(Scalar x) {
  if (!(std::abs(x) < Scalar(1))) {
    throw DomainError("interior_grim_reaper: profile diverges for |x| >= 1");
  }
  constexpr Scalar half_pi = std::numbers::pi_v<Scalar> / Scalar(2);
  return -detail::log_cos(half_pi * x) / half_pi;
}

template <typename Scalar = double>
Scalar interior_grim_reaper_slope(Scalar x) {
  if (!(std::abs(x) < Scalar(1))) {
    throw DomainError("interior_grim_reaper_slope: slope diverges for |x| >= 1");
  }
  using std::tan;
  return tan(std::numbers::pi_v<Scalar> / Scalar(2) * x);
}

template <typename Scalar = double>
constexpr Scalar interior_grim_reaper_speed() {
  return std::numbers::pi_v<Scalar> / Scalar(2);
}

/// phi(x; h) + c(h) (t - t0) + offset, together with the barrier predicates
/// for the nonlinear Robin problem u_x(+-1) = +-u(+-1).
template <typename Scalar = double>
struct TravelingWave {
  Scalar h{1};
  Scalar c{std::numbers::pi_v<Scalar> / Scalar(4)};
  Scalar offset{0};
  Scalar t0{0};

  static TravelingWave make(Scalar slope, Scalar offset = Scalar(0), Scalar t0 = Scalar(0)) {
    return TravelingWave{slope, grim_reaper_speed(slope), offset, t0};
  }

  Scalar value(Scalar x, Scalar t) const {
    return traveling_wave_profile(x, h) + c * (t - t0) + offset;
  }
  Scalar slope(Scalar x) const { return traveling_wave_slope(x, h); }
  Scalar wall_height(Scalar t) const { return traveling_wave_boundary_height(h) + c * (t - t0) + offset; }

  /// Lower-solution wall inequality u_x(1) <= u(1) (and its mirror at -1).
  bool is_lower_solution_at(Scalar t) const { return h <= wall_height(t); }
  /// Upper-solution wall inequality u_x(1) >= u(1).
  bool is_upper_solution_at(Scalar t) const { return h >= wall_height(t); }

  /// Earliest t >= t0 from which the lower-solution predicate holds for good.
  Scalar lower_validity_from() const {
    const Scalar slack = h - traveling_wave_boundary_height(h) - offset;
    return slack <= Scalar(0) ? t0 : t0 + slack / c;
  }
};

/// phi(x; h0) + c(h0) t + offset.
template <typename Scalar = double>
TravelingWave<Scalar> make_lower_solution(Scalar h0, Scalar offset) {
  return TravelingWave<Scalar>::make(h0, offset);
}

/// The barrier phi(x; 1) + c(1) t + 1 - phi(1; 1), a lower solution for all
/// t >= 0 whenever u0 >= 1.
template <typename Scalar = double>
TravelingWave<Scalar> unit_lower_barrier() {
  return TravelingWave<Scalar>::make(Scalar(1), Scalar(1) - traveling_wave_boundary_height(Scalar(1)));
}

/// Smallest h (to 1e-9) with h > phi(1; h) + (pi/2) T + M0. The search doubles
/// from h = 1 until the inequality holds, then bisects between the last two
/// rungs. The returned value always satisfies the strict inequality.
template <typename Scalar = double>
Scalar select_upper_barrier_slope(Scalar m0, Scalar horizon) {
  if (!(horizon > Scalar(0))) {
    throw DomainError("select_upper_barrier_slope: horizon must be positive");
  }
  const Scalar rhs_const = interior_grim_reaper_speed<Scalar>() * horizon + m0;
  auto holds = [&](Scalar h) { return h > traveling_wave_boundary_height(h) + rhs_const; };

  Scalar lo = Scalar(0);
  Scalar hi = Scalar(1);
  while (!holds(hi)) {
    lo = hi;
    hi *= Scalar(2);
  }
  while (hi - lo > Scalar(1e-9)) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid > Scalar(0) && holds(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Constructive constants of the a priori estimates on [0, T]:
///   c(1) t - C1 <= u <= C2(T),  |u_x| <= C3(T).
/// These are the values the barrier construction yields, not sharp bounds.
template <typename Scalar = double>
struct AprioriConstants {
  Scalar c1{};
  Scalar c2{};
  Scalar c3{};
  Scalar h_upper{};
};

template <typename Scalar = double>
AprioriConstants<Scalar> a_priori_constants(Scalar m0, Scalar horizon, Scalar max_initial_slope) {
  AprioriConstants<Scalar> k;
  k.c1 = traveling_wave_boundary_height(Scalar(1)) - Scalar(1);
  k.h_upper = select_upper_barrier_slope(m0, horizon);
  k.c2 = traveling_wave_boundary_height(k.h_upper) + m0 + interior_grim_reaper_speed<Scalar>() * horizon;
  using std::abs;
  using std::max;
  k.c3 = max(max_initial_slope, abs(k.c1) + k.c2);
  return k;
}

}  // namespace reaper
