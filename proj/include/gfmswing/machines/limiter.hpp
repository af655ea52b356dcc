#pragma once

#include <cmath>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/phasor.hpp"

// Circular current limiter seen from the grid: the converter behaves as its
// voltage reference behind a virtual resistance r_e that is just large enough
// to hold the current magnitude at i_max.

namespace gfmswing {

namespace detail {
// |v_ref∠δ − v_grid_eq∠0|².
inline double voltage_difference_sq(double delta, double v_ref, double v_grid_eq) {
  return v_ref * v_ref - 2.0 * v_ref * v_grid_eq * std::cos(delta) + v_grid_eq * v_grid_eq;
}

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw ContractViolation(std::string(name) + " must be positive");
}
}  // namespace detail

// Current through the pure reactance x_l with no limiting.
inline Phasor unconstrained_current(double delta_psc, double v_ref, double v_grid_eq, double x_l) {
  detail::require_positive(x_l, "x_l");
  return (Phasor::polar(v_ref, delta_psc) - Phasor(v_grid_eq, 0.0)) / jx(x_l);
}

inline bool limiter_active(double delta_psc, double v_ref, double v_grid_eq, double x_l,
                           double i_max) {
  detail::require_positive(x_l, "x_l");
  detail::require_positive(i_max, "i_max");
  return detail::voltage_difference_sq(delta_psc, v_ref, v_grid_eq) / (i_max * i_max) > x_l * x_l;
}

// Virtual resistance; zero whenever the unconstrained current is within i_max.
inline double compute_re(double delta_psc, double v_ref, double v_grid_eq, double x_l, double i_max) {
  detail::require_positive(x_l, "x_l");
  detail::require_positive(i_max, "i_max");
  double disc = detail::voltage_difference_sq(delta_psc, v_ref, v_grid_eq) / (i_max * i_max) - x_l * x_l;
  return disc > 0.0 ? std::sqrt(disc) : 0.0;
}

// Current with the limiter engaged: (v_ref∠δ − v_grid_eq) / (r_e + j·x_l).
inline Phasor limited_current(double delta_psc, double v_ref, double v_grid_eq, double x_l, double r_e,
                              double i_max) {
  detail::require_positive(x_l, "x_l");
  if (r_e < 0.0) throw ContractViolation("limited_current: r_e must be non-negative");
  Phasor i = (Phasor::polar(v_ref, delta_psc) - Phasor(v_grid_eq, 0.0)) / Phasor(r_e, x_l);
  if (r_e == 0.0 && i.magnitude() > i_max * (1.0 + 1e-12))
    throw ContractViolation("limited_current: r_e = 0 while the current exceeds i_max");
  return i;
}

// Four-quadrant angle of the current in the converter dq frame.
inline double current_phase(double i_gd, double i_gq) {
  if (i_gd == 0.0 && i_gq == 0.0) throw InputError("current_phase: zero current vector");
  return Phasor(i_gd, i_gq).angle();
}

// Angle of the limiter impedance measured from the imaginary axis:
// sin(alpha) = r_e/|z|, cos(alpha) = x_l/|z|.
inline double alpha_angle(double r_e, double x_l) {
  detail::require_positive(x_l, "x_l");
  if (r_e < 0.0) throw ContractViolation("alpha_angle: r_e must be non-negative");
  return std::atan2(r_e, x_l);
}

// Active power delivered past the virtual resistance while limiting.
inline double gfm_power_limited(double delta_psc, double v_ref, double v_grid_eq, double x_l, double r_e,
                                double i_max) {
  detail::require_positive(x_l, "x_l");
  if (r_e < 0.0) throw ContractViolation("gfm_power_limited: r_e must be non-negative");
  double z2 = r_e * r_e + x_l * x_l;
  double source = (r_e * (v_ref * v_ref - v_ref * v_grid_eq * std::cos(delta_psc)) +
                   x_l * v_ref * v_grid_eq * std::sin(delta_psc)) /
                  z2;
  return source - i_max * i_max * r_e;
}

// Active power over a lossless reactance.
inline double gfm_power_normal(double delta_psc, double v_pcc, double v_g, double x_total) {
  detail::require_positive(x_total, "x_total");
  return v_pcc * v_g * std::sin(delta_psc) / x_total;
}

}  // namespace gfmswing
