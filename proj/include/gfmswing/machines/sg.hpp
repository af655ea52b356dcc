#pragma once

#include <cmath>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/per_unit.hpp"

namespace gfmswing {

// Classical synchronous machine: constant EMF behind a transient reactance.
struct SgParams {
  double h = 3.5;
  double d = 2.0;
  double x_internal = 0.30;
  // EMF magnitude and mechanical power; when left at zero the engine derives
  // them from the pre-fault load flow (terminal |V| = v_terminal, P = p_m).
  double e_mag = 0.0;
  double p_m = 1.0;
  double v_terminal = 1.0;

  void validate() const {
    if (!(h > 0.0)) throw DomainError("h", "must be positive");
    if (!(d >= 0.0)) throw DomainError("d", "must be non-negative");
    if (!(x_internal > 0.0)) throw DomainError("x_internal", "must be positive");
    if (!(e_mag >= 0.0)) throw DomainError("e_mag", "must be non-negative");
    if (!(v_terminal > 0.0)) throw DomainError("v_terminal", "must be positive");
    if (!std::isfinite(p_m)) throw DomainError("p_m", "must be finite");
  }

  friend bool operator==(const SgParams&, const SgParams&) = default;
};

struct SgState {
  double delta_s = 0.0;    // rotor angle (rad, unwrapped)
  double omega_dev = 0.0;  // speed deviation (pu)

  friend bool operator==(const SgState&, const SgState&) = default;
};

struct SgRates {
  double d_delta = 0.0;
  double d_omega = 0.0;
};

inline SgRates sg_rates(const SgState& s, double p_e, const SgParams& params, const PerUnitBase& base) {
  return {base.omega0() * s.omega_dev, (params.p_m - p_e - params.d * s.omega_dev) / (2.0 * params.h)};
}

// One RK4 step of the swing equation with the electrical power held fixed.
inline SgState sg_swing_step(SgState s, double p_e, double dt, const SgParams& params,
                             const PerUnitBase& base) {
  if (!(dt > 0.0)) throw ContractViolation("sg_swing_step: dt must be positive");
  auto at = [&](const SgState& x, const SgRates& k, double h) {
    return SgState{x.delta_s + h * k.d_delta, x.omega_dev + h * k.d_omega};
  };
  SgRates k1 = sg_rates(s, p_e, params, base);
  SgRates k2 = sg_rates(at(s, k1, dt / 2), p_e, params, base);
  SgRates k3 = sg_rates(at(s, k2, dt / 2), p_e, params, base);
  SgRates k4 = sg_rates(at(s, k3, dt), p_e, params, base);
  s.delta_s += dt / 6.0 * (k1.d_delta + 2 * k2.d_delta + 2 * k3.d_delta + k4.d_delta);
  s.omega_dev += dt / 6.0 * (k1.d_omega + 2 * k2.d_omega + 2 * k3.d_omega + k4.d_omega);
  return s;
}

}  // namespace gfmswing
