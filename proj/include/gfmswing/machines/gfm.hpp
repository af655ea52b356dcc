#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/per_unit.hpp"

namespace gfmswing {

enum class GfmVariant { NonInertial, Inertial };
enum class ControlMode { VoltageControl, CurrentLimit };

inline const char* to_string(GfmVariant v) {
  return v == GfmVariant::NonInertial ? "non-inertial" : "inertial";
}
inline const char* to_string(ControlMode m) {
  return m == ControlMode::VoltageControl ? "voltage" : "limited";
}

// Power-synchronization (P-f) and Q-V droop parameters of a grid-forming VSC.
struct GfmParams {
  double k_p = 0.01;
  double k_q = 0.05;
  double p_ref = 1.0;
  double q_ref = 0.0;
  double v_mref = 1.0;
  double i_max = 1.2;
  GfmVariant variant = GfmVariant::NonInertial;
  double omega_p = 31.4;  // active-power filter cutoff (rad/s), inertial only
  double omega_q = 31.4;  // reactive-power filter cutoff (rad/s), inertial only
  // Inner voltage-loop gain and limiter scale; documentation only, the
  // quasi-static limiter resistance does not depend on them.
  double k_pi = 1.0;
  double sigma = 1.0;
  // Multiply k_p by the nominal angular frequency, i.e. read k_p as a
  // per-unit frequency droop. Off means k_p is taken literally in rad/s per pu.
  bool scale_kp_by_omega0 = true;

  void validate() const {
    if (!(k_p > 0.0)) throw DomainError("k_p", "must be positive");
    if (!(k_q >= 0.0)) throw DomainError("k_q", "must be non-negative");
    if (!(i_max > 0.0)) throw DomainError("i_max", "must be positive");
    if (!(v_mref > 0.0)) throw DomainError("v_mref", "must be positive");
    if (!std::isfinite(p_ref)) throw DomainError("p_ref", "must be finite");
    if (!std::isfinite(q_ref)) throw DomainError("q_ref", "must be finite");
    if (variant == GfmVariant::Inertial) {
      if (!(omega_p > 0.0)) throw DomainError("omega_p", "must be positive for the inertial variant");
      if (!(omega_q > 0.0)) throw DomainError("omega_q", "must be positive for the inertial variant");
    }
  }

  // Angle rate per unit of active-power error (rad/s per pu).
  double angle_gain(const PerUnitBase& base) const {
    return scale_kp_by_omega0 ? base.omega0() * k_p : k_p;
  }

  friend bool operator==(const GfmParams&, const GfmParams&) = default;
};

struct GfmState {
  double delta_psc = 0.0;  // unwrapped control angle relative to the grid (rad)
  double v_cmd = 1.0;      // commanded d-axis voltage (pu)
  double p_filt = 0.0;
  double q_filt = 0.0;
  ControlMode mode = ControlMode::VoltageControl;

  friend bool operator==(const GfmState&, const GfmState&) = default;
};

// Time derivatives of (delta_psc, p_filt, q_filt). For the non-inertial
// variant the filter states are not used and their derivatives are zero.
struct GfmRates {
  double d_delta = 0.0;
  double d_p_filt = 0.0;
  double d_q_filt = 0.0;
};

inline GfmRates gfm_rates(const GfmState& s, double p_e, double q_e, const GfmParams& params,
                          const PerUnitBase& base) {
  GfmRates r;
  if (params.variant == GfmVariant::NonInertial) {
    r.d_delta = params.angle_gain(base) * (params.p_ref - p_e);
  } else {
    r.d_delta = params.angle_gain(base) * (params.p_ref - s.p_filt);
    r.d_p_filt = params.omega_p * (p_e - s.p_filt);
    r.d_q_filt = params.omega_q * (q_e - s.q_filt);
  }
  return r;
}

// Voltage command from the Q-V droop given the measured (non-inertial) or
// filtered (inertial) reactive power.
inline double rpc_voltage(double q, const GfmParams& params) {
  return params.v_mref + params.k_q * (params.q_ref - q);
}

// Solve v = v_mref + k_q*(q_ref - q(v)) for the non-inertial converter, where
// q(v) is the reactive power the network returns for command v. Fixed-point
// iteration first; near the limiter threshold q(v) has unbounded slope and
// the iteration may cycle, so fall back to bisection on a bracket around the
// warm start. Returns nothing if no root is found.
template <class QOfV>
std::optional<double> solve_droop_voltage(QOfV&& q_of_v, const GfmParams& params, double guess) {
  double v = guess;
  for (int it = 0; it < 60; ++it) {
    const double v_next = rpc_voltage(q_of_v(v), params);
    if (!(v_next > 0.0) || !std::isfinite(v_next)) break;
    if (std::abs(v_next - v) <= 1e-13 * std::max(1.0, v)) return v_next;
    v = v_next;
  }
  auto g = [&](double x) { return x - rpc_voltage(q_of_v(x), params); };
  const double v_min = 1e-6, v_max = 10.0 * std::max(1.0, params.v_mref);
  double a = std::max(v_min, guess - 1e-3), b = std::min(v_max, guess + 1e-3);
  double ga = g(a), gb = g(b);
  for (double h = 2e-3; !(ga <= 0.0 && gb >= 0.0); h *= 2.0) {
    if (a <= v_min && b >= v_max) return std::nullopt;
    if (ga > 0.0) {
      a = std::max(v_min, guess - h);
      ga = g(a);
    }
    if (gb < 0.0) {
      b = std::min(v_max, guess + h);
      gb = g(b);
    }
  }
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    (g(m) <= 0.0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

// One explicit step of the active-power loop. The control angle is never wrapped.
inline GfmState apc_step(GfmState s, double p_e, double dt, const GfmParams& params,
                         const PerUnitBase& base) {
  if (!(dt > 0.0)) throw ContractViolation("apc_step: dt must be positive");
  if (params.variant == GfmVariant::NonInertial) {
    s.delta_psc += params.angle_gain(base) * (params.p_ref - p_e) * dt;
  } else {
    s.p_filt += params.omega_p * (p_e - s.p_filt) * dt;
    s.delta_psc += params.angle_gain(base) * (params.p_ref - s.p_filt) * dt;
  }
  return s;
}

// One step of the reactive-power loop; algebraic for the non-inertial variant.
inline GfmState rpc_step(GfmState s, double q_e, double dt, const GfmParams& params) {
  if (!(dt > 0.0)) throw ContractViolation("rpc_step: dt must be positive");
  if (params.variant == GfmVariant::NonInertial) {
    s.v_cmd = rpc_voltage(q_e, params);
  } else {
    s.q_filt += params.omega_q * (q_e - s.q_filt) * dt;
    s.v_cmd = rpc_voltage(s.q_filt, params);
  }
  return s;
}

}  // namespace gfmswing
