#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "gfmswing/core/network_params.hpp"
#include "gfmswing/core/phasor.hpp"
#include "gfmswing/engine/trace.hpp"
#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/machines/limiter.hpp"
#include "gfmswing/network/stage.hpp"

namespace gfmswing {

struct CurvePoint {
  double delta = 0.0;  // rad
  double p = 0.0;
  double p_normal = 0.0;  // lossless curve without limiting
  double r_e = 0.0;
};

struct StageCurve {
  StageEquivalent eq;
  std::vector<CurvePoint> points;
};

// Power-angle curves per stage at the fixed voltage reference v_mref: the
// lossless curve where the limiter is inactive, the limited curve (with the
// angle-dependent r_e) where it is active.
inline std::vector<StageCurve> power_angle_curves(const GfmParams& params, const NetworkParams& net, double v_g,
                                                  const std::vector<Stage>& stages, const std::vector<double>& grid) {
  std::vector<StageCurve> out;
  for (Stage s : stages) {
    StageCurve c;
    c.eq = stage_equivalent(net, s, v_g);
    for (double d : grid) {
      if (d < 0.0 || d > 2.0 * std::numbers::pi + 1e-12) throw InputError("power_angle_curves: grid must lie in [0, 360] deg");
      CurvePoint pt;
      pt.delta = d;
      pt.r_e = compute_re(d, params.v_mref, c.eq.v_grid_eq, c.eq.x_l, params.i_max);
      pt.p_normal = gfm_power_normal(d, params.v_mref, c.eq.v_grid_eq, c.eq.x_l);
      pt.p = pt.r_e > 0.0 ? gfm_power_limited(d, params.v_mref, c.eq.v_grid_eq, c.eq.x_l, pt.r_e, params.i_max)
                          : pt.p_normal;
      c.points.push_back(pt);
    }
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<double> degree_grid(double from_deg, double to_deg, std::size_t n) {
  std::vector<double> g;
  for (std::size_t k = 0; k < n; ++k)
    g.push_back(rad(from_deg + (to_deg - from_deg) * static_cast<double>(k) / static_cast<double>(n - 1)));
  return g;
}

// Largest |angle(I) - (delta/2 + alpha)| (mod 2*pi) over the grid points where
// the limiter is active, with the converter voltage equal to the grid voltage.
// Returns nothing when no grid point activates the limiter.
inline std::optional<double> identity_check(double x_l, double v_g, double i_max, const std::vector<double>& grid) {
  std::optional<double> worst;
  for (double d : grid) {
    if (!limiter_active(d, v_g, v_g, x_l, i_max)) continue;
    const double r_e = compute_re(d, v_g, v_g, x_l, i_max);
    const Phasor i = limited_current(d, v_g, v_g, x_l, r_e, i_max);
    const double err = std::abs(wrap_angle(i.angle() - (d / 2.0 + alpha_angle(r_e, x_l))));
    worst = std::max(worst.value_or(0.0), err);
  }
  return worst;
}

// Limiter-active angles of the post-fault network: n points evenly spaced
// strictly inside the active interval (delta_on, 2*pi - delta_on).
inline std::vector<double> limiter_active_grid(double x_l, double v_g, double i_max, std::size_t n) {
  const double s = x_l * i_max / (2.0 * v_g);
  if (s >= 1.0) return {};
  const double on = 2.0 * std::asin(s);
  std::vector<double> g;
  const double span = 2.0 * std::numbers::pi - 2.0 * on;
  for (std::size_t k = 0; k < n; ++k) g.push_back(on + span * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
  return g;
}

// Largest deviation of post-fault limited-mode impedance samples from the
// circle centred at x_g1∠theta_g1 with radius v_g / i_max (pu). Nothing when
// the trace has no such samples.
inline std::optional<double> circle_check(const Trace& tr, double x_g1, double theta_g1, double v_g, double i_max) {
  const Phasor centre = Phasor::polar(x_g1, theta_g1);
  const double radius = v_g / i_max;
  std::optional<double> worst;
  for (const auto& r : tr.records) {
    if (r.stage != Stage::PostFault || r.mode != ControlMode::CurrentLimit || !r.z_pu) continue;
    const double dev = std::abs((*r.z_pu - centre).magnitude() - radius);
    worst = std::max(worst.value_or(0.0), dev);
  }
  return worst;
}

}  // namespace gfmswing
