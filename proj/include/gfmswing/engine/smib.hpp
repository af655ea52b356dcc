#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gfmswing/core/error.hpp"
#include "gfmswing/engine/trace.hpp"
#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/machines/limiter.hpp"
#include "gfmswing/machines/sg.hpp"
#include "gfmswing/network/stage.hpp"
#include "gfmswing/relay/logic.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

// Algebraic solution of the single-machine network for given machine states.
struct SmibPoint {
  Phasor source;
  double v_cmd = 0.0;
  double r_e = 0.0;
  ControlMode mode = ControlMode::VoltageControl;
  Phasor i;
  Phasor v_pcc;
  double p = 0.0;
  double q = 0.0;
  Phasor v_relay;
  Phasor i_relay;
};

// Single machine behind the staged Thevenin equivalent of a double-circuit
// line to an infinite bus. State layout: GFM {delta, p_filt, q_filt, v_cmd}
// where v_cmd is only a warm start for the non-inertial droop iteration;
// SG {delta, omega_dev}.
class SmibEngine {
 public:
  explicit SmibEngine(Scenario sc) : sc_(std::move(sc)) {
    sc_.validate();
    if (sc_.topology != Topology::Smib) throw ConfigError("SmibEngine requires the single-machine topology");
    net_ = sc_.network;
    eq_ = stage_equivalent(net_, Stage::PreFault, sc_.grid_voltage);
    gfm_ = sc_.machine.gfm;
    sg_ = sc_.machine.sg;
  }

  const StageEquivalent& stage() const { return eq_; }
  const SgParams& sg_params() const { return sg_; }
  const GfmParams& gfm_params() const { return gfm_; }

  // Series reactance between the machine EMF and the grid equivalent.
  double series_x() const {
    return sc_.machine.kind == MachineKind::Gfm ? eq_.x_l : sg_.x_internal + eq_.x_grid;
  }

  SmibPoint gfm_point(double delta, double v_cmd) const {
    SmibPoint pt;
    const double x_l = series_x();
    pt.v_cmd = v_cmd;
    pt.source = Phasor::polar(v_cmd, delta);
    pt.r_e = compute_re(delta, v_cmd, eq_.v_grid_eq, x_l, gfm_.i_max);
    pt.mode = pt.r_e > 0.0 ? ControlMode::CurrentLimit : ControlMode::VoltageControl;
    TwoNodeSolution s = solve_two_node(pt.source, eq_.v_grid_eq, x_l, pt.r_e);
    pt.i = s.i;
    pt.v_pcc = s.v_pcc;
    pt.p = s.p;
    pt.q = s.q;
    fill_relay(pt);
    return pt;
  }

  // Non-inertial converter: the droop voltage depends on the measured Q, so
  // the network and the droop are solved together.
  SmibPoint gfm_point_droop(double delta, double v_guess, double t) const {
    auto v = solve_droop_voltage([&](double vc) { return gfm_point(delta, vc).q; }, gfm_, v_guess);
    if (!v) throw SimulationFault(t, "Q-V droop equation has no solution");
    return gfm_point(delta, *v);
  }

  SmibPoint sg_point(double delta) const {
    SmibPoint pt;
    pt.v_cmd = sg_.e_mag;
    pt.source = Phasor::polar(sg_.e_mag, delta);
    pt.i = (pt.source - Phasor(eq_.v_grid_eq, 0.0)) / jx(series_x());
    pt.v_pcc = pt.source - jx(sg_.x_internal) * pt.i;
    Phasor s = pt.v_pcc * pt.i.conj();
    pt.p = s.re();
    pt.q = s.im();
    fill_relay(pt);
    return pt;
  }

  SmibPoint point(const std::vector<double>& x, double t) const {
    if (sc_.machine.kind == MachineKind::Sg) return sg_point(x[0]);
    if (gfm_.variant == GfmVariant::NonInertial) return gfm_point_droop(x[0], x[3], t);
    return gfm_point(x[0], rpc_voltage(x[2], gfm_));
  }

  std::vector<double> rates(const std::vector<double>& x, double t) const {
    const SmibPoint pt = point(x, t);
    if (sc_.machine.kind == MachineKind::Sg) {
      SgRates r = sg_rates({x[0], x[1]}, pt.p, sg_, sc_.base);
      return {r.d_delta, r.d_omega};
    }
    GfmState s{x[0], pt.v_cmd, x[1], x[2], pt.mode};
    GfmRates r = gfm_rates(s, pt.p, pt.q, gfm_, sc_.base);
    return {r.d_delta, r.d_p_filt, r.d_q_filt, 0.0};
  }

  // Pre-fault equilibrium state.
  std::vector<double> initial_state() {
    const StageEquivalent pre = stage_equivalent(net_, Stage::PreFault, sc_.grid_voltage);
    const double v_g = pre.v_grid_eq;
    if (sc_.machine.kind == MachineKind::Sg) {
      if (sg_.e_mag == 0.0) {
        // Terminal (PCC) voltage magnitude and power fixed by the load flow.
        const double sin_t = sg_.p_m * pre.x_grid / (sg_.v_terminal * v_g);
        if (!(std::abs(sin_t) < 1.0)) throw ConfigError("p_m: no pre-fault load-flow solution");
        const Phasor v_pcc = Phasor::polar(sg_.v_terminal, std::asin(sin_t));
        const Phasor i = (v_pcc - Phasor(v_g, 0.0)) / jx(pre.x_grid);
        const Phasor e = v_pcc + jx(sg_.x_internal) * i;
        sg_.e_mag = e.magnitude();
        return {e.angle(), 0.0};
      }
      const double sin_d = sg_.p_m * series_x() / (sg_.e_mag * v_g);
      if (!(std::abs(sin_d) < 1.0)) throw ConfigError("p_m: exceeds the pre-fault transfer limit");
      return {std::asin(sin_d), 0.0};
    }
    // Converter: delta from P = p_ref over the pre-fault reactance, v_cmd from
    // the droop equilibrium; iterate the pair to a fixed point.
    double v = gfm_.v_mref, delta = 0.0;
    bool converged = false;
    for (int it = 0; it < 500 && !converged; ++it) {
      const double sin_d = gfm_.p_ref * pre.x_l / (v * v_g);
      if (!(std::abs(sin_d) < 1.0)) throw ConfigError("p_ref: exceeds the pre-fault transfer limit");
      delta = std::asin(sin_d);
      const SmibPoint pt = gfm_point(delta, v);
      const double v_next = rpc_voltage(pt.q, gfm_);
      converged = std::abs(v_next - v) < 1e-15;
      v = v_next;
    }
    if (!converged) throw ConfigError("k_q: pre-fault droop equilibrium did not converge");
    const double sin_d = gfm_.p_ref * pre.x_l / (v * v_g);
    delta = std::asin(sin_d);
    const SmibPoint pt = gfm_point(delta, v);
    if (pt.mode == ControlMode::CurrentLimit)
      throw ConfigError("i_max: the pre-fault operating point is already current limited");
    return {delta, pt.p, pt.q, v};
  }

  TraceRecord record(double t, const std::vector<double>& x) const {
    const SmibPoint pt = point(x, t);
    TraceRecord r;
    r.t = t;
    r.v_pcc = pt.v_pcc;
    r.i_g = pt.i;
    r.p_e = pt.p;
    r.q_e = pt.q;
    r.delta_ctrl = x[0];
    r.delta_pcc = pt.v_pcc.magnitude() > 0.0 ? pt.v_pcc.angle() : 0.0;
    r.phi = pt.i.magnitude() > 0.0 ? wrap_angle(pt.i.angle() - x[0]) : 0.0;
    r.r_e = pt.r_e;
    r.v_cmd = pt.v_cmd;
    r.mode = pt.mode;
    r.stage = eq_.stage;
    r.v_relay = pt.v_relay;
    r.i_relay = pt.i_relay;
    if (auto z = measure_impedance(pt.v_relay, pt.i_relay, 1.0, sc_.relay.i_floor)) {
      r.z_pu = *z;
      r.z_ohm = *z * sc_.relay.z_base;
    }
    return r;
  }

  void apply(const SimEvent& e) {
    if (const auto* f = std::get_if<ApplyFault>(&e.kind)) {
      if (eq_.stage != Stage::PreFault) throw ConfigError("events: only one fault per single-machine run is supported");
      if (f->x_gnd) net_.x_gnd = *f->x_gnd;
      eq_ = stage_equivalent(net_, Stage::DuringFault, sc_.grid_voltage);
    } else if (const auto* c = std::get_if<ClearFault>(&e.kind)) {
      for (const auto& line : c->trip_lines)
        if (line != "L2") throw ConfigError("events: single-machine clearing can only trip line L2, got '" + line + "'");
      if (eq_.stage != Stage::DuringFault) throw ConfigError("events: clear_fault without an active fault");
      eq_ = stage_equivalent(net_, Stage::PostFault, sc_.grid_voltage);
    } else if (const auto* s = std::get_if<SetpointChange>(&e.kind)) {
      if (s->p_ref) {
        gfm_.p_ref = *s->p_ref;
        sg_.p_m = *s->p_ref;
      }
      if (s->q_ref) gfm_.q_ref = *s->q_ref;
    }
  }

  Trace run() {
    Trace tr;
    tr.machine = sc_.machine.kind;
    tr.topology = Topology::Smib;
    tr.dt = sc_.sim.dt;
    const double dt = sc_.sim.dt;
    const std::size_t n = step_count(sc_.sim.t_end, dt);
    tr.records.reserve(n + 1);
    std::vector<double> x = initial_state();
    tr.records.push_back(record(0.0, x));
    std::size_t next_event = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * dt;
      while (next_event < sc_.events.size() && event_due(sc_.events[next_event].t, t, dt))
        apply(sc_.events[next_event++]);
      x = rk4_step(x, dt, [&](const std::vector<double>& s) { return rates(s, t); });
      if (sc_.machine.kind == MachineKind::Gfm && gfm_.variant == GfmVariant::NonInertial)
        x[3] = point(x, t + dt).v_cmd;
      for (double v : x)
        if (!std::isfinite(v)) throw SimulationFault(t + dt, "state became non-finite");
      tr.records.push_back(record(static_cast<double>(k + 1) * dt, x));
    }
    return tr;
  }

 private:
  void fill_relay(SmibPoint& pt) const {
    // Relay bus sits between the machine-side series element and the lines;
    // the relay measures line 1 towards the grid.
    pt.v_relay = Phasor(eq_.v_grid_eq, 0.0) + jx(eq_.x_grid) * pt.i;
    pt.i_relay = (pt.v_relay - Phasor(sc_.grid_voltage, 0.0)) / jx(net_.x_g1);
  }

  Scenario sc_;
  NetworkParams net_;
  StageEquivalent eq_;
  GfmParams gfm_;
  SgParams sg_;
};

}  // namespace gfmswing
