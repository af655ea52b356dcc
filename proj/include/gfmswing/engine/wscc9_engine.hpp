#pragma once

#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gfmswing/core/error.hpp"
#include "gfmswing/engine/trace.hpp"
#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/machines/sg.hpp"
#include "gfmswing/network/nodal.hpp"
#include "gfmswing/network/wscc9.hpp"
#include "gfmswing/relay/logic.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

// Nine-bus system with classical generators at buses 1 and 3 and the studied
// machine (converter or classical generator) at bus 2. Loads are constant
// impedances fixed at the load-flow voltages.
//
// State layout: for each classical generator {delta, omega_dev}; then, when the
// studied machine is a converter, {delta_psc, p_filt, q_filt, v_cmd} with v_cmd
// only used as the warm start of the droop iteration.
class Wscc9Engine {
 public:
  explicit Wscc9Engine(Scenario sc) : sc_(std::move(sc)) {
    sc_.validate();
    if (sc_.topology != Topology::Wscc9) throw ConfigError("Wscc9Engine requires the wscc9 topology");
    gfm_mode_ = sc_.machine.kind == MachineKind::Gfm;
    const double p2 = gfm_mode_ ? sc_.machine.gfm.p_ref : sc_.machine.sg.p_m;
    case_ = wscc9_case(p2, sc_.wscc9.q_bus2);
    gfm_ = sc_.machine.gfm;
    x_c_ = sc_.network.x_s;
    initialize();
  }

  const Wscc9Case& system() const { return case_; }
  const MultiMachineNetwork& network() const { return net_; }
  const std::vector<double>& initial_state() const { return x0_; }

  struct Point {
    std::vector<cd> v;          // bus voltages
    std::vector<cd> i_sg;       // classical generator currents
    std::vector<double> p_sg;   // classical generator electrical power
    cd e_gfm, i_gfm;
    double v_cmd = 0.0, r_e = 0.0;
    ControlMode mode = ControlMode::VoltageControl;
    double p_gfm = 0.0, q_gfm = 0.0;
  };

  Point point(const std::vector<double>& x, double t) const {
    Point pt;
    std::vector<NodalSource> src = sources(x);
    const std::vector<cd> v_oc = solver_->solve(src);
    if (!gfm_mode_) {
      pt.v = v_oc;
    } else {
      const std::size_t off = 2 * sgs_.size();
      const double delta = x[off];
      const cd v_th = v_oc[gfm_bus_];
      auto solve_at = [&](double v_cmd) {
        Point p;
        p.v_cmd = v_cmd;
        p.e_gfm = std::polar(v_cmd, delta);
        const cd de = p.e_gfm - v_th;
        const cd z_src = z_th_ + cd(0.0, x_c_);
        const double i_unc = std::abs(de) / std::abs(z_src);
        if (i_unc > gfm_.i_max) {
          p.r_e = std::sqrt(std::norm(de) / (gfm_.i_max * gfm_.i_max) - z_src.imag() * z_src.imag()) - z_src.real();
          p.r_e = std::max(p.r_e, 0.0);
        }
        p.mode = p.r_e > 0.0 ? ControlMode::CurrentLimit : ControlMode::VoltageControl;
        p.i_gfm = de / (p.r_e + z_src);
        const cd v2 = p.e_gfm - p.r_e * p.i_gfm;
        const cd s = v2 * std::conj(p.i_gfm);
        p.p_gfm = s.real();
        p.q_gfm = s.imag();
        return p;
      };
      Point p;
      if (gfm_.variant == GfmVariant::Inertial) {
        p = solve_at(rpc_voltage(x[off + 2], gfm_));
      } else {
        auto v = solve_droop_voltage([&](double vc) { return solve_at(vc).q_gfm; }, gfm_, x[off + 3]);
        if (!v) throw SimulationFault(t, "Q-V droop equation has no solution");
        p = solve_at(*v);
      }
      pt = p;
      pt.v = v_oc;
      for (std::size_t k = 0; k < pt.v.size(); ++k) pt.v[k] += pt.i_gfm * z_col_[k];
    }
    for (std::size_t g = 0; g < sgs_.size(); ++g) {
      const cd e = std::polar(sgs_[g].e_mag, x[2 * g]);
      const cd i = (e - pt.v[sgs_[g].bus]) / cd(0.0, sgs_[g].x);
      pt.i_sg.push_back(i);
      pt.p_sg.push_back((e * std::conj(i)).real());
    }
    return pt;
  }

  std::vector<double> rates(const std::vector<double>& x, double t) const {
    const Point pt = point(x, t);
    std::vector<double> r(x.size(), 0.0);
    for (std::size_t g = 0; g < sgs_.size(); ++g) {
      SgParams p;
      p.h = sgs_[g].h;
      p.d = sgs_[g].d;
      p.p_m = sgs_[g].p_m;
      SgRates k = sg_rates({x[2 * g], x[2 * g + 1]}, pt.p_sg[g], p, sc_.base);
      r[2 * g] = k.d_delta;
      r[2 * g + 1] = k.d_omega;
    }
    if (gfm_mode_) {
      const std::size_t off = 2 * sgs_.size();
      GfmState s{x[off], pt.v_cmd, x[off + 1], x[off + 2], pt.mode};
      GfmRates k = gfm_rates(s, pt.p_gfm, pt.q_gfm, gfm_, sc_.base);
      r[off] = k.d_delta;
      r[off + 1] = k.d_p_filt;
      r[off + 2] = k.d_q_filt;
    }
    return r;
  }

  TraceRecord record(double t, const std::vector<double>& x) const {
    const Point pt = point(x, t);
    TraceRecord r;
    r.t = t;
    const cd v1 = pt.v[0], v2 = pt.v[1];
    double angle_ref = x[0];  // rotor angle of G1
    if (gfm_mode_) {
      const std::size_t off = 2 * sgs_.size();
      r.v_pcc = Phasor(pt.e_gfm - pt.r_e * pt.i_gfm);
      r.i_g = Phasor(pt.i_gfm);
      r.p_e = pt.p_gfm;
      r.q_e = pt.q_gfm;
      r.delta_ctrl = x[off] - angle_ref;
      r.phi = std::abs(pt.i_gfm) > 0.0 ? wrap_angle(std::arg(pt.i_gfm) - x[off]) : 0.0;
      r.r_e = pt.r_e;
      r.v_cmd = pt.v_cmd;
      r.mode = pt.mode;
    } else {
      const std::size_t g2 = studied_sg_;
      r.v_pcc = Phasor(v2);
      r.i_g = Phasor(pt.i_sg[g2]);
      const cd s = v2 * std::conj(pt.i_sg[g2]);
      r.p_e = s.real();
      r.q_e = s.imag();
      r.delta_ctrl = x[2 * g2] - angle_ref;
      r.phi = std::abs(pt.i_sg[g2]) > 0.0 ? wrap_angle(std::arg(pt.i_sg[g2]) - x[2 * g2]) : 0.0;
      r.v_cmd = sgs_[g2].e_mag;
    }
    r.delta_pcc = wrap_angle(std::arg(v2) - std::arg(v1));
    r.stage = stage_;
    const Branch& br = net_.branches[net_.relay->branch];
    const std::size_t far = br.from == net_.relay->bus ? br.to : br.from;
    const cd vr = pt.v[net_.relay->bus];
    const cd ir = br.in_service ? (vr - pt.v[far]) / cd(0.0, br.x) : cd(0.0, 0.0);
    r.v_relay = Phasor(vr);
    r.i_relay = Phasor(ir);
    if (auto z = measure_impedance(r.v_relay, r.i_relay, 1.0, sc_.relay.i_floor)) {
      r.z_pu = *z;
      r.z_ohm = *z * sc_.relay.z_base;
    }
    return r;
  }

  // Sum of machine output power minus load consumption (lossless branches).
  double power_mismatch(const Point& pt) const {
    double gen = 0.0;
    for (std::size_t g = 0; g < sgs_.size(); ++g) gen += (pt.v[sgs_[g].bus] * std::conj(pt.i_sg[g])).real();
    if (gfm_mode_) gen += pt.p_gfm;
    double load = 0.0;
    for (const auto& s : net_.shunts) load += std::norm(pt.v[s.bus]) * s.y.real();
    return gen - load;
  }

  void apply(const SimEvent& e) {
    if (const auto* f = std::get_if<ApplyFault>(&e.kind)) {
      const std::size_t bus = net_.bus_index(f->bus.value_or("7"));
      const double x = f->x_gnd.value_or(sc_.network.x_gnd);
      net_.shunts.push_back({bus, 1.0 / cd(0.0, x)});
      fault_shunt_ = net_.shunts.size() - 1;
      stage_ = Stage::DuringFault;
    } else if (const auto* c = std::get_if<ClearFault>(&e.kind)) {
      if (fault_shunt_) {
        net_.shunts.erase(net_.shunts.begin() + static_cast<std::ptrdiff_t>(*fault_shunt_));
        fault_shunt_.reset();
      }
      for (const auto& name : c->trip_lines) net_.branches[net_.branch_index(name)].in_service = false;
      stage_ = Stage::PostFault;
    } else if (const auto* s = std::get_if<SetpointChange>(&e.kind)) {
      if (s->p_ref) {
        if (gfm_mode_)
          gfm_.p_ref = *s->p_ref;
        else
          sgs_[studied_sg_].p_m = *s->p_ref;
      }
      if (s->q_ref) gfm_.q_ref = *s->q_ref;
    }
    refactor();
  }

  Trace run() {
    Trace tr;
    tr.machine = sc_.machine.kind;
    tr.topology = Topology::Wscc9;
    tr.dt = sc_.sim.dt;
    const double dt = sc_.sim.dt;
    const std::size_t n = step_count(sc_.sim.t_end, dt);
    tr.records.reserve(n + 1);
    std::vector<double> x = x0_;
    tr.records.push_back(record(0.0, x));
    std::size_t next_event = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) * dt;
      while (next_event < sc_.events.size() && event_due(sc_.events[next_event].t, t, dt))
        apply(sc_.events[next_event++]);
      x = rk4_step(x, dt, [&](const std::vector<double>& s) { return rates(s, t); });
      if (gfm_mode_ && gfm_.variant == GfmVariant::NonInertial) x[2 * sgs_.size() + 3] = point(x, t + dt).v_cmd;
      for (double v : x)
        if (!std::isfinite(v)) throw SimulationFault(t + dt, "state became non-finite");
      tr.records.push_back(record(static_cast<double>(k + 1) * dt, x));
    }
    return tr;
  }

 private:
  struct ClassicalMachine {
    std::string id;
    std::size_t bus;
    double h, d, x, e_mag, p_m;
  };

  std::vector<NodalSource> sources(const std::vector<double>& x) const {
    std::vector<NodalSource> src;
    for (std::size_t g = 0; g < sgs_.size(); ++g)
      src.push_back({sgs_[g].bus, std::polar(sgs_[g].e_mag, x[2 * g]), cd(0.0, sgs_[g].x)});
    return src;
  }

  void refactor() {
    std::vector<NodalSource> src;
    for (const auto& g : sgs_) src.push_back({g.bus, cd(0.0, 0.0), cd(0.0, g.x)});
    solver_ = std::make_unique<NodalSolver>(net_, src);
    if (gfm_mode_) {
      // Transfer impedances from the converter bus: response of every bus to
      // a unit current injected there.
      std::vector<cd> unit(net_.buses.size(), cd(0.0, 0.0));
      unit[gfm_bus_] = 1.0;
      std::vector<NodalSource> quiet = src;
      z_col_ = solver_->solve(quiet, unit);
      z_th_ = z_col_[gfm_bus_];
    }
  }

  void initialize() {
    net_ = case_.net;
    const LoadFlowResult lf = newton_load_flow(net_, case_.load_flow);
    // Constant-impedance loads at the load-flow voltages.
    for (std::size_t b = 0; b < net_.buses.size(); ++b) {
      const auto& spec = case_.load_flow[b];
      if (spec.p_load != 0.0 || spec.q_load != 0.0)
        net_.shunts.push_back({b, cd(spec.p_load, -spec.q_load) / std::norm(lf.v[b])});
    }
    gfm_bus_ = 1;
    for (const auto& g : case_.generators) {
      const cd v = lf.v[g.bus];
      const cd s = lf.s_gen[g.bus];
      const cd i = std::conj(s / v);
      if (g.id == "G2" && gfm_mode_) {
        // The converter sits behind its coupling reactance; its references
        // are chosen so that the load-flow point is an equilibrium of the
        // droop loops.
        const cd e = v + cd(0.0, x_c_) * i;
        const cd s_term = e * std::conj(i);
        gfm_.v_mref = std::abs(e);
        gfm_.q_ref = s_term.imag();
        gfm_.p_ref = s_term.real();
        if (std::abs(i) >= gfm_.i_max) throw ConfigError("i_max: pre-fault converter current exceeds the limit");
        gfm_x0_ = {std::arg(e), s_term.real(), s_term.imag(), std::abs(e)};
        continue;
      }
      ClassicalMachine m;
      m.id = g.id;
      m.bus = g.bus;
      m.h = g.h;
      m.x = g.x_d_prime;
      m.d = sc_.wscc9.sg_damping;
      if (g.id == "G2") {
        m.h = sc_.machine.sg.h;
        m.x = sc_.machine.sg.x_internal;
        m.d = sc_.machine.sg.d;
        studied_sg_ = sgs_.size();
      }
      const cd e = v + cd(0.0, m.x) * i;
      m.e_mag = std::abs(e);
      m.p_m = (e * std::conj(i)).real();
      sgs_.push_back(m);
      x0_.push_back(std::arg(e));
      x0_.push_back(0.0);
    }
    for (double v : gfm_x0_) x0_.push_back(v);
    refactor();
  }

  Scenario sc_;
  Wscc9Case case_;
  MultiMachineNetwork net_;
  GfmParams gfm_;
  bool gfm_mode_ = true;
  std::vector<ClassicalMachine> sgs_;
  std::size_t studied_sg_ = 0;
  std::size_t gfm_bus_ = 1;
  std::vector<double> gfm_x0_;
  std::vector<double> x0_;
  std::unique_ptr<NodalSolver> solver_;
  std::vector<cd> z_col_;
  cd z_th_;
  double x_c_ = 0.0;  // converter coupling reactance between its source and bus 2
  std::optional<std::size_t> fault_shunt_;
  Stage stage_ = Stage::PreFault;
};

}  // namespace gfmswing
