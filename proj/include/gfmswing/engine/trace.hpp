#pragma once

#include <optional>
#include <vector>

#include "gfmswing/core/phasor.hpp"
#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/network/stage.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

// One sample of a run.
struct TraceRecord {
  double t = 0.0;
  Phasor v_pcc;        // machine terminal voltage
  Phasor i_g;          // machine output current
  double p_e = 0.0;    // active power at the terminal
  double q_e = 0.0;    // reactive power at the terminal
  double delta_ctrl = 0.0;  // unwrapped control angle (GFM) or rotor angle (SG), rad
  double delta_pcc = 0.0;   // terminal angle relative to the grid reference, wrapped, rad
  double phi = 0.0;         // current angle relative to the source angle, wrapped, rad
  double r_e = 0.0;         // limiter virtual resistance (pu)
  double v_cmd = 0.0;       // commanded (GFM) or internal (SG) voltage magnitude
  ControlMode mode = ControlMode::VoltageControl;
  Stage stage = Stage::PreFault;
  Phasor v_relay;           // relay voltage and current (pu)
  Phasor i_relay;
  std::optional<Phasor> z_pu;   // apparent impedance at the relay, when measurable
  std::optional<Phasor> z_ohm;
};

struct Trace {
  std::vector<TraceRecord> records;
  MachineKind machine = MachineKind::Gfm;
  Topology topology = Topology::Smib;
  double dt = 0.0;
};

// Classical RK4 over a flat state vector.
template <class F>
std::vector<double> rk4_step(const std::vector<double>& x, double dt, F&& rates) {
  const std::size_t n = x.size();
  auto axpy = [&](const std::vector<double>& k, double h) {
    std::vector<double> y(x);
    for (std::size_t i = 0; i < n; ++i) y[i] += h * k[i];
    return y;
  };
  const std::vector<double> k1 = rates(x);
  const std::vector<double> k2 = rates(axpy(k1, dt / 2.0));
  const std::vector<double> k3 = rates(axpy(k2, dt / 2.0));
  const std::vector<double> k4 = rates(axpy(k3, dt));
  std::vector<double> y(x);
  for (std::size_t i = 0; i < n; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return y;
}

// Number of fixed steps covering [0, t_end].
inline std::size_t step_count(double t_end, double dt) {
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

// Events fire at the first step time t_k with t_k >= t_event (to rounding).
inline bool event_due(double t_event, double t_k, double dt) { return t_k >= t_event - 1e-6 * dt; }

}  // namespace gfmswing
