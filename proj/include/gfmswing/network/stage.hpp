#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/network_params.hpp"
#include "gfmswing/core/phasor.hpp"

namespace gfmswing {

enum class Stage { PreFault, DuringFault, PostFault };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::PreFault: return "pre-fault";
    case Stage::DuringFault: return "during-fault";
    case Stage::PostFault: return "post-fault";
  }
  return "?";
}

// Thevenin equivalent of the grid seen from the converter terminal for one
// stage: the converter sees v_grid_eq∠0 behind x_l = x_s + x_grid.
struct StageEquivalent {
  double x_l = 0.0;
  double v_grid_eq = 0.0;
  Stage stage = Stage::PreFault;
  double x_grid = 0.0;  // grid-side part of x_l, seen from the relay bus
};

namespace detail {
// Thevenin of two parallel lines to the grid with line 2 shorted to ground
// through x_gnd at fraction a from the relay bus. Returns {x_th, v_th / v_g}.
inline std::pair<double, double> faulted_thevenin(const NetworkParams& n) {
  const double a = n.fault_location;
  if (a == 0.0) {
    double x_fault = parallel_reactance({n.x_g1, n.x_g2, n.x_gnd});
    return {x_fault, x_fault / parallel_reactance({n.x_g1, n.x_g2})};
  }
  // Two unknown nodes (relay bus p, fault point f); all branches reactive, so
  // the susceptance system is real.
  const double b_pf = 1.0 / (a * n.x_g2);
  const double b_fg = 1.0 / ((1.0 - a) * n.x_g2);
  const double b11 = 1.0 / n.x_g1 + b_pf;
  const double b22 = b_pf + b_fg + 1.0 / n.x_gnd;
  const double det = b11 * b22 - b_pf * b_pf;
  const double r1 = 1.0 / n.x_g1;
  const double r2 = b_fg;
  return {b22 / det, (r1 * b22 + b_pf * r2) / det};
}
}  // namespace detail

inline StageEquivalent stage_equivalent(const NetworkParams& net, Stage stage, double v_g) {
  net.validate();
  if (!(v_g >= 0.0)) throw DomainError("grid_voltage", "must be non-negative");
  StageEquivalent eq;
  eq.stage = stage;
  switch (stage) {
    case Stage::PreFault:
      eq.x_grid = parallel_reactance({net.x_g1, net.x_g2});
      eq.v_grid_eq = v_g;
      break;
    case Stage::DuringFault: {
      auto [x_th, ratio] = detail::faulted_thevenin(net);
      eq.x_grid = x_th;
      eq.v_grid_eq = net.use_literal_vge_divider
                         ? v_g * net.x_gnd / parallel_reactance({net.x_g1, net.x_g2, net.x_gnd})
                         : v_g * ratio;
      break;
    }
    case Stage::PostFault:
      eq.x_grid = net.x_g1;
      eq.v_grid_eq = v_g;
      break;
  }
  eq.x_l = net.x_s + eq.x_grid;
  return eq;
}

// Timeline events.
struct ApplyFault {
  std::optional<double> x_gnd;  // overrides the network's fault reactance
  std::optional<std::string> bus;  // multi-machine: faulted bus name
  friend bool operator==(const ApplyFault&, const ApplyFault&) = default;
};
struct ClearFault {
  std::vector<std::string> trip_lines;  // branch names opened with the fault
  friend bool operator==(const ClearFault&, const ClearFault&) = default;
};
struct SetpointChange {
  std::optional<double> p_ref;
  std::optional<double> q_ref;
  friend bool operator==(const SetpointChange&, const SetpointChange&) = default;
};

struct SimEvent {
  double t = 0.0;
  std::variant<ApplyFault, ClearFault, SetpointChange> kind;
  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct TwoNodeSolution {
  Phasor i;
  Phasor v_pcc;
  double p = 0.0;
  double q = 0.0;
};

// Source behind r_e + j*x_l feeding v_grid_eq∠0. v_pcc is the node after r_e.
inline TwoNodeSolution solve_two_node(Phasor source, double v_grid_eq, double x_l, double r_e) {
  if (!(x_l > 0.0)) throw ContractViolation("solve_two_node: x_l must be positive");
  if (!(r_e >= 0.0)) throw ContractViolation("solve_two_node: r_e must be non-negative");
  TwoNodeSolution s;
  s.i = (source - Phasor(v_grid_eq, 0.0)) / Phasor(r_e, x_l);
  s.v_pcc = source - r_e * s.i;
  Phasor pq = s.v_pcc * s.i.conj();
  s.p = pq.re();
  s.q = pq.im();
  return s;
}

}  // namespace gfmswing
