#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/network_params.hpp"
#include "gfmswing/core/per_unit.hpp"
#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/machines/sg.hpp"
#include "gfmswing/network/stage.hpp"
#include "gfmswing/relay/blinders.hpp"

namespace gfmswing {

enum class MachineKind { Gfm, Sg };
enum class Topology { Smib, Wscc9 };

inline const char* to_string(MachineKind k) { return k == MachineKind::Gfm ? "gfm" : "sg"; }
inline const char* to_string(Topology t) { return t == Topology::Smib ? "smib" : "wscc9"; }

struct MachineSpec {
  MachineKind kind = MachineKind::Gfm;
  GfmParams gfm;
  SgParams sg;
  friend bool operator==(const MachineSpec&, const MachineSpec&) = default;
};

// Settings of the built-in nine-bus preset. The studied machine replaces G2.
struct Wscc9Settings {
  double sg_damping = 2.0;   // damping of the classical generators (pu)
  // Reactive injection at bus 2 in the load flow; unset keeps bus 2 at 1.025 pu.
  std::optional<double> q_bus2;
  friend bool operator==(const Wscc9Settings&, const Wscc9Settings&) = default;
};

struct SimSettings {
  double dt = 5e-4;
  double t_end = 8.0;
  friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct OutputSettings {
  bool csv = true;
  bool summary = true;
  bool plot = false;
  friend bool operator==(const OutputSettings&, const OutputSettings&) = default;
};

struct Scenario {
  int version = 1;
  std::string name;
  PerUnitBase base;
  Topology topology = Topology::Smib;
  NetworkParams network;
  Wscc9Settings wscc9;
  MachineSpec machine;
  std::vector<SimEvent> events;
  SimSettings sim;
  RelayConfig relay;
  double grid_voltage = 1.0;
  OutputSettings outputs;
  // Keys that were filled in from defaults while reading the file.
  std::vector<std::string> applied_defaults;

  void validate() const {
    base.validate();
    if (topology == Topology::Smib) {
      network.validate();
      if (std::abs(network.theta_g1 - std::numbers::pi / 2.0) > 1e-12)
        throw DomainError("theta_g1", "the time-domain engine models lines as pure reactances (theta_g1 = 90 deg)");
    } else {
      if (!(network.x_s >= 0.0)) throw DomainError("x_s", "must be non-negative");
      if (!(network.x_gnd > 0.0)) throw DomainError("x_gnd", "must be positive");
      if (!(wscc9.sg_damping >= 0.0)) throw DomainError("sg_damping", "must be non-negative");
    }
    if (machine.kind == MachineKind::Gfm)
      machine.gfm.validate();
    else
      machine.sg.validate();
    relay.validate();
    if (!(sim.dt > 0.0)) throw DomainError("sim.dt", "must be positive");
    if (!(grid_voltage > 0.0)) throw DomainError("grid_voltage", "must be positive");
    double last = -1.0;
    for (const auto& e : events) {
      if (!(e.t >= 0.0)) throw DomainError("events.t", "must be non-negative");
      if (!(e.t > last)) throw DomainError("events", "must be strictly time-ordered");
      last = e.t;
      if (const auto* f = std::get_if<ApplyFault>(&e.kind); f && f->x_gnd && !(*f->x_gnd > 0.0))
        throw DomainError("x_gnd", "must be positive");
    }
    if (!(sim.t_end > last)) throw DomainError("sim.t_end", "must exceed the last event time");
  }

  // Time of the first fault and of the clearing that follows it.
  std::optional<std::pair<double, double>> fault_window() const {
    std::optional<double> t_fault;
    for (const auto& e : events) {
      if (std::holds_alternative<ApplyFault>(e.kind) && !t_fault) t_fault = e.t;
      if (std::holds_alternative<ClearFault>(e.kind) && t_fault) return std::make_pair(*t_fault, e.t);
    }
    return std::nullopt;
  }
};

// Copy with the clearing event moved to fault time + fct.
inline Scenario with_fct(Scenario s, double fct) {
  if (!(fct > 0.0)) throw DomainError("fct", "must be positive");
  std::optional<double> t_fault;
  for (auto& e : s.events) {
    if (std::holds_alternative<ApplyFault>(e.kind) && !t_fault) t_fault = e.t;
    if (std::holds_alternative<ClearFault>(e.kind) && t_fault) {
      e.t = *t_fault + fct;
      std::stable_sort(s.events.begin(), s.events.end(),
                       [](const SimEvent& a, const SimEvent& b) { return a.t < b.t; });
      s.validate();
      return s;
    }
  }
  throw ConfigError("scenario has no fault followed by a clearing event");
}

}  // namespace gfmswing
