#pragma once

#include "gfmswing/engine/smib.hpp"
#include "gfmswing/engine/trace.hpp"
#include "gfmswing/engine/wscc9_engine.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

// Time-domain run of a scenario; deterministic for identical input.
inline Trace simulate(const Scenario& sc) {
  if (sc.topology == Topology::Smib) return SmibEngine(sc).run();
  return Wscc9Engine(sc).run();
}

// Impedance trajectory seen by the relay.
inline std::vector<ImpedanceSample> impedance_trajectory(const Trace& tr) {
  std::vector<ImpedanceSample> out;
  out.reserve(tr.records.size());
  for (const auto& r : tr.records) out.push_back({r.t, r.z_ohm});
  return out;
}

}  // namespace gfmswing
