#pragma once

#include "gfmswing/analysis/classify.hpp"
#include "gfmswing/engine/simulate.hpp"
#include "gfmswing/relay/logic.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

struct RunResult {
  Trace trace;
  RelayLog relay;
  StabilityVerdict verdict;
};

// Simulate, evaluate the relay on the impedance trajectory, classify.
inline RunResult run(const Scenario& sc, const ClassifyOptions& opt = {}) {
  RunResult r;
  r.trace = simulate(sc);
  r.relay = evaluate_relay(impedance_trajectory(r.trace), sc.relay);
  r.verdict = classify(r.trace, opt);
  return r;
}

}  // namespace gfmswing
