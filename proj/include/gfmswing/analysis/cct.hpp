#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gfmswing/analysis/classify.hpp"
#include "gfmswing/core/error.hpp"
#include "gfmswing/engine/simulate.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

// (a) the control/rotor angle passes 360 deg; (b) loss of synchronism.
enum class CctBoundary { SignificantSwing, LossOfSynchronism };

inline const char* to_string(CctBoundary b) {
  return b == CctBoundary::SignificantSwing ? "swing-360" : "los";
}

inline CctBoundary default_boundary(const Scenario& sc) {
  return sc.machine.kind == MachineKind::Gfm && sc.machine.gfm.variant == GfmVariant::NonInertial
             ? CctBoundary::SignificantSwing
             : CctBoundary::LossOfSynchronism;
}

struct CctProbe {
  double fct = 0.0;
  bool crossed = false;
  StabilityVerdict verdict;
};

struct CctResult {
  double cct = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  CctBoundary boundary = CctBoundary::SignificantSwing;
  std::vector<CctProbe> probes;  // every evaluation, in order
};

inline CctProbe cct_probe(const Scenario& sc, double fct, CctBoundary boundary) {
  CctProbe p;
  p.fct = fct;
  p.verdict = classify(simulate(with_fct(sc, fct)));
  p.crossed = boundary == CctBoundary::SignificantSwing ? p.verdict.max_delta_deg > 360.0
                                                        : p.verdict.kind == StabilityKind::LossOfSynchronism;
  return p;
}

// Bisection on the fault clearing time, assuming the outcome is monotone in it.
inline CctResult cct_search(const Scenario& sc, double fct_lo, double fct_hi, double tol, CctBoundary boundary) {
  if (!sc.fault_window()) throw BracketError("scenario has no fault/clearing pair; nothing to bisect");
  if (!(fct_lo > 0.0 && fct_hi > fct_lo)) throw BracketError("require 0 < fct_lo < fct_hi");
  if (!(tol > 0.0)) throw BracketError("tolerance must be positive");
  CctResult res;
  res.boundary = boundary;
  CctProbe lo = cct_probe(sc, fct_lo, boundary);
  CctProbe hi = cct_probe(sc, fct_hi, boundary);
  res.probes = {lo, hi};
  if (lo.crossed || !hi.crossed || lo.verdict.kind == StabilityKind::LossOfSynchronism) {
    throw BracketError(std::string("no boundary crossing in bracket: fct_lo=") + std::to_string(fct_lo) + " -> " +
                       to_string(lo.verdict.kind) + " (max angle " + std::to_string(lo.verdict.max_delta_deg) +
                       " deg), fct_hi=" + std::to_string(fct_hi) + " -> " + to_string(hi.verdict.kind) +
                       " (max angle " + std::to_string(hi.verdict.max_delta_deg) + " deg), boundary " +
                       to_string(boundary));
  }
  double a = fct_lo, b = fct_hi;
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    CctProbe p = cct_probe(sc, m, boundary);
    res.probes.push_back(p);
    (p.crossed ? b : a) = m;
  }
  res.lo = a;
  res.hi = b;
  res.cct = 0.5 * (a + b);
  return res;
}

}  // namespace gfmswing
