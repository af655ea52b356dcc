#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfmswing/core/phasor.hpp"
#include "gfmswing/relay/blinders.hpp"

namespace gfmswing {

// Apparent impedance v/i in ohm, or nothing when |i| is at or below the floor.
inline std::optional<Phasor> measure_impedance(Phasor v, Phasor i, double z_base, double i_floor = 0.02) {
  if (!(i.magnitude() > i_floor)) return std::nullopt;
  return (v / i) * z_base;
}

// One impedance sample; no value marks a blocked measurement, which breaks
// the trajectory.
struct ImpedanceSample {
  double t = 0.0;
  std::optional<Phasor> z_ohm;
};

struct Crossing {
  double t = 0.0;
  Region from = Region::Outside;
  Region to = Region::Outside;
  bool inward() const { return static_cast<int>(to) > static_cast<int>(from); }
  // Zone whose boundary was crossed.
  Region boundary() const { return inward() ? to : from; }
};

namespace detail {
inline void add_line_hits(double a, double b, std::optional<double> line, std::vector<double>& s) {
  if (!line || a == b) return;
  double u = (*line - a) / (b - a);
  if (u > 0.0 && u < 1.0) s.push_back(u);
}
}  // namespace detail

// Zone-region changes along a piecewise-linear trajectory. Every boundary
// crossed inside a sample interval becomes a separate single-level event,
// timestamped by linear interpolation.
inline std::vector<Crossing> detect_crossings(const std::vector<ImpedanceSample>& traj, const BlinderSet& b) {
  std::vector<Crossing> out;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (traj[k].t < traj[k - 1].t) throw InputError("detect_crossings: trajectory not time-ordered");
    if (!traj[k - 1].z_ohm || !traj[k].z_ohm) continue;
    const Phasor z0 = *traj[k - 1].z_ohm, z1 = *traj[k].z_ohm;
    const double t0 = traj[k - 1].t, t1 = traj[k].t;
    Region r0 = zone_test(z0, b);
    const Region r1 = zone_test(z1, b);
    std::vector<double> s;
    for (const Zone* zone : {&b.outer, &b.middle, &b.inner}) {
      detail::add_line_hits(z0.re(), z1.re(), zone->left, s);
      detail::add_line_hits(z0.re(), z1.re(), zone->right, s);
      detail::add_line_hits(z0.im(), z1.im(), zone->bottom, s);
      detail::add_line_hits(z0.im(), z1.im(), zone->top, s);
    }
    if (r0 == r1 && s.empty()) continue;
    std::sort(s.begin(), s.end());
    s.push_back(1.0);
    double prev = 0.0;
    auto emit = [&](Region to, double u) {
      const double t = t0 + u * (t1 - t0);
      int step = static_cast<int>(to) > static_cast<int>(r0) ? 1 : -1;
      while (r0 != to) {
        Region next = static_cast<Region>(static_cast<int>(r0) + step);
        out.push_back({t, r0, next});
        r0 = next;
      }
    };
    for (double u : s) {
      // Region on the open piece (prev, u), probed at its midpoint.
      const double mid = 0.5 * (prev + u);
      const Region r = zone_test(z0 + (z1 - z0) * mid, b);
      if (r != r0) emit(r, prev);
      prev = u;
    }
    if (r1 != r0) emit(r1, 1.0);
  }
  return out;
}

enum class PsbVerdict { Fault, Swing };

inline const char* to_string(PsbVerdict v) { return v == PsbVerdict::Swing ? "swing" : "fault"; }

struct PsbDecision {
  double t = 0.0;        // middle-zone entry time
  double transit = 0.0;  // outer -> middle transit time (s)
  PsbVerdict verdict = PsbVerdict::Fault;
  bool malformed = false;  // middle entry without an observed outer entry
};

// Transit-time classification of each outer -> middle transit. A transit is
// counted once per visit of the outer zone; leaving the outer zone re-arms.
inline std::vector<PsbDecision> psb_evaluate(const std::vector<Crossing>& crossings, double psb_threshold) {
  std::vector<PsbDecision> out;
  // Time of the pending outer-zone entry; NaN when there is none.
  double t_outer = std::numeric_limits<double>::quiet_NaN();
  bool armed = true;
  for (const auto& c : crossings) {
    if (c.from == Region::Outside && c.to == Region::OuterOnly) {
      t_outer = c.t;
      armed = true;
    } else if (c.to == Region::Outside) {
      t_outer = std::numeric_limits<double>::quiet_NaN();
      armed = true;
    } else if (c.from == Region::OuterOnly && c.to == Region::OuterMiddle && armed) {
      PsbDecision d;
      d.t = c.t;
      if (!std::isnan(t_outer)) {
        d.transit = c.t - t_outer;
        d.verdict = d.transit > psb_threshold ? PsbVerdict::Swing : PsbVerdict::Fault;
      } else {
        d.malformed = true;
        d.verdict = PsbVerdict::Fault;
      }
      out.push_back(d);
      armed = false;
    }
  }
  return out;
}

// Out-of-step trip: first inner-zone entry during a transit that the PSB
// element classified as a swing.
inline std::optional<double> ost_evaluate(const std::vector<Crossing>& crossings,
                                          const std::vector<PsbDecision>& psb) {
  std::size_t next = 0;
  std::optional<PsbVerdict> current;
  for (const auto& c : crossings) {
    while (next < psb.size() && psb[next].t <= c.t) {
      current = psb[next].verdict;
      ++next;
    }
    if (c.to == Region::Outside) current.reset();
    if (c.to == Region::Inner && c.from == Region::OuterMiddle && current == PsbVerdict::Swing) return c.t;
  }
  return std::nullopt;
}

struct RelayLog {
  std::vector<Crossing> crossings;
  std::vector<PsbDecision> psb;
  std::optional<double> ost_trip;
  std::vector<std::string> warnings;

  bool psb_detected() const {
    return std::any_of(psb.begin(), psb.end(), [](const PsbDecision& d) { return d.verdict == PsbVerdict::Swing; });
  }
  bool ost_tripped() const { return ost_trip.has_value(); }
};

inline RelayLog evaluate_relay(const std::vector<ImpedanceSample>& traj, const RelayConfig& cfg) {
  RelayLog log;
  log.crossings = detect_crossings(traj, cfg.blinders);
  log.psb = psb_evaluate(log.crossings, cfg.psb_threshold);
  log.ost_trip = ost_evaluate(log.crossings, log.psb);
  for (const auto& d : log.psb)
    if (d.malformed)
      log.warnings.push_back("middle-zone entry at t=" + std::to_string(d.t) + " s without outer-zone entry; treated as fault");
  return log;
}

// Line-delimited records {t, event, zone, verdict}, time-ordered.
inline void write_relay_jsonl(std::ostream& os, const RelayLog& log) {
  struct Row {
    double t;
    int order;
    nlohmann::ordered_json j;
  };
  std::vector<Row> rows;
  int order = 0;
  for (const auto& c : log.crossings) {
    nlohmann::ordered_json j;
    j["t"] = c.t;
    j["event"] = c.inward() ? "enter" : "exit";
    j["zone"] = to_string(c.boundary());
    j["verdict"] = nullptr;
    rows.push_back({c.t, order++, j});
  }
  for (const auto& d : log.psb) {
    nlohmann::ordered_json j;
    j["t"] = d.t;
    j["event"] = "psb";
    j["zone"] = "middle";
    j["verdict"] = to_string(d.verdict);
    j["transit"] = d.transit;
    if (d.malformed) j["warning"] = "no outer-zone entry";
    rows.push_back({d.t, order++, j});
  }
  if (log.ost_trip) {
    nlohmann::ordered_json j;
    j["t"] = *log.ost_trip;
    j["event"] = "ost";
    j["zone"] = "inner";
    j["verdict"] = "trip";
    rows.push_back({*log.ost_trip, order++, j});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
  for (const auto& r : rows) os << r.j.dump() << '\n';
}

}  // namespace gfmswing
