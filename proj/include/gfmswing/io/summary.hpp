#pragma once

#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "gfmswing/io/number.hpp"
#include "gfmswing/io/scenario_yaml.hpp"
#include "gfmswing/run.hpp"

namespace gfmswing {

// Names of the files written next to the summary.
struct ArtifactNames {
  std::string trace = "trace.csv";
  std::string relay_log = "relay.jsonl";
  std::vector<std::string> plots;
};

// Run summary: the fully resolved scenario (re-runnable as is), the defaults
// that were applied while reading it, the stability verdict and the relay
// outcome.
inline std::string summary_yaml(const Scenario& sc, const RunResult& r, const ArtifactNames& files,
                                bool seed_echo = false) {
  YAML::Emitter out;
  auto num = [&](const char* key, double v) { out << YAML::Key << key << YAML::Value << fmt_double(v); };
  out << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << "gfmswing-summary";
  out << YAML::Key << "summary_version" << YAML::Value << 1;
  out << YAML::Key << "scenario" << YAML::Value;
  emit_scenario(out, sc);
  out << YAML::Key << "applied_defaults" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : sc.applied_defaults) out << d;
  out << YAML::EndSeq;
  if (seed_echo) {
    // Runs are fully deterministic; the echo records that no random stream
    // is involved so a rerun needs nothing beyond the scenario above.
    out << YAML::Key << "seed" << YAML::Value << "none (deterministic)";
  }

  const StabilityVerdict& v = r.verdict;
  out << YAML::Key << "verdict" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(v.kind);
  num("max_delta_deg", v.max_delta_deg);
  num("final_delta_deg", v.final_delta_deg);
  num("delta_pcc_min_deg", v.delta_pcc_min_deg);
  num("delta_pcc_max_deg", v.delta_pcc_max_deg);
  num("limited_dwell", v.limited_dwell);
  out << YAML::Key << "mode_alternations" << YAML::Value << v.mode_alternations;
  out << YAML::Key << "settled" << YAML::Value << v.settled;
  num("final_rate_rad_s", v.final_rate);
  num("post_fault_start_s", v.post_fault_start);
  out << YAML::EndMap;

  out << YAML::Key << "relay" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "psb_detected" << YAML::Value << r.relay.psb_detected();
  out << YAML::Key << "ost_tripped" << YAML::Value << r.relay.ost_tripped();
  if (r.relay.ost_trip) num("ost_trip_s", *r.relay.ost_trip);
  out << YAML::Key << "crossings" << YAML::Value << r.relay.crossings.size();
  out << YAML::Key << "psb_decisions" << YAML::Value << YAML::BeginSeq;
  for (const auto& d : r.relay.psb) {
    out << YAML::Flow << YAML::BeginMap;
    num("t", d.t);
    num("transit", d.transit);
    out << YAML::Key << "verdict" << YAML::Value << to_string(d.verdict);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "warnings" << YAML::Value << YAML::BeginSeq;
  for (const auto& w : r.relay.warnings) out << w;
  out << YAML::EndSeq;
  out << YAML::EndMap;

  out << YAML::Key << "artifacts" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "trace" << YAML::Value << files.trace;
  out << YAML::Key << "relay_log" << YAML::Value << files.relay_log;
  if (!files.plots.empty()) {
    out << YAML::Key << "plots" << YAML::Value << YAML::BeginSeq;
    for (const auto& p : files.plots) out << p;
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace gfmswing
