#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/phasor.hpp"
#include "gfmswing/engine/trace.hpp"

namespace gfmswing {

enum class StabilityKind { StableNoLimit, ResyncAfterSwing, LossOfSynchronism };

inline const char* to_string(StabilityKind k) {
  switch (k) {
    case StabilityKind::StableNoLimit: return "StableNoLimit";
    case StabilityKind::ResyncAfterSwing: return "ResyncAfterSwing";
    case StabilityKind::LossOfSynchronism: return "LossOfSynchronism";
  }
  return "?";
}

struct ClassifyOptions {
  double swing_threshold_deg = 180.0;  // beyond it the swing is not a plain stable one
  double los_threshold_deg = 720.0;    // divergence threshold for loss of synchronism
  double settle_window = 1.0;          // s, final window for the settling test
  double settle_rate = 0.01;           // rad/s
  double min_post_fault = 5.0;         // s of trace required after the last disturbance
};

struct StabilityVerdict {
  StabilityKind kind = StabilityKind::StableNoLimit;
  double max_delta_deg = 0.0;      // largest |unwrapped angle|
  double final_delta_deg = 0.0;
  double delta_pcc_min_deg = 0.0;  // over the post-fault window
  double delta_pcc_max_deg = 0.0;
  double limited_dwell = 0.0;      // fraction of post-fault samples in current limit
  int mode_alternations = 0;       // mode changes in the post-fault window
  bool settled = false;
  double final_rate = 0.0;         // max |d delta/dt| over the settling window (rad/s)
  double post_fault_start = 0.0;   // s
};

inline StabilityVerdict classify(const Trace& tr, const ClassifyOptions& opt = {}) {
  const auto& r = tr.records;
  if (r.size() < 3) throw InputError("classify: trace too short");
  // Post-fault window: from the first post-fault sample, or the whole run
  // when no fault was cleared.
  std::size_t start = 0;
  for (std::size_t k = 0; k < r.size(); ++k)
    if (r[k].stage == Stage::PostFault) {
      start = k;
      break;
    }
  bool any_fault = std::any_of(r.begin(), r.end(), [](const TraceRecord& x) { return x.stage != Stage::PreFault; });
  if (any_fault && start == 0 && r.front().stage != Stage::PostFault)
    throw InputError("classify: fault never cleared within the trace");
  const double t_post = r[start].t;
  if (r.back().t - t_post < opt.min_post_fault - 1e-9)
    throw InputError("classify: trace too short (need " + std::to_string(opt.min_post_fault) + " s after clearing)");

  StabilityVerdict v;
  v.post_fault_start = t_post;
  for (const auto& x : r) v.max_delta_deg = std::max(v.max_delta_deg, std::abs(deg(x.delta_ctrl)));
  v.final_delta_deg = deg(r.back().delta_ctrl);
  v.delta_pcc_min_deg = v.delta_pcc_max_deg = deg(r[start].delta_pcc);
  std::size_t limited = 0;
  for (std::size_t k = start; k < r.size(); ++k) {
    v.delta_pcc_min_deg = std::min(v.delta_pcc_min_deg, deg(r[k].delta_pcc));
    v.delta_pcc_max_deg = std::max(v.delta_pcc_max_deg, deg(r[k].delta_pcc));
    if (r[k].mode == ControlMode::CurrentLimit) ++limited;
    if (k > start && r[k].mode != r[k - 1].mode) ++v.mode_alternations;
  }
  v.limited_dwell = static_cast<double>(limited) / static_cast<double>(r.size() - start);

  const double t_end = r.back().t;
  double rate = 0.0;
  for (std::size_t k = r.size() - 1; k > 0 && r[k - 1].t >= t_end - opt.settle_window - 1e-12; --k)
    rate = std::max(rate, std::abs(r[k].delta_ctrl - r[k - 1].delta_ctrl) / (r[k].t - r[k - 1].t));
  v.final_rate = rate;
  v.settled = rate < opt.settle_rate;

  if (v.max_delta_deg > opt.los_threshold_deg && !v.settled)
    v.kind = StabilityKind::LossOfSynchronism;
  else if (v.max_delta_deg > opt.swing_threshold_deg)
    v.kind = StabilityKind::ResyncAfterSwing;
  else
    v.kind = StabilityKind::StableNoLimit;
  return v;
}

}  // namespace gfmswing
