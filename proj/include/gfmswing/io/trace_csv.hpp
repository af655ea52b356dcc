#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "gfmswing/analysis/curves.hpp"
#include "gfmswing/engine/trace.hpp"
#include "gfmswing/io/number.hpp"

namespace gfmswing {

// Column order of the trace CSV. Angles in degrees, everything else per unit
// except the apparent impedance (ohm). The impedance fields are empty while
// the relay current is below its measuring floor.
inline constexpr std::array<const char*, 14> kTraceColumns = {
    "t",       "v_pcc_re", "v_pcc_im", "i_g_re", "i_g_im", "p_e",      "q_e", "delta_ctrl_deg_unwrapped",
    "delta_pcc_deg", "phi_deg", "r_e", "mode", "z_re_ohm", "z_im_ohm"};

inline std::string trace_csv_header() {
  std::string h;
  for (std::size_t k = 0; k < kTraceColumns.size(); ++k) {
    if (k) h += ',';
    h += kTraceColumns[k];
  }
  return h;
}

inline void write_trace_csv(std::ostream& os, const Trace& tr) {
  os << trace_csv_header() << '\n';
  std::string line;
  for (const auto& r : tr.records) {
    line.clear();
    auto put = [&](double v) {
      line += fmt_double(v);
      line += ',';
    };
    put(r.t);
    put(r.v_pcc.re());
    put(r.v_pcc.im());
    put(r.i_g.re());
    put(r.i_g.im());
    put(r.p_e);
    put(r.q_e);
    put(deg(r.delta_ctrl));
    put(deg(r.delta_pcc));
    put(deg(r.phi));
    put(r.r_e);
    line += to_string(r.mode);
    line += ',';
    if (r.z_ohm) {
      line += fmt_double(r.z_ohm->re());
      line += ',';
      line += fmt_double(r.z_ohm->im());
    } else {
      line += ',';
    }
    os << line << '\n';
  }
}

// One row per (stage, angle) of the power-angle curves.
inline void write_curves_csv(std::ostream& os, const std::vector<StageCurve>& curves) {
  os << "stage,delta_deg,p,p_normal,r_e\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      os << to_string(c.eq.stage) << ',' << fmt_double(deg(p.delta)) << ',' << fmt_double(p.p) << ','
         << fmt_double(p.p_normal) << ',' << fmt_double(p.r_e) << '\n';
}

}  // namespace gfmswing
