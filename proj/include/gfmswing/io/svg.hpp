#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gfmswing/engine/trace.hpp"
#include "gfmswing/io/number.hpp"
#include "gfmswing/relay/blinders.hpp"

namespace gfmswing {

// Text content escaped for use inside an SVG element.
inline std::string xml_escape(const std::string& s) {
  std::string r;
  r.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

// Minimal static line-plot writer: axes with a frame, tick labels at the
// extremes, any number of polylines.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label)
      : title_(xml_escape(title)), x_label_(xml_escape(x_label)), y_label_(xml_escape(y_label)) {}

  void add_series(std::vector<std::pair<double, double>> pts, std::string colour, double width = 1.2,
                  bool dashed = false) {
    for (const auto& [x, y] : pts) extend(x, y);
    series_.push_back({std::move(pts), std::move(colour), width, dashed});
  }

  void set_equal_aspect(bool on) { equal_ = on; }

  std::string str() const {
    double x0 = xmin_, x1 = xmax_, y0 = ymin_, y1 = ymax_;
    if (!(x1 > x0)) x0 -= 1.0, x1 += 1.0;
    if (!(y1 > y0)) y0 -= 1.0, y1 += 1.0;
    const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
    x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
    double pw = kW - kL - kR, ph = kH - kT - kB;
    if (equal_) {
      const double s = std::min(pw / (x1 - x0), ph / (y1 - y0));
      pw = s * (x1 - x0);
      ph = s * (y1 - y0);
    }
    auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kT + ph - (y - y0) / (y1 - y0) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
      << kW << ' ' << kH << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << title_ << "</text>\n";
    o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (x0 < 0.0 && x1 > 0.0)
      o << "<line x1=\"" << fmt(px(0)) << "\" y1=\"" << kT << "\" x2=\"" << fmt(px(0)) << "\" y2=\"" << fmt(kT + ph)
        << "\" stroke=\"#bbb\"/>\n";
    if (y0 < 0.0 && y1 > 0.0)
      o << "<line x1=\"" << kL << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(kL + pw) << "\" y2=\"" << fmt(py(0))
        << "\" stroke=\"#bbb\"/>\n";
    auto label = [&](double x, double y, const std::string& s, const char* anchor) {
      o << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << s << "</text>\n";
    };
    label(kL, kT + ph + 16, fmt(x0), "start");
    label(kL + pw, kT + ph + 16, fmt(x1), "end");
    label(kL - 4, kT + ph, fmt(y0), "end");
    label(kL - 4, kT + 10, fmt(y1), "end");
    label(kL + pw / 2, kT + ph + 34, x_label_, "middle");
    o << "<text x=\"16\" y=\"" << fmt(kT + ph / 2) << "\" transform=\"rotate(-90 16 " << fmt(kT + ph / 2)
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << y_label_ << "</text>\n";
    for (const auto& s : series_) {
      o << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"" << fmt(s.width) << "\"";
      if (s.dashed) o << " stroke-dasharray=\"5,3\"";
      o << " points=\"";
      for (const auto& [x, y] : s.pts) o << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
      o << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
  }

 private:
  static constexpr double kW = 720, kH = 480, kL = 70, kR = 20, kT = 30, kB = 50;

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
  }
  void extend(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    xmin_ = std::min(xmin_, x), xmax_ = std::max(xmax_, x);
    ymin_ = std::min(ymin_, y), ymax_ = std::max(ymax_, y);
  }

  struct Series {
    std::vector<std::pair<double, double>> pts;
    std::string colour;
    double width;
    bool dashed;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  bool equal_ = false;
  double xmin_ = std::numeric_limits<double>::infinity(), xmax_ = -std::numeric_limits<double>::infinity();
  double ymin_ = std::numeric_limits<double>::infinity(), ymax_ = -std::numeric_limits<double>::infinity();
};

// Apparent impedance trajectory (ohm) with the blinder zones overlaid. Zones
// without reactance caps are drawn to the extent of the trajectory.
inline std::string impedance_plot_svg(const Trace& tr, const BlinderSet& b, const std::string& title) {
  SvgPlot plot(title, "R (ohm)", "X (ohm)");
  plot.set_equal_aspect(true);
  std::vector<std::vector<std::pair<double, double>>> runs(1);
  double lo = -1.0, hi = 1.0;
  for (const auto& r : tr.records) {
    if (!r.z_ohm) {
      if (!runs.back().empty()) runs.emplace_back();
      continue;
    }
    runs.back().push_back({r.z_ohm->re(), r.z_ohm->im()});
    lo = std::min(lo, r.z_ohm->im());
    hi = std::max(hi, r.z_ohm->im());
  }
  const char* colours[] = {"#d62728", "#ff7f0e", "#2ca02c"};
  const Zone* zones[] = {&b.outer, &b.middle, &b.inner};
  for (int k = 0; k < 3; ++k) {
    const Zone& z = *zones[k];
    const double bot = z.bottom.value_or(lo), top = z.top.value_or(hi);
    plot.add_series({{z.left, bot}, {z.right, bot}, {z.right, top}, {z.left, top}, {z.left, bot}}, colours[k], 1.0,
                    true);
  }
  for (auto& run : runs)
    if (!run.empty()) plot.add_series(std::move(run), "#1f77b4");
  return plot.str();
}

// Control/rotor angle (unwrapped) and terminal angle versus time.
inline std::string angle_plot_svg(const Trace& tr, const std::string& title) {
  SvgPlot plot(title, "t (s)", "angle (deg)");
  std::vector<std::pair<double, double>> a, b;
  for (const auto& r : tr.records) {
    a.push_back({r.t, deg(r.delta_ctrl)});
    b.push_back({r.t, deg(r.delta_pcc)});
  }
  plot.add_series(std::move(a), "#1f77b4");
  plot.add_series(std::move(b), "#ff7f0e");
  return plot.str();
}

// Active and reactive terminal power versus time.
inline std::string power_plot_svg(const Trace& tr, const std::string& title) {
  SvgPlot plot(title, "t (s)", "power (pu)");
  std::vector<std::pair<double, double>> p, q;
  for (const auto& r : tr.records) {
    p.push_back({r.t, r.p_e});
    q.push_back({r.t, r.q_e});
  }
  plot.add_series(std::move(p), "#1f77b4");
  plot.add_series(std::move(q), "#2ca02c");
  return plot.str();
}

}  // namespace gfmswing
