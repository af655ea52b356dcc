#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gfmswing/analysis/cct.hpp"
#include "gfmswing/analysis/curves.hpp"
#include "gfmswing/io/scenario_yaml.hpp"
#include "gfmswing/io/summary.hpp"
#include "gfmswing/io/svg.hpp"
#include "gfmswing/io/trace_csv.hpp"
#include "gfmswing/run.hpp"

namespace gfmswing::cli {

namespace fs = std::filesystem;

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;       // bad input, configuration or simulation failure
inline constexpr int kExitUsage = 2;       // command-line parse error
inline constexpr int kExitViolation = 3;   // `verify` found a contract outside tolerance

// Name -> scenario document of the scenarios compiled into the executable.
using BuiltinScenarios = std::map<std::string, std::string>;

// Options shared by every command.
struct CommonOptions {
  std::string scenario;
  std::string out;
  double dt = 0.0;
  double fct = 0.0;
  std::string relay_preset;
  bool plot = false;
  bool seed_echo = false;
  bool has_dt = false, has_fct = false;
};

// A path to a scenario file, or the name of a built-in scenario.
inline Scenario resolve_scenario(const std::string& arg, const BuiltinScenarios& builtins) {
  if (fs::is_regular_file(arg)) return parse_scenario(arg);
  if (auto it = builtins.find(arg); it != builtins.end()) return parse_scenario_text(it->second);
  std::string names;
  for (const auto& [k, v] : builtins) names += (names.empty() ? "" : ", ") + k;
  throw InputError("scenario '" + arg + "' is neither a readable file nor a built-in name (" + names + ")");
}

inline Scenario apply_overrides(Scenario sc, const CommonOptions& o) {
  if (o.has_dt) {
    sc.sim.dt = o.dt;
    sc.validate();
  }
  if (o.has_fct) sc = with_fct(sc, o.fct);
  if (!o.relay_preset.empty()) {
    sc.relay.preset = o.relay_preset;
    sc.relay.blinders = blinder_preset(o.relay_preset, sc.relay.z_base);
  }
  if (o.plot) sc.outputs.plot = true;
  sc.validate();
  return sc;
}

inline fs::path prepare_out_dir(const std::string& requested, const std::string& fallback) {
  fs::path dir = requested.empty() ? fs::path(fallback) : fs::path(requested);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".gfmswing-write-test";
  {
    std::ofstream f(probe);
    if (!f) throw InputError("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
  return dir;
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write '" + p.string() + "'");
  f << content;
  if (!f) throw InputError("write failed for '" + p.string() + "'");
}

// ---------------------------------------------------------------- run

inline int cmd_run(const CommonOptions& o, const BuiltinScenarios& builtins, std::ostream& out) {
  const Scenario sc = apply_overrides(resolve_scenario(o.scenario, builtins), o);
  const fs::path dir = prepare_out_dir(o.out, (fs::path("out") / sc.name).string());
  const RunResult r = run(sc);

  ArtifactNames files;
  if (sc.outputs.csv) {
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    write_file(dir / files.trace, csv.str());
  } else {
    files.trace.clear();
  }
  {
    std::ostringstream jl;
    write_relay_jsonl(jl, r.relay);
    write_file(dir / files.relay_log, jl.str());
  }
  if (sc.outputs.plot) {
    files.plots = {"impedance.svg", "angles.svg", "power.svg"};
    write_file(dir / files.plots[0], impedance_plot_svg(r.trace, sc.relay.blinders, sc.name + ": apparent impedance at the relay"));
    write_file(dir / files.plots[1], angle_plot_svg(r.trace, sc.name + ": control angle (blue), terminal angle (orange)"));
    write_file(dir / files.plots[2], power_plot_svg(r.trace, sc.name + ": P (blue), Q (green)"));
  }
  if (sc.outputs.summary) write_file(dir / "summary.yaml", summary_yaml(sc, r, files, o.seed_echo));

  const auto& v = r.verdict;
  out << "scenario     " << sc.name << '\n';
  out << "verdict      " << to_string(v.kind) << '\n';
  out << "max angle    " << fmt_double(v.max_delta_deg) << " deg\n";
  out << "pcc angle    [" << fmt_double(v.delta_pcc_min_deg) << ", " << fmt_double(v.delta_pcc_max_deg)
      << "] deg after clearing\n";
  out << "mode changes " << v.mode_alternations << '\n';
  out << "relay        psb " << (r.relay.psb_detected() ? "yes" : "no") << ", ost "
      << (r.relay.ost_trip ? "trip at " + fmt_double(*r.relay.ost_trip) + " s" : std::string("no")) << '\n';
  for (const auto& w : r.relay.warnings) out << "warning      " << w << '\n';
  out << "output       " << dir.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- cct

struct CctOptions {
  double lo = 0.02;
  double hi = 0.5;
  double tol = 1e-3;
  std::string boundary = "auto";
};

inline int cmd_cct(const CommonOptions& o, const CctOptions& c, const BuiltinScenarios& builtins, std::ostream& out) {
  const Scenario sc = apply_overrides(resolve_scenario(o.scenario, builtins), o);
  CctBoundary b = default_boundary(sc);
  if (c.boundary == "swing-360")
    b = CctBoundary::SignificantSwing;
  else if (c.boundary == "los")
    b = CctBoundary::LossOfSynchronism;
  else if (c.boundary != "auto")
    throw InputError("--boundary must be auto, swing-360 or los");
  const CctResult res = cct_search(sc, c.lo, c.hi, c.tol, b);
  std::ostringstream log;
  log << "fct,crossed,verdict,max_delta_deg\n";
  for (const auto& p : res.probes)
    log << fmt_double(p.fct) << ',' << (p.crossed ? 1 : 0) << ',' << to_string(p.verdict.kind) << ','
        << fmt_double(p.verdict.max_delta_deg) << '\n';
  out << "boundary " << to_string(res.boundary) << '\n' << log.str();
  out << "cct " << fmt_double(res.cct) << " s (bracket [" << fmt_double(res.lo) << ", " << fmt_double(res.hi)
      << "])\n";
  if (!o.out.empty()) write_file(prepare_out_dir(o.out, o.out) / "cct.csv", log.str());
  return kExitOk;
}

// ---------------------------------------------------------------- curves

inline int cmd_curves(const CommonOptions& o, std::size_t points, const BuiltinScenarios& builtins,
                      std::ostream& out) {
  const Scenario sc = apply_overrides(resolve_scenario(o.scenario, builtins), o);
  if (sc.topology != Topology::Smib || sc.machine.kind != MachineKind::Gfm)
    throw ConfigError("curves: power-angle curves are defined for a converter on the single-machine system");
  if (points < 2) throw InputError("--points must be at least 2");
  const auto curves = power_angle_curves(sc.machine.gfm, sc.network, sc.grid_voltage,
                                         {Stage::PreFault, Stage::DuringFault, Stage::PostFault},
                                         degree_grid(0.0, 360.0, points));
  std::ostringstream csv;
  write_curves_csv(csv, curves);
  const fs::path dir = prepare_out_dir(o.out, (fs::path("out") / sc.name).string());
  write_file(dir / "curves.csv", csv.str());
  if (o.plot) {
    SvgPlot plot(sc.name + ": power-angle curves", "delta (deg)", "P (pu)");
    const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c"};
    for (std::size_t k = 0; k < curves.size(); ++k) {
      std::vector<std::pair<double, double>> pts;
      for (const auto& p : curves[k].points) pts.push_back({deg(p.delta), p.p});
      plot.add_series(std::move(pts), colours[k % 3]);
    }
    write_file(dir / "curves.svg", plot.str());
  }
  for (const auto& c : curves) {
    double pmax = -1e300;
    for (const auto& p : c.points) pmax = std::max(pmax, p.p);
    out << to_string(c.eq.stage) << ": x_l " << fmt_double(c.eq.x_l) << " pu, v_ge " << fmt_double(c.eq.v_grid_eq)
        << " pu, max P " << fmt_double(pmax) << " pu\n";
  }
  out << "output " << (dir / "curves.csv").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool applicable = true;
  std::string note;
  bool pass() const { return !applicable || value <= tolerance; }
};

inline CheckLine make_check(std::string name, double tolerance) {
  CheckLine c;
  c.name = std::move(name);
  c.tolerance = tolerance;
  return c;
}

inline std::vector<CheckLine> verify_checks(const Scenario& sc) {
  std::vector<CheckLine> lines;
  const bool gfm_smib = sc.topology == Topology::Smib && sc.machine.kind == MachineKind::Gfm;
  if (gfm_smib) {
    const GfmParams& g = sc.machine.gfm;
    const StageEquivalent post = stage_equivalent(sc.network, Stage::PostFault, sc.grid_voltage);
    const auto grid = limiter_active_grid(post.x_l, sc.grid_voltage, g.i_max, 1000);
    CheckLine id = make_check("current angle identity (rad)", 1e-9);
    if (auto e = identity_check(post.x_l, sc.grid_voltage, g.i_max, grid))
      id.value = *e;
    else
      id.applicable = false, id.note = "limiter never engages";
    lines.push_back(id);

    CheckLine mag = make_check("limited current magnitude (pu)", 1e-9);
    for (double d : grid) {
      const double r_e = compute_re(d, sc.grid_voltage, sc.grid_voltage, post.x_l, g.i_max);
      const double m = limited_current(d, sc.grid_voltage, sc.grid_voltage, post.x_l, r_e, g.i_max).magnitude();
      mag.value = std::max(mag.value, std::abs(m - g.i_max));
    }
    lines.push_back(mag);

    // Closed-form power against the two-node circuit over random draws.
    CheckLine pw = make_check("closed-form power vs circuit (pu)", 1e-9);
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), vr(0.8, 1.2), vg(0.1, 1.1),
        xl(0.05, 1.0), im(0.5, 2.0);
    for (int k = 0; k < 1000; ++k) {
      const double d = ang(rng), v = vr(rng), e = vg(rng), x = xl(rng), i = im(rng);
      const double r_e = compute_re(d, v, e, x, i);
      const double closed = r_e > 0.0 ? gfm_power_limited(d, v, e, x, r_e, i) : gfm_power_normal(d, v, e, x);
      const double circuit = solve_two_node(Phasor::polar(v, d), e, x, r_e).p;
      pw.value = std::max(pw.value, std::abs(closed - circuit));
    }
    lines.push_back(pw);
  } else {
    for (const char* n : {"current angle identity (rad)", "limited current magnitude (pu)",
                          "closed-form power vs circuit (pu)"})
    {
      CheckLine c = make_check(n, 0.0);
      c.applicable = false;
      c.note = "single-machine converter scenarios only";
      lines.push_back(c);
    }
  }

  const Trace tr = simulate(sc);
  CheckLine circle = make_check("limited-mode impedance circle (pu)", 1e-6);
  if (gfm_smib) {
    if (auto e = circle_check(tr, sc.network.x_g1, sc.network.theta_g1, sc.grid_voltage, sc.machine.gfm.i_max))
      circle.value = *e;
    else
      circle.applicable = false, circle.note = "no limited-mode post-fault sample";
  } else {
    circle.applicable = false, circle.note = "single-machine converter scenarios only";
  }
  lines.push_back(circle);

  CheckLine mode = make_check("mode flag vs r_e (count)", 0.0);
  CheckLine unwrap = make_check("largest angle step (rad)", std::numbers::pi);
  CheckLine order = make_check("non-increasing time steps (count)", 0.0);
  for (std::size_t k = 0; k < tr.records.size(); ++k) {
    const auto& r = tr.records[k];
    if ((r.r_e > 0.0) != (r.mode == ControlMode::CurrentLimit) && sc.machine.kind == MachineKind::Gfm) mode.value += 1;
    if (k > 0) {
      unwrap.value = std::max(unwrap.value, std::abs(r.delta_ctrl - tr.records[k - 1].delta_ctrl));
      if (!(r.t > tr.records[k - 1].t)) order.value += 1;
    }
  }
  lines.push_back(mode);
  lines.push_back(unwrap);
  lines.push_back(order);
  return lines;
}

inline int cmd_verify(const CommonOptions& o, const BuiltinScenarios& builtins, std::ostream& out) {
  const Scenario sc = apply_overrides(resolve_scenario(o.scenario, builtins), o);
  const auto lines = verify_checks(sc);
  bool ok = true;
  for (const auto& l : lines) {
    char buf[160];
    if (!l.applicable)
      std::snprintf(buf, sizeof buf, "SKIP  %-36s (%s)", l.name.c_str(), l.note.c_str());
    else
      std::snprintf(buf, sizeof buf, "%s  %-36s %.3e  (tolerance %.1e)", l.pass() ? "PASS" : "FAIL", l.name.c_str(),
                    l.value, l.tolerance);
    out << buf << '\n';
    ok = ok && l.pass();
  }
  out << (ok ? "all checks within tolerance" : "contract violated") << '\n';
  return ok ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------- blinder-bound

inline int cmd_blinder_bound(const CommonOptions& o, const BuiltinScenarios& builtins, std::ostream& out) {
  const Scenario sc = apply_overrides(resolve_scenario(o.scenario, builtins), o);
  if (sc.machine.kind != MachineKind::Gfm)
    throw ConfigError("blinder-bound: the bound follows from the converter current limit; scenario has no converter");
  const double x_g1 = sc.topology == Topology::Smib ? sc.network.x_g1 : 0.0;
  const double theta = sc.topology == Topology::Smib ? sc.network.theta_g1 : std::numbers::pi / 2.0;
  const BlinderBound bound = reverse_blinder_bound(x_g1, theta, sc.grid_voltage, sc.machine.gfm.i_max, sc.relay.z_base);
  out << "reverse blinder bound " << fmt_double(bound.pu) << " pu = " << fmt_double(bound.ohm) << " ohm\n";
  const Phasor centre = Phasor::polar(x_g1, theta) * sc.relay.z_base;
  const double radius = sc.grid_voltage / sc.machine.gfm.i_max * sc.relay.z_base;
  out << "limited-mode circle: centre " << fmt_double(centre.re()) << (centre.im() < 0 ? " - j" : " + j")
      << fmt_double(std::abs(centre.im())) << " ohm, radius " << fmt_double(radius) << " ohm\n";
  auto report = [&](const std::string& label, const BlinderSet& b) {
    out << label << ": right blinders " << fmt_double(b.outer.right) << " / " << fmt_double(b.middle.right) << " / "
        << fmt_double(b.inner.right) << " ohm -> " << (blinders_within_bound(b, bound) ? "PASS" : "FAIL")
        << "; deepest zone on the circle: " << to_string(deepest_region_on_circle(centre, radius, b)) << '\n';
  };
  report("configured (" + (sc.relay.preset.empty() ? std::string("explicit") : sc.relay.preset) + ")",
         sc.relay.blinders);
  for (const auto& name : blinder_preset_names()) report("preset " + name, blinder_preset(name, sc.relay.z_base));
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

// Scenario fields a sweep may vary.
inline std::map<std::string, std::function<void(Scenario&, double)>> sweep_parameters() {
  return {
      {"fct", [](Scenario& s, double v) { s = with_fct(s, v); }},
      {"dt", [](Scenario& s, double v) { s.sim.dt = v; }},
      {"k_p", [](Scenario& s, double v) { s.machine.gfm.k_p = v; }},
      {"k_q", [](Scenario& s, double v) { s.machine.gfm.k_q = v; }},
      {"p_ref", [](Scenario& s, double v) { s.machine.gfm.p_ref = v; }},
      {"i_max", [](Scenario& s, double v) { s.machine.gfm.i_max = v; }},
      {"omega_p", [](Scenario& s, double v) { s.machine.gfm.omega_p = v; }},
      {"omega_q", [](Scenario& s, double v) { s.machine.gfm.omega_q = v; }},
      {"x_gnd", [](Scenario& s, double v) { s.network.x_gnd = v; }},
      {"x_g1", [](Scenario& s, double v) { s.network.x_g1 = v; }},
      {"x_g2", [](Scenario& s, double v) { s.network.x_g2 = v; }},
      {"h", [](Scenario& s, double v) { s.machine.sg.h = v; }},
      {"p_m", [](Scenario& s, double v) { s.machine.sg.p_m = v; }},
      {"grid_voltage", [](Scenario& s, double v) { s.grid_voltage = v; }},
  };
}

struct SweepRow {
  double value = 0.0;
  std::string error;
  RunResult result;
};

// Independent runs, executed concurrently in batches of `jobs`; rows keep the
// order of `values`.
inline std::vector<SweepRow> sweep(const Scenario& base, const std::string& param, const std::vector<double>& values,
                                   unsigned jobs) {
  const auto params = sweep_parameters();
  const auto it = params.find(param);
  if (it == params.end()) throw InputError("sweep: unknown parameter '" + param + "'");
  if (values.empty()) throw InputError("sweep: no values given");
  jobs = std::max(1u, jobs);
  std::vector<SweepRow> rows(values.size());
  for (std::size_t start = 0; start < values.size(); start += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t k = start; k < std::min(values.size(), start + jobs); ++k) {
      batch.push_back(std::async(std::launch::async, [&, k] {
        rows[k].value = values[k];
        try {
          Scenario s = base;
          it->second(s, values[k]);
          s.validate();
          rows[k].result = run(s);
        } catch (const std::exception& e) {
          rows[k].error = e.what();
        }
      }));
    }
    for (auto& f : batch) f.get();
  }
  return rows;
}

inline int cmd_sweep(const CommonOptions& o, const std::string& param, const std::vector<double>& values,
                     unsigned jobs, const BuiltinScenarios& builtins, std::ostream& out) {
  const Scenario sc = apply_overrides(resolve_scenario(o.scenario, builtins), o);
  const auto rows = sweep(sc, param, values, jobs);
  std::ostringstream csv;
  csv << param << ",verdict,max_delta_deg,delta_pcc_min_deg,delta_pcc_max_deg,mode_alternations,psb,ost,error\n";
  bool any_error = false;
  for (const auto& r : rows) {
    csv << fmt_double(r.value) << ',';
    if (!r.error.empty()) {
      any_error = true;
      std::string e = r.error;
      std::replace(e.begin(), e.end(), ',', ';');
      csv << ",,,,,,," << e << '\n';
      continue;
    }
    const auto& v = r.result.verdict;
    csv << to_string(v.kind) << ',' << fmt_double(v.max_delta_deg) << ',' << fmt_double(v.delta_pcc_min_deg) << ','
        << fmt_double(v.delta_pcc_max_deg) << ',' << v.mode_alternations << ','
        << (r.result.relay.psb_detected() ? 1 : 0) << ',' << (r.result.relay.ost_tripped() ? 1 : 0) << ",\n";
  }
  out << csv.str();
  if (!o.out.empty()) write_file(prepare_out_dir(o.out, o.out) / "sweep.csv", csv.str());
  return any_error ? kExitError : kExitOk;
}

// ---------------------------------------------------------------- dispatch

inline int main_entry(int argc, const char* const* argv, const BuiltinScenarios& builtins, std::ostream& out,
                      std::ostream& err) {
  CLI::App app{"Phasor simulator and relay emulator for power swings of grid-forming converters"};
  app.require_subcommand(1);
  app.fallthrough();

  CommonOptions o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", o.scenario, "scenario file or built-in name")->required();
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--dt", o.dt, "override the integration step (s)")->check(CLI::PositiveNumber);
    sub->add_option("--fct", o.fct, "override the fault clearing time (s after fault)")->check(CLI::PositiveNumber);
    sub->add_option("--relay-preset", o.relay_preset, "blinder preset name")
        ->check(CLI::IsMember(blinder_preset_names()));
    sub->add_flag("--plot", o.plot, "write SVG plots");
    sub->add_flag("--seed-echo", o.seed_echo, "echo the randomness source into the summary");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "simulate, evaluate the relay, write trace, relay log and summary");
  add_common(run_cmd);

  CctOptions cct;
  CLI::App* cct_cmd = app.add_subcommand("cct", "critical clearing time by bisection");
  add_common(cct_cmd);
  cct_cmd->add_option("--lo", cct.lo, "lower clearing-time bracket (s)");
  cct_cmd->add_option("--hi", cct.hi, "upper clearing-time bracket (s)");
  cct_cmd->add_option("--tol", cct.tol, "bracket width at which to stop (s)");
  cct_cmd->add_option("--boundary", cct.boundary, "auto, swing-360 or los");

  std::size_t points = 721;
  CLI::App* curves_cmd = app.add_subcommand("curves", "power-angle curves per network stage");
  add_common(curves_cmd);
  curves_cmd->add_option("--points", points, "angle samples over 0..360 deg");

  CLI::App* verify_cmd = app.add_subcommand("verify", "check analytical contracts and trace invariants");
  add_common(verify_cmd);

  CLI::App* bound_cmd = app.add_subcommand("blinder-bound", "reverse blinder bound and blinder check");
  add_common(bound_cmd);

  std::string param;
  std::vector<double> values;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "batch of runs over one parameter");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--param", param, "parameter to vary")->required();
  sweep_cmd->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "concurrent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  o.has_dt = o.dt > 0.0;
  o.has_fct = o.fct > 0.0;

  try {
    if (run_cmd->parsed()) return cmd_run(o, builtins, out);
    if (cct_cmd->parsed()) return cmd_cct(o, cct, builtins, out);
    if (curves_cmd->parsed()) return cmd_curves(o, points, builtins, out);
    if (verify_cmd->parsed()) return cmd_verify(o, builtins, out);
    if (bound_cmd->parsed()) return cmd_blinder_bound(o, builtins, out);
    if (sweep_cmd->parsed()) return cmd_sweep(o, param, values, jobs, builtins, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  err << "error: unknown command\n";
  return kExitUsage;
}

}  // namespace gfmswing::cli
