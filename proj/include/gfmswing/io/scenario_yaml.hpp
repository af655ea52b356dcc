#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/phasor.hpp"
#include "gfmswing/io/number.hpp"
#include "gfmswing/relay/blinders.hpp"
#include "gfmswing/scenario.hpp"

namespace gfmswing {

inline constexpr int kScenarioVersion = 1;

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

// Strict view of one mapping: every key must be consumed, every default that
// is filled in is reported.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path, std::vector<std::string>* defaults)
      : node_(node), path_(std::move(path)), defaults_(defaults) {
    if (!node_.IsMap()) throw SchemaError(path_, line_of(node_), "expected a mapping");
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!keys_.insert(key).second) throw SchemaError(child(key), line_of(it->first), "duplicate key");
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return keys_.count(key) > 0; }
  const std::string& path() const { return path_; }
  int line() const { return line_of(node_); }

  YAML::Node node(const std::string& key) {
    used_.insert(key);
    return node_[key];
  }

  template <class T>
  T required(const std::string& key) {
    if (!has(key)) throw SchemaError(child(key), line(), "required key missing");
    return convert<T>(node(key), child(key));
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) {
      if (defaults_) defaults_->push_back(child(key));
      return fallback;
    }
    return convert<T>(node(key), child(key));
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(node(key), child(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!used_.count(key)) throw SchemaError(child(key), line_of(it->first), "unknown key");
    }
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw SchemaError(path, line_of(n), "expected a scalar");
    try {
      T v = n.as<T>();
      if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) throw SchemaError(path, line_of(n), "must be finite");
      }
      return v;
    } catch (const YAML::BadConversion&) {
      throw SchemaError(path, line_of(n), "cannot read '" + n.Scalar() + "' as the expected type");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::vector<std::string>* defaults_;
  std::set<std::string> keys_;
  std::set<std::string> used_;
};

inline Zone read_zone(MapReader& parent, const std::string& key) {
  if (!parent.has(key)) throw SchemaError(parent.child(key), parent.line(), "required key missing");
  MapReader m(parent.node(key), parent.child(key), nullptr);
  Zone z;
  z.left = m.required<double>("left");
  z.right = m.required<double>("right");
  z.bottom = m.optional<double>("bottom");
  z.top = m.optional<double>("top");
  m.finish();
  return z;
}

inline GfmVariant parse_variant(const std::string& s, const std::string& path, int line) {
  if (s == "non-inertial") return GfmVariant::NonInertial;
  if (s == "inertial") return GfmVariant::Inertial;
  throw SchemaError(path, line, "variant must be 'non-inertial' or 'inertial'");
}

}  // namespace detail

// Parse a scenario document. A run summary is accepted too: its embedded
// resolved scenario is used.
inline Scenario parse_scenario_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SchemaError("", e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw SchemaError("", 0, "empty document");
  if (!root.IsMap()) throw SchemaError("", detail::line_of(root), "top level must be a mapping");
  if (root["format"] && root["format"].IsScalar() && root["format"].as<std::string>() == "gfmswing-summary") {
    if (!root["scenario"]) throw SchemaError("scenario", detail::line_of(root), "summary without embedded scenario");
    root = root["scenario"];
  }

  Scenario sc;
  std::vector<std::string>& defs = sc.applied_defaults;
  detail::MapReader top(root, "", &defs);
  sc.version = top.required<int>("version");
  if (sc.version != kScenarioVersion)
    throw SchemaError("version", detail::line_of(root["version"]), "unsupported version " + std::to_string(sc.version));
  sc.name = top.get<std::string>("name", "unnamed");

  // Topology first: it decides the defaults of the base and network sections.
  std::string topo = "smib";
  if (top.has("network")) {
    YAML::Node n = root["network"];
    if (n.IsMap() && n["topology"]) topo = detail::MapReader::convert<std::string>(n["topology"], "network.topology");
  }
  if (topo == "smib")
    sc.topology = Topology::Smib;
  else if (topo == "wscc9")
    sc.topology = Topology::Wscc9;
  else
    throw SchemaError("network.topology", detail::line_of(root["network"]["topology"]), "must be 'smib' or 'wscc9'");

  PerUnitBase base_default = sc.topology == Topology::Smib ? PerUnitBase{250.0, 20.0, 50.0} : PerUnitBase{100.0, 230.0, 60.0};
  if (top.has("base")) {
    detail::MapReader b(top.node("base"), "base", &defs);
    sc.base.s_base = b.get("s_base_mw", base_default.s_base);
    sc.base.v_base = b.get("v_base_kv", base_default.v_base);
    sc.base.f0 = b.get("f0_hz", base_default.f0);
    b.finish();
  } else {
    defs.push_back("base");
    sc.base = base_default;
  }

  {
    if (!top.has("network")) defs.push_back("network");
    YAML::Node n = top.has("network") ? top.node("network") : YAML::Node(YAML::NodeType::Map);
    detail::MapReader m(n, "network", &defs);
    m.get<std::string>("topology", "smib");
    NetworkParams d;
    if (sc.topology == Topology::Smib) {
      sc.network.x_s = m.get("x_s", d.x_s);
      sc.network.x_f = m.get("x_f", d.x_f);
      sc.network.x_g1 = m.get("x_g1", d.x_g1);
      sc.network.x_g2 = m.get("x_g2", d.x_g2);
      sc.network.x_gnd = m.get("x_gnd", d.x_gnd);
      sc.network.theta_g1 = rad(m.get("theta_g1_deg", 90.0));
      sc.network.fault_location = m.get("fault_location", d.fault_location);
      sc.network.use_literal_vge_divider = m.get("use_literal_vge_divider", d.use_literal_vge_divider);
    } else {
      sc.network.x_s = m.get("x_s", d.x_s);
      sc.network.x_gnd = m.get("x_gnd", 0.01);
      sc.wscc9.sg_damping = m.get("sg_damping", sc.wscc9.sg_damping);
      sc.wscc9.q_bus2 = m.optional<double>("q_bus2");
    }
    m.finish();
  }

  sc.grid_voltage = top.get("grid_voltage", 1.0);

  {
    if (!top.has("machine")) throw SchemaError("machine", top.line(), "required key missing");
    detail::MapReader m(top.node("machine"), "machine", &defs);
    const std::string type = m.required<std::string>("type");
    if (type == "gfm") {
      sc.machine.kind = MachineKind::Gfm;
      GfmParams d;
      GfmParams& g = sc.machine.gfm;
      g.variant = detail::parse_variant(m.get<std::string>("variant", "non-inertial"), "machine.variant", m.line());
      g.k_p = m.get("k_p", d.k_p);
      g.k_q = m.get("k_q", d.k_q);
      g.p_ref = m.get("p_ref", d.p_ref);
      g.q_ref = m.get("q_ref", d.q_ref);
      g.v_mref = m.get("v_mref", d.v_mref);
      g.i_max = m.get("i_max", d.i_max);
      g.omega_p = m.get("omega_p", d.omega_p);
      g.omega_q = m.get("omega_q", d.omega_q);
      g.k_pi = m.get("k_pi", d.k_pi);
      g.sigma = m.get("sigma", d.sigma);
      g.scale_kp_by_omega0 = m.get("scale_kp_by_omega0", d.scale_kp_by_omega0);
    } else if (type == "sg") {
      sc.machine.kind = MachineKind::Sg;
      SgParams d;
      if (sc.topology == Topology::Wscc9) {
        d.h = 6.4;
        d.x_internal = 0.1198;
        d.p_m = 1.63;
      }
      SgParams& g = sc.machine.sg;
      g.h = m.get("h", d.h);
      g.d = m.get("d", d.d);
      g.x_internal = m.get("x_internal", d.x_internal);
      g.e_mag = m.get("e_mag", d.e_mag);
      g.p_m = m.get("p_m", d.p_m);
      g.v_terminal = m.get("v_terminal", d.v_terminal);
    } else {
      throw SchemaError("machine.type", m.line(), "must be 'gfm' or 'sg'");
    }
    m.finish();
  }

  if (top.has("events")) {
    YAML::Node ev = top.node("events");
    if (!ev.IsSequence()) throw SchemaError("events", detail::line_of(ev), "expected a sequence");
    for (std::size_t k = 0; k < ev.size(); ++k) {
      const std::string path = "events[" + std::to_string(k) + "]";
      detail::MapReader m(ev[k], path, nullptr);
      SimEvent e;
      e.t = m.required<double>("t");
      const std::string type = m.required<std::string>("type");
      if (type == "apply_fault") {
        ApplyFault f;
        f.x_gnd = m.optional<double>("x_gnd");
        f.bus = m.optional<std::string>("bus");
        e.kind = f;
      } else if (type == "clear_fault") {
        ClearFault c;
        if (m.has("trip")) {
          YAML::Node tl = m.node("trip");
          if (!tl.IsSequence()) throw SchemaError(path + ".trip", detail::line_of(tl), "expected a sequence of line names");
          for (const auto& l : tl) c.trip_lines.push_back(detail::MapReader::convert<std::string>(l, path + ".trip"));
        }
        e.kind = c;
      } else if (type == "setpoint") {
        SetpointChange s;
        s.p_ref = m.optional<double>("p_ref");
        s.q_ref = m.optional<double>("q_ref");
        e.kind = s;
      } else {
        throw SchemaError(path + ".type", m.line(), "must be apply_fault, clear_fault or setpoint");
      }
      m.finish();
      sc.events.push_back(e);
    }
  } else {
    defs.push_back("events");
  }

  {
    if (!top.has("sim")) defs.push_back("sim");
    YAML::Node n = top.has("sim") ? top.node("sim") : YAML::Node(YAML::NodeType::Map);
    detail::MapReader m(n, "sim", &defs);
    sc.sim.dt = m.get("dt", sc.sim.dt);
    sc.sim.t_end = m.get("t_end", sc.sim.t_end);
    m.finish();
  }

  {
    if (!top.has("relay")) defs.push_back("relay");
    YAML::Node n = top.has("relay") ? top.node("relay") : YAML::Node(YAML::NodeType::Map);
    detail::MapReader m(n, "relay", &defs);
    sc.relay.z_base = m.get("z_base_ohm", sc.base.z_base());
    sc.relay.psb_threshold = m.get("psb_threshold", sc.relay.psb_threshold);
    sc.relay.i_floor = m.get("i_floor", sc.relay.i_floor);
    if (m.has("blinders") && m.has("preset"))
      throw SchemaError("relay", m.line(), "give either 'preset' or 'blinders', not both");
    if (m.has("blinders")) {
      detail::MapReader b(m.node("blinders"), "relay.blinders", nullptr);
      sc.relay.blinders.outer = detail::read_zone(b, "outer");
      sc.relay.blinders.middle = detail::read_zone(b, "middle");
      sc.relay.blinders.inner = detail::read_zone(b, "inner");
      b.finish();
    } else {
      sc.relay.preset = m.get<std::string>("preset", "sg-default");
      try {
        sc.relay.blinders = blinder_preset(sc.relay.preset, sc.relay.z_base);
      } catch (const InputError& e) {
        throw SchemaError("relay.preset", m.line(), e.what());
      }
    }
    m.finish();
  }

  {
    if (!top.has("outputs")) defs.push_back("outputs");
    YAML::Node n = top.has("outputs") ? top.node("outputs") : YAML::Node(YAML::NodeType::Map);
    detail::MapReader m(n, "outputs", &defs);
    sc.outputs.csv = m.get("csv", sc.outputs.csv);
    sc.outputs.summary = m.get("summary", sc.outputs.summary);
    sc.outputs.plot = m.get("plot", sc.outputs.plot);
    m.finish();
  }
  top.finish();
  sc.validate();
  return sc;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

namespace detail {

inline void emit_num(YAML::Emitter& out, const char* key, double v) { out << YAML::Key << key << YAML::Value << fmt_double(v); }

inline void emit_zone(YAML::Emitter& out, const char* key, const Zone& z) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginMap;
  emit_num(out, "left", z.left);
  emit_num(out, "right", z.right);
  if (z.bottom) emit_num(out, "bottom", *z.bottom);
  if (z.top) emit_num(out, "top", *z.top);
  out << YAML::EndMap;
}

}  // namespace detail

// Emit the fully resolved scenario (every key explicit) into an open map.
inline void emit_scenario(YAML::Emitter& out, const Scenario& sc) {
  using detail::emit_num;
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << sc.version;
  out << YAML::Key << "name" << YAML::Value << sc.name;
  out << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
  emit_num(out, "s_base_mw", sc.base.s_base);
  emit_num(out, "v_base_kv", sc.base.v_base);
  emit_num(out, "f0_hz", sc.base.f0);
  out << YAML::EndMap;
  out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "topology" << YAML::Value << to_string(sc.topology);
  if (sc.topology == Topology::Smib) {
    emit_num(out, "x_s", sc.network.x_s);
    emit_num(out, "x_f", sc.network.x_f);
    emit_num(out, "x_g1", sc.network.x_g1);
    emit_num(out, "x_g2", sc.network.x_g2);
    emit_num(out, "x_gnd", sc.network.x_gnd);
    emit_num(out, "theta_g1_deg", deg(sc.network.theta_g1));
    emit_num(out, "fault_location", sc.network.fault_location);
    out << YAML::Key << "use_literal_vge_divider" << YAML::Value << sc.network.use_literal_vge_divider;
  } else {
    emit_num(out, "x_s", sc.network.x_s);
    emit_num(out, "x_gnd", sc.network.x_gnd);
    emit_num(out, "sg_damping", sc.wscc9.sg_damping);
    if (sc.wscc9.q_bus2) emit_num(out, "q_bus2", *sc.wscc9.q_bus2);
  }
  out << YAML::EndMap;
  emit_num(out, "grid_voltage", sc.grid_voltage);
  out << YAML::Key << "machine" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "type" << YAML::Value << to_string(sc.machine.kind);
  if (sc.machine.kind == MachineKind::Gfm) {
    const GfmParams& g = sc.machine.gfm;
    out << YAML::Key << "variant" << YAML::Value << to_string(g.variant);
    emit_num(out, "k_p", g.k_p);
    emit_num(out, "k_q", g.k_q);
    emit_num(out, "p_ref", g.p_ref);
    emit_num(out, "q_ref", g.q_ref);
    emit_num(out, "v_mref", g.v_mref);
    emit_num(out, "i_max", g.i_max);
    emit_num(out, "omega_p", g.omega_p);
    emit_num(out, "omega_q", g.omega_q);
    emit_num(out, "k_pi", g.k_pi);
    emit_num(out, "sigma", g.sigma);
    out << YAML::Key << "scale_kp_by_omega0" << YAML::Value << g.scale_kp_by_omega0;
  } else {
    const SgParams& g = sc.machine.sg;
    emit_num(out, "h", g.h);
    emit_num(out, "d", g.d);
    emit_num(out, "x_internal", g.x_internal);
    emit_num(out, "e_mag", g.e_mag);
    emit_num(out, "p_m", g.p_m);
    emit_num(out, "v_terminal", g.v_terminal);
  }
  out << YAML::EndMap;
  out << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& e : sc.events) {
    out << YAML::Flow << YAML::BeginMap;
    emit_num(out, "t", e.t);
    if (const auto* f = std::get_if<ApplyFault>(&e.kind)) {
      out << YAML::Key << "type" << YAML::Value << "apply_fault";
      if (f->x_gnd) emit_num(out, "x_gnd", *f->x_gnd);
      if (f->bus) out << YAML::Key << "bus" << YAML::Value << YAML::DoubleQuoted << *f->bus;
    } else if (const auto* c = std::get_if<ClearFault>(&e.kind)) {
      out << YAML::Key << "type" << YAML::Value << "clear_fault";
      out << YAML::Key << "trip" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& l : c->trip_lines) out << YAML::DoubleQuoted << l;
      out << YAML::EndSeq;
    } else if (const auto* s = std::get_if<SetpointChange>(&e.kind)) {
      out << YAML::Key << "type" << YAML::Value << "setpoint";
      if (s->p_ref) emit_num(out, "p_ref", *s->p_ref);
      if (s->q_ref) emit_num(out, "q_ref", *s->q_ref);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  emit_num(out, "dt", sc.sim.dt);
  emit_num(out, "t_end", sc.sim.t_end);
  out << YAML::EndMap;
  out << YAML::Key << "relay" << YAML::Value << YAML::BeginMap;
  const bool from_preset = !sc.relay.preset.empty() && [&] {
    try {
      return blinder_preset(sc.relay.preset, sc.relay.z_base) == sc.relay.blinders;
    } catch (const InputError&) {
      return false;
    }
  }();
  if (from_preset) {
    out << YAML::Key << "preset" << YAML::Value << sc.relay.preset;
  } else {
    out << YAML::Key << "blinders" << YAML::Value << YAML::BeginMap;
    detail::emit_zone(out, "outer", sc.relay.blinders.outer);
    detail::emit_zone(out, "middle", sc.relay.blinders.middle);
    detail::emit_zone(out, "inner", sc.relay.blinders.inner);
    out << YAML::EndMap;
  }
  emit_num(out, "psb_threshold", sc.relay.psb_threshold);
  emit_num(out, "z_base_ohm", sc.relay.z_base);
  emit_num(out, "i_floor", sc.relay.i_floor);
  out << YAML::EndMap;
  out << YAML::Key << "outputs" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "csv" << YAML::Value << sc.outputs.csv;
  out << YAML::Key << "summary" << YAML::Value << sc.outputs.summary;
  out << YAML::Key << "plot" << YAML::Value << sc.outputs.plot;
  out << YAML::EndMap;
  out << YAML::EndMap;
}

inline std::string scenario_to_yaml(const Scenario& sc) {
  YAML::Emitter out;
  emit_scenario(out, sc);
  return std::string(out.c_str()) + "\n";
}

}  // namespace gfmswing
