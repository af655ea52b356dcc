#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/phasor.hpp"

namespace gfmswing {

// One zone of the blinder scheme in the impedance plane (ohm): open strip
// left < R < right, optionally capped by bottom < X < top.
struct Zone {
  double left = 0.0;
  double right = 0.0;
  std::optional<double> bottom;
  std::optional<double> top;

  bool contains(Phasor z) const {
    if (!(z.re() > left && z.re() < right)) return false;
    if (bottom && !(z.im() > *bottom)) return false;
    if (top && !(z.im() < *top)) return false;
    return true;
  }
  Zone scaled(double k) const {
    Zone s{left * k, right * k, bottom, top};
    if (s.bottom) *s.bottom *= k;
    if (s.top) *s.top *= k;
    return s;
  }
  friend bool operator==(const Zone&, const Zone&) = default;
};

// Regions ordered from the exterior inwards.
enum class Region { Outside = 0, OuterOnly = 1, OuterMiddle = 2, Inner = 3 };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::Outside: return "outside";
    case Region::OuterOnly: return "outer";
    case Region::OuterMiddle: return "middle";
    case Region::Inner: return "inner";
  }
  return "?";
}

struct BlinderSet {
  Zone outer;
  Zone middle;
  Zone inner;

  // Strict nesting of the resistive blinders; caps, where present, must not
  // let an inner zone poke out of the one around it.
  void validate() const {
    if (!(outer.right > middle.right && middle.right > inner.right))
      throw DomainError("blinders.right", "must satisfy outer > middle > inner");
    if (!(outer.left < middle.left && middle.left < inner.left))
      throw DomainError("blinders.left", "must satisfy outer < middle < inner");
    for (const Zone* z : {&outer, &middle, &inner}) {
      if (!(z->left < z->right)) throw DomainError("blinders", "left blinder must lie left of the right blinder");
      if (z->bottom && z->top && !(*z->bottom < *z->top)) throw DomainError("blinders", "bottom cap must lie below top cap");
    }
    auto cap_nested = [](const Zone& o, const Zone& i, const char* what) {
      if (o.top && (!i.top || *i.top > *o.top)) throw DomainError(what, "top caps must be nested");
      if (o.bottom && (!i.bottom || *i.bottom < *o.bottom)) throw DomainError(what, "bottom caps must be nested");
    };
    cap_nested(outer, middle, "blinders.middle");
    cap_nested(middle, inner, "blinders.inner");
  }

  BlinderSet scaled(double k) const { return {outer.scaled(k), middle.scaled(k), inner.scaled(k)}; }
  friend bool operator==(const BlinderSet&, const BlinderSet&) = default;
};

inline Region zone_test(Phasor z_ohm, const BlinderSet& b) {
  if (b.inner.contains(z_ohm)) return Region::Inner;
  if (b.middle.contains(z_ohm)) return Region::OuterMiddle;
  if (b.outer.contains(z_ohm)) return Region::OuterOnly;
  return Region::Outside;
}

struct RelayConfig {
  BlinderSet blinders;
  double psb_threshold = 0.03;  // s
  double z_base = 1.6;          // ohm per pu at the relay
  double i_floor = 0.02;        // pu; below it no impedance is measured
  std::string preset;           // name of the preset the blinders came from, if any

  void validate() const {
    blinders.validate();
    if (!(psb_threshold > 0.0)) throw DomainError("psb_threshold", "must be positive");
    if (!(z_base > 0.0)) throw DomainError("z_base", "must be positive");
    if (!(i_floor >= 0.0)) throw DomainError("i_floor", "must be non-negative");
  }
  friend bool operator==(const RelayConfig&, const RelayConfig&) = default;
};

// Named presets, dimensioned in ohm on the 1.6 ohm (20 kV / 250 MVA) relay
// base and scaled linearly for other relay bases.
inline constexpr double kPresetBaseOhm = 1.6;

inline std::vector<std::string> blinder_preset_names() { return {"sg-default", "gfm-extended"}; }

inline BlinderSet blinder_preset(const std::string& name, double z_base = kPresetBaseOhm) {
  BlinderSet b;
  if (name == "sg-default") {
    // Quadrilaterals inside the limited-mode circle of the converter, with
    // bottom caps that keep the faulted impedance out of the scheme.
    b.outer = {-1.0, 1.0, -0.3, 1.3};
    b.middle = {-0.7, 0.7, -0.05, 1.0};
    b.inner = {-0.25, 0.25, -0.01, 0.8};
  } else if (name == "gfm-extended") {
    b.outer = {-2.0, 0.95, -3.0, 3.0};
    b.middle = {-1.7, 0.90, -3.0, 3.0};
    b.inner = {-1.4, 0.85, -3.0, 3.0};
  } else {
    throw InputError("unknown blinder preset '" + name + "'");
  }
  return b.scaled(z_base / kPresetBaseOhm);
}

struct BlinderBound {
  double pu = 0.0;
  double ohm = 0.0;
};

// Largest resistance reached by the limited-mode impedance circle
// (centre x_g1∠theta_g1, radius v_g / i_max). Reverse blinders must sit
// strictly below it to be crossed by a converter swing.
inline BlinderBound reverse_blinder_bound(double x_g1, double theta_g1, double v_g, double i_max, double z_base) {
  if (!(i_max > 0.0)) throw ContractViolation("reverse_blinder_bound: i_max must be positive");
  BlinderBound b;
  b.pu = x_g1 * std::cos(theta_g1) + v_g / i_max;
  b.ohm = b.pu * z_base;
  return b;
}

inline bool blinders_within_bound(const BlinderSet& b, const BlinderBound& bound) {
  return b.outer.right < bound.ohm && b.middle.right < bound.ohm && b.inner.right < bound.ohm;
}

// Deepest zone reached by the limited-mode impedance circle (ohm), sampled at
// n points. Reactance caps can keep a zone off the circle even when its right
// blinder is inside the bound.
inline Region deepest_region_on_circle(Phasor centre_ohm, double radius_ohm, const BlinderSet& b, int n = 7200) {
  Region deepest = Region::Outside;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    const Region r = zone_test(centre_ohm + Phasor::polar(radius_ohm, a), b);
    if (static_cast<int>(r) > static_cast<int>(deepest)) deepest = r;
  }
  return deepest;
}

}  // namespace gfmswing
