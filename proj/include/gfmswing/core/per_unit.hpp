#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "gfmswing/core/error.hpp"

namespace gfmswing {

enum class Quantity { Impedance, Power, Voltage };

inline Quantity parse_quantity(std::string_view kind) {
  if (kind == "impedance") return Quantity::Impedance;
  if (kind == "power") return Quantity::Power;
  if (kind == "voltage") return Quantity::Voltage;
  throw InputError("unknown quantity kind '" + std::string(kind) + "'");
}

// Three-phase base: s_base in MW, v_base line-line in kV, f0 in Hz.
struct PerUnitBase {
  double s_base = 250.0;
  double v_base = 20.0;
  double f0 = 50.0;

  double z_base() const { return v_base * v_base / s_base; }
  double omega0() const { return 2.0 * std::numbers::pi * f0; }

  void validate() const {
    if (!(s_base > 0.0)) throw DomainError("s_base", "must be positive");
    if (!(v_base > 0.0)) throw DomainError("v_base", "must be positive");
    if (!(f0 > 0.0)) throw DomainError("f0", "must be positive");
  }

  friend bool operator==(const PerUnitBase&, const PerUnitBase&) = default;
};

inline double base_value(const PerUnitBase& base, Quantity kind) {
  base.validate();
  switch (kind) {
    case Quantity::Impedance: return base.z_base();
    case Quantity::Power: return base.s_base;
    case Quantity::Voltage: return base.v_base;
  }
  throw InputError("unknown quantity kind");
}

// Physical value (ohm, MW, kV) to per-unit.
inline double pu_convert(double value, const PerUnitBase& base, Quantity kind) {
  return value / base_value(base, kind);
}
inline double pu_convert(double value, const PerUnitBase& base, std::string_view kind) {
  return pu_convert(value, base, parse_quantity(kind));
}

// Per-unit back to the physical value.
inline double from_pu(double value, const PerUnitBase& base, Quantity kind) {
  return value * base_value(base, kind);
}
inline double from_pu(double value, const PerUnitBase& base, std::string_view kind) {
  return from_pu(value, base, parse_quantity(kind));
}

}  // namespace gfmswing
