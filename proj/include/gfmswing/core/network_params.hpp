#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "gfmswing/core/error.hpp"

namespace gfmswing {

// Single-machine-infinite-bus network: converter transformer x_s, two parallel
// lines x_g1 / x_g2 to the grid, and a fault on x_g2 through x_gnd. All
// reactances in per-unit on the machine base.
struct NetworkParams {
  double x_s = 0.30;
  double x_f = 0.20;
  double x_g1 = 0.35;
  double x_g2 = 0.35;
  double x_gnd = 0.05;
  double theta_g1 = std::numbers::pi / 2.0;
  // Fault position as a fraction of line 2 measured from the converter end.
  double fault_location = 0.0;
  // Use the literal divider x_gnd / (x_g1 // x_g2 // x_gnd) for the faulted
  // source magnitude instead of the Thevenin equivalent.
  bool use_literal_vge_divider = false;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(name, "must be a positive reactance");
    };
    positive(x_s, "x_s");
    positive(x_f, "x_f");
    positive(x_g1, "x_g1");
    positive(x_g2, "x_g2");
    positive(x_gnd, "x_gnd");
    if (!(theta_g1 > 0.0 && theta_g1 <= std::numbers::pi / 2.0 + 1e-15))
      throw DomainError("theta_g1", "must lie in (0, pi/2]");
    if (!(fault_location >= 0.0 && fault_location < 1.0))
      throw DomainError("fault_location", "must lie in [0, 1)");
  }

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

// 1 / sum(1/x_i).
inline double parallel_reactance(std::span<const double> xs) {
  if (xs.empty()) throw InputError("parallel_reactance: empty list");
  double y = 0.0;
  for (double x : xs) {
    if (!(x > 0.0)) throw InputError("parallel_reactance: entries must be positive");
    y += 1.0 / x;
  }
  return 1.0 / y;
}

inline double parallel_reactance(std::initializer_list<double> xs) {
  return parallel_reactance(std::span<const double>(xs.begin(), xs.size()));
}

}  // namespace gfmswing
