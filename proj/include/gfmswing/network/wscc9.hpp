#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfmswing/core/error.hpp"
#include "gfmswing/network/nodal.hpp"

namespace gfmswing {

enum class BusType { Slack, PV, PQ };

struct LoadFlowBus {
  BusType type = BusType::PQ;
  double v_set = 1.0;   // slack and PV buses
  double p_gen = 0.0;   // PV buses (pu on system base)
  double p_load = 0.0;  // constant-power load during the load flow
  double q_load = 0.0;
};

struct LoadFlowResult {
  std::vector<cd> v;      // bus voltages
  std::vector<cd> s_gen;  // generation needed at each bus (zero at pure load buses)
  int iterations = 0;
};

// Newton-Raphson load flow in polar form over the in-service branches and
// shunts of `net`. The Jacobian is formed by central differences.
inline LoadFlowResult newton_load_flow(const MultiMachineNetwork& net, const std::vector<LoadFlowBus>& spec,
                                       double tol = 1e-11, int max_iter = 40) {
  const std::size_t n = net.buses.size();
  if (spec.size() != n) throw ConfigError("load flow: one bus record per bus required");
  net.validate();
  const Eigen::MatrixXcd y = net.admittance();
  std::vector<std::size_t> ang, mag;
  for (std::size_t k = 0; k < n; ++k) {
    if (spec[k].type != BusType::Slack) ang.push_back(k);
    if (spec[k].type == BusType::PQ) mag.push_back(k);
  }
  if (ang.size() == n) throw ConfigError("load flow: no slack bus");
  std::vector<double> vm(n), va(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) vm[k] = spec[k].type == BusType::PQ ? 1.0 : spec[k].v_set;

  const auto nx = static_cast<Eigen::Index>(ang.size() + mag.size());
  auto unpack = [&](const Eigen::VectorXd& x) {
    for (std::size_t k = 0; k < ang.size(); ++k) va[ang[k]] = x(static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < mag.size(); ++k) vm[mag[k]] = x(static_cast<Eigen::Index>(ang.size() + k));
  };
  auto power = [&]() {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) v(static_cast<Eigen::Index>(k)) = std::polar(vm[k], va[k]);
    Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
    return s;
  };
  auto mismatch = [&](const Eigen::VectorXd& x) {
    unpack(x);
    Eigen::VectorXcd s = power();
    Eigen::VectorXd f(nx);
    for (std::size_t k = 0; k < ang.size(); ++k) {
      const std::size_t b = ang[k];
      f(static_cast<Eigen::Index>(k)) = spec[b].p_gen - spec[b].p_load - s(static_cast<Eigen::Index>(b)).real();
    }
    for (std::size_t k = 0; k < mag.size(); ++k) {
      const std::size_t b = mag[k];
      f(static_cast<Eigen::Index>(ang.size() + k)) = -spec[b].q_load - s(static_cast<Eigen::Index>(b)).imag();
    }
    return f;
  };

  Eigen::VectorXd x(nx);
  for (std::size_t k = 0; k < ang.size(); ++k) x(static_cast<Eigen::Index>(k)) = 0.0;
  for (std::size_t k = 0; k < mag.size(); ++k) x(static_cast<Eigen::Index>(ang.size() + k)) = 1.0;

  LoadFlowResult out;
  for (int it = 0; it <= max_iter; ++it) {
    Eigen::VectorXd f = mismatch(x);
    if (f.lpNorm<Eigen::Infinity>() < tol) {
      out.iterations = it;
      unpack(x);
      Eigen::VectorXcd s = power();
      for (std::size_t k = 0; k < n; ++k) {
        out.v.push_back(std::polar(vm[k], va[k]));
        const cd load(spec[k].p_load, spec[k].q_load);
        out.s_gen.push_back(s(static_cast<Eigen::Index>(k)) + load);
      }
      return out;
    }
    Eigen::MatrixXd jac(nx, nx);
    const double h = 1e-7;
    for (Eigen::Index c = 0; c < nx; ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp(c) += h;
      xm(c) -= h;
      jac.col(c) = (mismatch(xp) - mismatch(xm)) / (2.0 * h);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) throw ConfigError("load flow: singular Jacobian");
    x -= lu.solve(f);
  }
  throw ConfigError("load flow did not converge");
}

// Classical generator data on the 100 MVA system base.
struct GeneratorData {
  std::string id;
  std::size_t bus = 0;
  double h = 0.0;
  double x_d_prime = 0.0;
};

// Three-machine, nine-bus WSCC system with lossless branches (resistance and
// line charging dropped) and loads that the engine turns into constant
// impedances at the load-flow voltages.
struct Wscc9Case {
  MultiMachineNetwork net;
  std::vector<LoadFlowBus> load_flow;
  std::vector<GeneratorData> generators;  // G1, G2, G3 at buses 1, 2, 3
};

// With `q_gen_bus2` set, bus 2 is a PQ bus injecting that reactive power
// instead of holding 1.025 pu.
inline Wscc9Case wscc9_case(double p_gen_bus2 = 1.63, std::optional<double> q_gen_bus2 = std::nullopt) {
  Wscc9Case c;
  for (int k = 1; k <= 9; ++k) c.net.buses.push_back({std::to_string(k)});
  auto branch = [&](int a, int b, double x) {
    c.net.branches.push_back({std::to_string(a) + "-" + std::to_string(b), static_cast<std::size_t>(a - 1),
                              static_cast<std::size_t>(b - 1), x, true});
  };
  branch(1, 4, 0.0576);
  branch(2, 7, 0.0625);
  branch(3, 9, 0.0586);
  branch(4, 5, 0.0850);
  branch(4, 6, 0.0920);
  branch(5, 7, 0.1610);
  branch(6, 9, 0.1700);
  branch(7, 8, 0.0720);
  branch(8, 9, 0.1008);

  c.load_flow.assign(9, LoadFlowBus{});
  c.load_flow[0] = {BusType::Slack, 1.040, 0.0, 0.0, 0.0};
  c.load_flow[1] = {BusType::PV, 1.025, p_gen_bus2, 0.0, 0.0};
  if (q_gen_bus2) c.load_flow[1] = {BusType::PQ, 1.0, p_gen_bus2, 0.0, -*q_gen_bus2};
  c.load_flow[2] = {BusType::PV, 1.025, 0.85, 0.0, 0.0};
  c.load_flow[4].p_load = 1.25;
  c.load_flow[4].q_load = 0.50;
  c.load_flow[5].p_load = 0.90;
  c.load_flow[5].q_load = 0.30;
  c.load_flow[7].p_load = 1.00;
  c.load_flow[7].q_load = 0.35;

  c.generators = {{"G1", 0, 23.64, 0.0608}, {"G2", 1, 6.4, 0.1198}, {"G3", 2, 3.01, 0.1813}};
  for (const auto& g : c.generators) c.net.machines.push_back({g.id, g.bus});
  c.net.relay = RelayAttachment{6, c.net.branch_index("7-8")};
  return c;
}

}  // namespace gfmswing
