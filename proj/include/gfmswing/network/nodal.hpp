#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gfmswing/core/error.hpp"
#include "gfmswing/core/phasor.hpp"

namespace gfmswing {

using cd = std::complex<double>;

struct Bus {
  std::string name;
};

// Series branch modeled as a pure reactance on the system base.
struct Branch {
  std::string name;
  std::size_t from = 0;
  std::size_t to = 0;
  double x = 0.0;
  bool in_service = true;
};

// Constant shunt admittance (loads, fault paths).
struct Shunt {
  std::size_t bus = 0;
  cd y;
};

struct MachineAttachment {
  std::string id;
  std::size_t bus = 0;
};

// Relay at bus `bus` looking into branch `branch`.
struct RelayAttachment {
  std::size_t bus = 0;
  std::size_t branch = 0;
};

struct MultiMachineNetwork {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Shunt> shunts;
  std::vector<MachineAttachment> machines;
  std::optional<RelayAttachment> relay;

  std::size_t bus_index(const std::string& name) const {
    for (std::size_t k = 0; k < buses.size(); ++k)
      if (buses[k].name == name) return k;
    throw ConfigError("unknown bus '" + name + "'");
  }
  std::size_t branch_index(const std::string& name) const {
    for (std::size_t k = 0; k < branches.size(); ++k)
      if (branches[k].name == name) return k;
    throw ConfigError("unknown branch '" + name + "'");
  }

  // Structural checks: indices in range, positive reactances, connected graph
  // over in-service branches.
  void validate() const {
    const std::size_t n = buses.size();
    if (n == 0) throw ConfigError("network has no buses");
    for (const auto& b : branches) {
      if (b.from >= n || b.to >= n || b.from == b.to)
        throw ConfigError("branch '" + b.name + "' has invalid terminals");
      if (!(b.x > 0.0)) throw DomainError("branch " + b.name + ".x", "must be positive");
    }
    for (const auto& s : shunts)
      if (s.bus >= n) throw ConfigError("shunt on unknown bus index");
    for (const auto& m : machines)
      if (m.bus >= n) throw ConfigError("machine '" + m.id + "' attached to unknown bus");
    if (relay && (relay->bus >= n || relay->branch >= branches.size()))
      throw ConfigError("relay attachment out of range");
    std::vector<std::size_t> parent(n);
    for (std::size_t k = 0; k < n; ++k) parent[k] = k;
    auto find = [&](std::size_t k) {
      while (parent[k] != k) k = parent[k] = parent[parent[k]];
      return k;
    };
    for (const auto& b : branches)
      if (b.in_service) parent[find(b.from)] = find(b.to);
    for (std::size_t k = 1; k < n; ++k)
      if (find(k) != find(0)) throw ConfigError("network graph is not connected (bus '" + buses[k].name + "')");
  }

  // Bus admittance matrix including shunts; symmetric by construction.
  Eigen::MatrixXcd admittance() const {
    const auto n = static_cast<Eigen::Index>(buses.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& b : branches) {
      if (!b.in_service) continue;
      const cd yb = 1.0 / cd(0.0, b.x);
      const auto i = static_cast<Eigen::Index>(b.from), j = static_cast<Eigen::Index>(b.to);
      y(i, i) += yb;
      y(j, j) += yb;
      y(i, j) -= yb;
      y(j, i) -= yb;
    }
    for (const auto& s : shunts) y(static_cast<Eigen::Index>(s.bus), static_cast<Eigen::Index>(s.bus)) += s.y;
    return y;
  }
};

// Machine presented to the network: an EMF behind a series impedance (Norton
// equivalent), or an ideal voltage source when the impedance is zero.
struct NodalSource {
  std::size_t bus = 0;
  cd emf;
  cd z;
  bool ideal() const { return z == cd(0.0, 0.0); }
};

// Factorized network with a fixed set of source impedances. Solving for new
// EMFs (and extra current injections) reuses the factorization.
class NodalSolver {
 public:
  NodalSolver(const MultiMachineNetwork& net, std::span<const NodalSource> sources) : n_(net.buses.size()) {
    net.validate();
    y_ = net.admittance();
    dirichlet_.assign(n_, false);
    for (const auto& s : sources) {
      if (s.bus >= n_) throw ConfigError("source attached to unknown bus");
      if (s.ideal()) {
        if (dirichlet_[s.bus]) throw ConfigError("two ideal sources on bus '" + net.buses[s.bus].name + "'");
        dirichlet_[s.bus] = true;
      } else {
        const auto b = static_cast<Eigen::Index>(s.bus);
        y_(b, b) += 1.0 / s.z;
      }
    }
    for (std::size_t k = 0; k < n_; ++k)
      if (!dirichlet_[k]) {
        map_.push_back(k);
      }
    index_.assign(n_, -1);
    for (std::size_t k = 0; k < map_.size(); ++k) index_[map_[k]] = static_cast<Eigen::Index>(k);
    const auto m = static_cast<Eigen::Index>(map_.size());
    yuu_.resize(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
      for (Eigen::Index c = 0; c < m; ++c) yuu_(r, c) = y_(static_cast<Eigen::Index>(map_[r]), static_cast<Eigen::Index>(map_[c]));
    if (m > 0) {
      lu_.compute(yuu_);
      if (!lu_.isInvertible()) throw ConfigError("nodal admittance matrix is singular (floating island or no ground path)");
    }
  }

  // Bus voltages for the given source EMFs (same order as at construction)
  // and optional extra current injections per bus.
  std::vector<cd> solve(std::span<const NodalSource> sources, std::span<const cd> extra = {}) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_));
    Eigen::VectorXcd inj = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_));
    for (const auto& s : sources) {
      if (s.ideal())
        v(static_cast<Eigen::Index>(s.bus)) = s.emf;
      else
        inj(static_cast<Eigen::Index>(s.bus)) += s.emf / s.z;
    }
    for (std::size_t k = 0; k < extra.size() && k < n_; ++k) inj(static_cast<Eigen::Index>(k)) += extra[k];
    const auto m = static_cast<Eigen::Index>(map_.size());
    if (m > 0) {
      Eigen::VectorXcd rhs(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto row = static_cast<Eigen::Index>(map_[r]);
        cd acc = inj(row);
        for (std::size_t c = 0; c < n_; ++c)
          if (dirichlet_[c]) acc -= y_(row, static_cast<Eigen::Index>(c)) * v(static_cast<Eigen::Index>(c));
        rhs(r) = acc;
      }
      Eigen::VectorXcd vu = lu_.solve(rhs);
      const double resid = (yuu_ * vu - rhs).norm();
      if (!(resid <= 1e-10 * std::max(1.0, rhs.norm())))
        throw ConfigError("nodal solve residual " + std::to_string(resid) + " exceeds tolerance");
      for (Eigen::Index r = 0; r < m; ++r) v(static_cast<Eigen::Index>(map_[r])) = vu(r);
    }
    return {v.data(), v.data() + v.size()};
  }

  // Driving-point impedance at a non-ideal bus with all sources zeroed.
  cd driving_point(std::size_t bus) const {
    if (bus >= n_ || index_[bus] < 0) throw ConfigError("driving-point impedance requested at an ideal-source bus");
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(map_.size()));
    e(index_[bus]) = 1.0;
    return lu_.solve(e)(index_[bus]);
  }

  // Net current injected into the network at each bus for the given voltages
  // (branches and shunts only; source impedances excluded).
  static std::vector<cd> injections(const MultiMachineNetwork& net, const std::vector<cd>& v) {
    Eigen::MatrixXcd y = net.admittance();
    Eigen::Map<const Eigen::VectorXcd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
    Eigen::VectorXcd i = y * vv;
    return {i.data(), i.data() + i.size()};
  }

 private:
  std::size_t n_;
  Eigen::MatrixXcd y_;
  Eigen::MatrixXcd yuu_;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu_;
  std::vector<bool> dirichlet_;
  std::vector<std::size_t> map_;
  std::vector<Eigen::Index> index_;
};

// One-shot solve: bus voltages with Y*V = I to a residual below 1e-10.
inline std::vector<Phasor> solve_nodal(const MultiMachineNetwork& net, std::span<const NodalSource> sources) {
  NodalSolver solver(net, sources);
  std::vector<Phasor> out;
  for (const cd& v : solver.solve(sources)) out.emplace_back(v);
  return out;
}

}  // namespace gfmswing
