#pragma once

// Confinement analysis in coefficient space: degeneracy classes of basis
// states (equal diagonal energy), maximum squared-amplitude scans over a
// trajectory, and the off-diagonal coupling graph. Together these separate
// "dynamically confined" from "structurally uncoupled": a target can carry a
// direct H matrix element from the initial state and still never be reached.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinsurf/basis.hpp"
#include "spinsurf/dynamics.hpp"
#include "spinsurf/hamiltonian.hpp"
#include "spinsurf/observables.hpp"
#include "spinsurf/system.hpp"

namespace spinsurf {

struct DegeneracyClass {
  double diagonal_energy = 0.0;    // representative (first member's) energy
  std::vector<int> members;        // 1-based basis indices, ascending
};

// Partition of {1..2^N} by diagonal energy <Phi_k|H|Phi_k>, clustering
// adjacent sorted energies whose gap is <= tol (absolute, energy units).
inline std::vector<DegeneracyClass> degeneracy_classes(
    const HamiltonianMatrix& h, double tol) {
  if (tol < 0.0)
    throw std::invalid_argument("degeneracy_classes: tol must be >= 0");
  const int dim = h.dim();
  std::vector<int> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int k, int l) {
    return h.diagonal_energy(k) < h.diagonal_energy(l);
  });
  std::vector<DegeneracyClass> classes;
  for (int pos = 0; pos < dim; ++pos) {
    const double e = h.diagonal_energy(order[static_cast<std::size_t>(pos)]);
    if (pos == 0 || e - h.diagonal_energy(order[static_cast<std::size_t>(pos - 1)]) > tol) {
      classes.push_back({e, {}});
    }
    classes.back().members.push_back(order[static_cast<std::size_t>(pos)]);
  }
  for (auto& c : classes) std::sort(c.members.begin(), c.members.end());
  return classes;
}

// Default absolute tolerance: 1e-9 * max |<Phi_k|H|Phi_k>|.
inline double default_degeneracy_tol(const HamiltonianMatrix& h) {
  double scale = 0.0;
  for (int k = 1; k <= h.dim(); ++k)
    scale = std::max(scale, std::abs(h.diagonal_energy(k)));
  return 1e-9 * scale;
}

// 0-based position of the class containing basis index k.
inline int class_of(const std::vector<DegeneracyClass>& classes, int k) {
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (std::binary_search(classes[c].members.begin(), classes[c].members.end(), k))
      return static_cast<int>(c);
  throw std::out_of_range("class_of: basis index " + std::to_string(k) +
                          " not found in any class");
}

// Per-target supremum over recorded samples of |C_k(t)|^2.
inline std::map<int, double> max_overlap_scan(const Trajectory& traj,
                                              const std::vector<int>& targets) {
  const int n = traj.system.n_spins();
  std::map<int, double> result;
  for (int k : targets) {
    const int slot = BasisState::from_index(k, n).slot();  // validates k
    double best = 0.0;
    for (const auto& state : traj.states)
      best = std::max(best, std::norm(state(slot)));
    result[k] = best;
  }
  return result;
}

// Connected components of the graph on basis indices with an edge (k, l)
// wherever |H_kl| > threshold, k != l. Components are sorted by their
// smallest member; members ascending.
inline std::vector<std::vector<int>> coupling_graph_components(
    const HamiltonianMatrix& h, double threshold) {
  if (threshold < 0.0)
    throw std::invalid_argument("coupling_graph_components: threshold must be >= 0");
  const int dim = h.dim();
  std::vector<int> component(static_cast<std::size_t>(dim), -1);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int start = 0; start < dim; ++start) {
    if (component[static_cast<std::size_t>(start)] >= 0) continue;
    const int id = static_cast<int>(components.size());
    components.emplace_back();
    stack.push_back(start);
    component[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      const int slot = stack.back();
      stack.pop_back();
      components[static_cast<std::size_t>(id)].push_back(slot + 1);
      for (int other = 0; other < dim; ++other) {
        if (other == slot || component[static_cast<std::size_t>(other)] >= 0)
          continue;
        if (std::abs(h.matrix()(slot, other)) > threshold) {
          component[static_cast<std::size_t>(other)] = id;
          stack.push_back(other);
        }
      }
    }
    std::sort(components.back().begin(), components.back().end());
  }
  return components;
}

struct SeparabilityConfig {
  double degeneracy_tol = -1.0;   // < 0: use default_degeneracy_tol(H)
  double overlap_ceiling = 0.99;  // "reached" means max |C_k|^2 above this
  double graph_threshold = 1e-12;
};

struct SeparabilityTarget {
  int index = 0;                // 1-based basis index
  int class_id = 0;             // 0-based position in the class list
  double max_overlap = 0.0;     // max_t |C_k(t)|^2
  bool same_class_as_initial = false;
  bool flagged = false;         // same class as v0 yet never reached
  double direct_coupling = 0.0;     // |H_{v0,k}|
  bool same_component_as_initial = false;
};

struct SeparabilityReport {
  int initial_index = 0;
  double overlap_ceiling = 0.99;
  std::vector<DegeneracyClass> classes;
  std::vector<SeparabilityTarget> targets;  // one per basis index, ascending
  Eigen::VectorXd per_spin_avg;
  double t_end = 0.0;
};

// Runs the dynamics from basis state v0_index and assembles degeneracy
// classes, per-target max overlaps, graph components and per-spin time
// averages. "Flagged" targets share the initial state's degeneracy class but
// stay below the overlap ceiling for the whole scan horizon.
inline SeparabilityReport separability_report(
    const SpinSystem& sys, const HamiltonianMatrix& h, int v0_index,
    const IntegratorConfig& cfg, const SeparabilityConfig& scfg = {}) {
  const double tol = scfg.degeneracy_tol >= 0.0 ? scfg.degeneracy_tol
                                                : default_degeneracy_tol(h);
  const Eigen::VectorXcd v0 = basis_vector(v0_index, sys.n_spins());
  const Trajectory traj = evolve(sys, h, v0, cfg);

  SeparabilityReport report;
  report.initial_index = v0_index;
  report.overlap_ceiling = scfg.overlap_ceiling;
  report.classes = degeneracy_classes(h, tol);
  report.per_spin_avg = time_average(traj).per_spin_avg;
  report.t_end = traj.times.back();

  std::vector<int> all(static_cast<std::size_t>(h.dim()));
  std::iota(all.begin(), all.end(), 1);
  const auto overlaps = max_overlap_scan(traj, all);
  const auto components = coupling_graph_components(h, scfg.graph_threshold);
  std::vector<int> component_of(static_cast<std::size_t>(h.dim()), -1);
  for (std::size_t c = 0; c < components.size(); ++c)
    for (int k : components[c])
      component_of[static_cast<std::size_t>(k - 1)] = static_cast<int>(c);

  const int initial_class = class_of(report.classes, v0_index);
  const int initial_component =
      component_of[static_cast<std::size_t>(v0_index - 1)];
  const int v0_slot = BasisState::from_index(v0_index, sys.n_spins()).slot();
  report.targets.reserve(static_cast<std::size_t>(h.dim()));
  for (int k = 1; k <= h.dim(); ++k) {
    SeparabilityTarget t;
    t.index = k;
    t.class_id = class_of(report.classes, k);
    t.max_overlap = overlaps.at(k);
    t.same_class_as_initial = (t.class_id == initial_class);
    t.flagged = t.same_class_as_initial && k != v0_index &&
                t.max_overlap < scfg.overlap_ceiling;
    t.direct_coupling = std::abs(
        h.matrix()(BasisState::from_index(k, sys.n_spins()).slot(), v0_slot));
    t.same_component_as_initial =
        (component_of[static_cast<std::size_t>(k - 1)] == initial_component);
    report.targets.push_back(t);
  }
  return report;
}

inline SeparabilityReport separability_report(
    const SpinSystem& sys, int v0_index, const IntegratorConfig& cfg,
    const SeparabilityConfig& scfg = {}) {
  return separability_report(sys, HamiltonianMatrix(sys), v0_index, cfg, scfg);
}

// CSV export: "target_index, class_id, max_overlap, flagged".
inline void write_separability_csv(const SeparabilityReport& report,
                                   std::ostream& os,
                                   const std::string& header_comment = "") {
  if (!header_comment.empty()) os << header_comment;
  os << "target_index, class_id, max_overlap, flagged\n";
  char buf[64];
  for (const auto& t : report.targets) {
    std::snprintf(buf, sizeof buf, "%d, %d, %.17g, %d\n", t.index, t.class_id,
                  t.max_overlap, t.flagged ? 1 : 0);
    os << buf;
  }
}

// Human-readable report. Exposes the dynamical result (max overlaps) next to
// the structural facts (direct couplings, graph components) so confinement
// can be told apart from disconnection.
inline void write_separability_text(const SeparabilityReport& report,
                                    std::ostream& os,
                                    const std::string& header_comment = "") {
  if (!header_comment.empty()) os << header_comment;
  const int n = static_cast<int>(report.per_spin_avg.size());
  os << "separability report\n";
  os << "initial state: " << report.initial_index << "\n";
  os << "scan horizon t_end = " << report.t_end << ", overlap ceiling = "
     << report.overlap_ceiling << "\n\n";
  os << "per-spin time averages <Iz_i>:\n";
  char buf[96];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "  spin %d: %.17g\n", i + 1,
                  report.per_spin_avg(i));
    os << buf;
  }
  os << "\ndegeneracy classes (diagonal energy):\n";
  for (std::size_t c = 0; c < report.classes.size(); ++c) {
    std::snprintf(buf, sizeof buf, "  class %zu: E = %.17g, members:", c,
                  report.classes[c].diagonal_energy);
    os << buf;
    for (int k : report.classes[c].members) os << " " << k;
    os << "\n";
  }
  os << "\ntargets (same-class targets marked, flagged = same class but "
        "never reached):\n";
  os << "  index  class  max|C|^2              |H(v0,k)|   same_component  "
        "flagged\n";
  for (const auto& t : report.targets) {
    std::snprintf(buf, sizeof buf,
                  "  %-5d  %-5d  %-20.12g  %-10.4g  %-14d  %s\n", t.index,
                  t.class_id, t.max_overlap, t.direct_coupling,
                  t.same_component_as_initial ? 1 : 0,
                  t.flagged ? "yes" : "no");
    os << buf;
  }
}

}  // namespace spinsurf
