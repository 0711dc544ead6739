#pragma once

// Per-spin <I_z^i> expectations, time averages over trajectories, and the
// diagonal-ensemble (infinite-time) average computed by eigendecomposition.
// The diagonal ensemble is the independent oracle against which the RK4
// time averages are checked.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinsurf/basis.hpp"
#include "spinsurf/dynamics.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/hamiltonian.hpp"
#include "spinsurf/system.hpp"

namespace spinsurf {

// <v|I_z^i|v> = sum_n |C_n|^2 m_i(n). spin is 1-based. v must be normalized
// within 1e-6.
inline double iz_expectation(const Eigen::VectorXcd& v, int spin, int n_spins) {
  const int dim = basis_dim(n_spins);
  if (v.size() != dim)
    throw std::invalid_argument("iz_expectation: vector length does not match 2^N");
  if (spin < 1 || spin > n_spins)
    throw std::out_of_range("iz_expectation: spin " + std::to_string(spin) +
                            " outside 1.." + std::to_string(n_spins));
  if (std::abs(v.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("iz_expectation: state is not normalized");
  const auto mask = static_cast<std::uint32_t>(dim - 1);
  const std::uint32_t bit = 1u << (spin - 1);
  double sum = 0.0;
  for (int slot = 0; slot < dim; ++slot) {
    const std::uint32_t pattern = static_cast<std::uint32_t>(slot) ^ mask;
    const double m = (pattern & bit) ? 0.5 : -0.5;
    sum += std::norm(v(slot)) * m;
  }
  return sum;
}

struct SpinExpectationSeries {
  std::vector<double> times;
  Eigen::MatrixXd values;  // one row per sample, one column per spin

  int n_spins() const { return static_cast<int>(values.cols()); }
};

inline SpinExpectationSeries iz_series(const Trajectory& traj) {
  const int n = traj.system.n_spins();
  SpinExpectationSeries series;
  series.times = traj.times;
  series.values.resize(static_cast<Eigen::Index>(traj.size()), n);
  for (std::size_t s = 0; s < traj.size(); ++s)
    for (int i = 1; i <= n; ++i)
      series.values(static_cast<Eigen::Index>(s), i - 1) =
          iz_expectation(traj.states[s], i, n);
  return series;
}

enum class AverageMethod { running_rk4, diagonal_ensemble };

inline const char* to_string(AverageMethod m) {
  return m == AverageMethod::running_rk4 ? "running-rk4" : "diagonal-ensemble";
}

struct AverageReport {
  Eigen::VectorXd per_spin_avg;
  double window_start = 0.0;
  double window_end = 0.0;
  AverageMethod method = AverageMethod::running_rk4;
};

// Arithmetic mean of <I_z^i> over recorded samples with t >= t_start.
inline AverageReport time_average(const Trajectory& traj, double t_start = 0.0) {
  const int n = traj.system.n_spins();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
  long long count = 0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    if (traj.times[s] < t_start) continue;
    for (int i = 1; i <= n; ++i)
      sums(i - 1) += iz_expectation(traj.states[s], i, n);
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("time_average: no recorded samples at t >= " +
                                std::to_string(t_start));
  AverageReport report;
  report.per_spin_avg = sums / static_cast<double>(count);
  report.window_start = t_start;
  report.window_end = traj.times.back();
  report.method = AverageMethod::running_rk4;
  return report;
}

namespace detail {

// Indices [begin, end) into the sorted eigenvalue array, one group per
// distinct eigenvalue at absolute tolerance tol (adjacent-gap clustering).
inline std::vector<std::pair<int, int>> eigenvalue_groups(
    const Eigen::VectorXd& evals, double tol) {
  std::vector<std::pair<int, int>> groups;
  const int n = static_cast<int>(evals.size());
  int begin = 0;
  for (int k = 1; k <= n; ++k) {
    if (k == n || evals(k) - evals(k - 1) > tol) {
      groups.emplace_back(begin, k);
      begin = k;
    }
  }
  return groups;
}

}  // namespace detail

// Exact infinite-time average of <I_z^i> under unitary evolution from v0:
// with H = sum_E E P_E (distinct eigenvalues grouped at relative tolerance
// 1e-9 |H|), the average is sum_E <v0|P_E I_z^i P_E|v0>. The projector form
// is exact also for degenerate spectra, where per-eigenvector weights would
// depend on the eigensolver's arbitrary basis choice.
inline AverageReport diagonal_ensemble_average(const SpinSystem& sys,
                                               const HamiltonianMatrix& h,
                                               const Eigen::VectorXcd& v0) {
  detail::require_normalized(v0, 1e-12);
  if (v0.size() != h.dim())
    throw std::invalid_argument("diagonal_ensemble_average: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
  if (solver.info() != Eigen::Success)
    throw NumericError("diagonal_ensemble_average: eigensolver failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Eigen::MatrixXcd& evecs = solver.eigenvectors();
  const double scale =
      std::max(std::abs(evals(0)), std::abs(evals(evals.size() - 1)));
  const auto groups = detail::eigenvalue_groups(evals, 1e-9 * scale);

  const int n = sys.n_spins();
  AverageReport report;
  report.per_spin_avg = Eigen::VectorXd::Zero(n);
  report.window_start = 0.0;
  report.window_end = std::numeric_limits<double>::infinity();
  report.method = AverageMethod::diagonal_ensemble;

  const int dim = h.dim();
  const auto mask = static_cast<std::uint32_t>(dim - 1);
  for (const auto& [begin, end] : groups) {
    const auto block = evecs.middleCols(begin, end - begin);
    const Eigen::VectorXcd projected = block * (block.adjoint() * v0);
    for (int slot = 0; slot < dim; ++slot) {
      const double w = std::norm(projected(slot));
      if (w == 0.0) continue;
      const std::uint32_t pattern = static_cast<std::uint32_t>(slot) ^ mask;
      for (int i = 1; i <= n; ++i)
        report.per_spin_avg(i - 1) +=
            w * (((pattern >> (i - 1)) & 1u) ? 0.5 : -0.5);
    }
  }
  return report;
}

inline AverageReport diagonal_ensemble_average(const SpinSystem& sys,
                                               const Eigen::VectorXcd& v0) {
  return diagonal_ensemble_average(sys, HamiltonianMatrix(sys), v0);
}

struct ConservationSeries {
  std::vector<double> times;
  std::vector<double> norms;
  std::vector<double> energies;
};

// Per-snapshot ||C||^2 and <C|H|C>, as recorded during integration.
inline ConservationSeries energy_and_norm(const Trajectory& traj) {
  ConservationSeries series;
  series.times = traj.times;
  series.norms.reserve(traj.size());
  for (double n : traj.norms) series.norms.push_back(n * n);
  series.energies = traj.energies;
  return series;
}

// CSV export: "t, Iz1, ..., IzN".
inline void write_observables_csv(const SpinExpectationSeries& series,
                                  std::ostream& os,
                                  const std::string& header_comment = "") {
  if (!header_comment.empty()) os << header_comment;
  os << "t";
  for (int i = 1; i <= series.n_spins(); ++i) os << ", Iz" << i;
  os << "\n";
  char buf[64];
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%.17g", series.times[s]);
    os << buf;
    for (int i = 0; i < series.n_spins(); ++i) {
      std::snprintf(buf, sizeof buf, ", %.17g",
                    series.values(static_cast<Eigen::Index>(s), i));
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace spinsurf
