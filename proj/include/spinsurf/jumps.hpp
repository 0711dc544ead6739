#pragma once

// Quantum-jump machinery: deterministic degeneracy-class ensemble averages,
// a stochastic jump simulator (unitary evolution interrupted at Poisson
// times by collapse onto a random equal-energy basis state), and the
// single-spin thermal closure rho_i = A exp(-beta omega I_z^i) with
// <I_z^i> = -1/2 tanh(beta omega / 2).
//
// Jump mechanism: targets are drawn uniformly from the degeneracy class of
// the INITIAL basis state, so every jump conserves the diagonal energy
// within the class tolerance. With rate = 0 the simulator reduces bitwise to
// plain evolution plus time averaging.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spinsurf/basis.hpp"
#include "spinsurf/dynamics.hpp"
#include "spinsurf/errors.hpp"
#include "spinsurf/hamiltonian.hpp"
#include "spinsurf/observables.hpp"
#include "spinsurf/surfaces.hpp"
#include "spinsurf/system.hpp"

namespace spinsurf {

struct JumpConfig {
  double rate = 0.01;            // jump rate lambda, per unit time
  std::uint64_t seed = 0;
  int n_trajectories = 1;
  double class_tolerance = -1.0;  // < 0: use default_degeneracy_tol(H)

  void validate() const {
    if (!(rate >= 0.0)) throw std::invalid_argument("JumpConfig: rate must be >= 0");
    if (n_trajectories < 1)
      throw std::invalid_argument("JumpConfig: n_trajectories must be >= 1");
  }
};

struct JumpEnsemble {
  enum class Source { class_average, stochastic };

  Source source = Source::class_average;
  Eigen::VectorXd per_spin_avg;
  Eigen::VectorXd per_spin_stderr;  // sample stderr over the rows below
  Eigen::MatrixXd per_trajectory;   // one row of per-spin averages per member
  std::vector<int> initial_indices;  // starting basis index of each row
  JumpConfig jump_config;            // meaningful for stochastic ensembles
};

struct ThermalPrediction {
  double beta = 0.0;           // inverse spin temperature
  double normalization = 0.5;  // A with Tr rho_i = 1
  double predicted_avg = 0.0;  // -1/2 tanh(beta omega / 2)
};

// Inverts <I_z>_av = -1/2 tanh(beta omega / 2) for beta. Negative beta
// (population inversion) is a legitimate result and is returned as such.
inline ThermalPrediction fit_beta(double avg, double omega) {
  if (!(std::abs(avg) < 0.5))
    throw std::out_of_range("fit_beta: |average| must be < 1/2 (beta diverges)");
  if (omega == 0.0)
    throw std::invalid_argument("fit_beta: omega = 0 leaves beta undetermined");
  ThermalPrediction p;
  p.beta = -(2.0 / omega) * std::atanh(2.0 * avg);
  p.normalization = 1.0 / (2.0 * std::cosh(p.beta * omega / 2.0));
  p.predicted_avg = -0.5 * std::tanh(p.beta * omega / 2.0);
  return p;
}

namespace detail {

// Per-trajectory deterministic RNG stream. Draws are hand-rolled on top of
// std::mt19937_64 so sequences do not depend on the standard library's
// distribution implementations.
class JumpRng {
 public:
  JumpRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream),
        static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
    engine_.seed(seq);
  }

  // Strictly inside (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

  // Uniform in [0, n) for the small n used here (class sizes <= 2^14); the
  // min() guards against u * n rounding up to exactly n.
  std::size_t pick(std::size_t n) {
    const auto scaled = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return std::min(scaled, n - 1);
  }

 private:
  std::mt19937_64 engine_;
};

struct JumpClass {
  double energy = 0.0;
  std::vector<int> members;  // 1-based basis indices
};

inline JumpClass jump_class_of(const HamiltonianMatrix& h, int v0_index,
                               double class_tolerance) {
  const double tol = class_tolerance >= 0.0 ? class_tolerance
                                            : default_degeneracy_tol(h);
  const auto classes = degeneracy_classes(h, tol);
  const auto& cls = classes[static_cast<std::size_t>(class_of(classes, v0_index))];
  if (cls.members.empty())
    throw ConfigError("stochastic jumps: empty jump class");  // unreachable
  return {h.diagonal_energy(v0_index), cls.members};
}

// Core of the stochastic simulator. The accumulation at sample points mirrors
// time_average() over an evolve() trajectory operation for operation, which
// is what makes the rate = 0 case agree bitwise with the jump-free pipeline.
inline Eigen::VectorXd stochastic_trajectory_averages(
    const SpinSystem& sys, const HamiltonianMatrix& h, int v0_index,
    const JumpConfig& jcfg, const IntegratorConfig& cfg,
    std::uint64_t stream) {
  jcfg.validate();
  const int n = sys.n_spins();
  Eigen::VectorXcd v = basis_vector(v0_index, n);
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(n);
  long long count = 0;
  auto on_sample = [&](double, const Eigen::VectorXcd& state) {
    for (int i = 1; i <= n; ++i) sums(i - 1) += iz_expectation(state, i, n);
    ++count;
  };
  if (jcfg.rate == 0.0) {
    rk4_drive(h, v, cfg, on_sample, [](double, Eigen::VectorXcd&) {});
  } else {
    const JumpClass cls = jump_class_of(h, v0_index, jcfg.class_tolerance);
    const double tol = jcfg.class_tolerance >= 0.0 ? jcfg.class_tolerance
                                                   : default_degeneracy_tol(h);
    JumpRng rng(jcfg.seed, stream);
    double next_jump = rng.exponential(jcfg.rate);
    auto before_step = [&](double t, Eigen::VectorXcd& state) {
      while (t >= next_jump) {
        const int target =
            cls.members[rng.pick(cls.members.size())];
        if (std::abs(h.diagonal_energy(target) - cls.energy) > tol)
          throw std::logic_error("stochastic jumps: target left the energy class");
        state = basis_vector(target, n);
        next_jump += rng.exponential(jcfg.rate);
      }
    };
    rk4_drive(h, v, cfg, on_sample, before_step);
  }
  return sums / static_cast<double>(count);
}

// Runs fn(member) for member = 0..count-1 on up to hardware_concurrency
// threads. Results land in caller-owned slots, so the reduction order never
// depends on scheduling.
template <class Fn>
void run_members(int count, Fn&& fn) {
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (int m = 0; m < count; ++m) fn(m);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int m = next.fetch_add(1);
      if (m >= count || failed.load()) return;
      try {
        fn(m);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline JumpEnsemble reduce_rows(Eigen::MatrixXd rows, std::vector<int> starts,
                                JumpEnsemble::Source source,
                                const JumpConfig& jcfg) {
  const auto m = rows.rows();
  const auto n = rows.cols();
  JumpEnsemble ens;
  ens.source = source;
  ens.per_trajectory = std::move(rows);
  ens.initial_indices = std::move(starts);
  ens.jump_config = jcfg;
  ens.per_spin_avg = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < m; ++r)
    ens.per_spin_avg += ens.per_trajectory.row(r).transpose();
  ens.per_spin_avg /= static_cast<double>(m);
  ens.per_spin_stderr = Eigen::VectorXd::Zero(n);
  if (m > 1) {
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::VectorXd d =
          ens.per_trajectory.row(r).transpose() - ens.per_spin_avg;
      ens.per_spin_stderr += d.cwiseProduct(d);
    }
    ens.per_spin_stderr =
        (ens.per_spin_stderr / static_cast<double>(m - 1)).cwiseSqrt() /
        std::sqrt(static_cast<double>(m));
  }
  return ens;
}

}  // namespace detail

// Deterministic limit of infinitely slow jumps: evolve from every member of
// the class, time-average each run, and weight the members equally.
inline JumpEnsemble class_ensemble_average(const SpinSystem& sys,
                                           const HamiltonianMatrix& h,
                                           const DegeneracyClass& cls,
                                           const IntegratorConfig& cfg) {
  if (cls.members.empty())
    throw std::invalid_argument("class_ensemble_average: class is empty");
  const int n = sys.n_spins();
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(cls.members.size()), n);
  detail::run_members(static_cast<int>(cls.members.size()), [&](int m) {
    const auto member = static_cast<std::size_t>(m);
    const Trajectory traj =
        evolve(sys, h, basis_vector(cls.members[member], n), cfg);
    rows.row(m) = time_average(traj).per_spin_avg.transpose();
  });
  JumpConfig provenance;
  provenance.rate = 0.0;
  provenance.n_trajectories = static_cast<int>(cls.members.size());
  return detail::reduce_rows(std::move(rows), cls.members,
                             JumpEnsemble::Source::class_average, provenance);
}

inline JumpEnsemble class_ensemble_average(const SpinSystem& sys,
                                           const DegeneracyClass& cls,
                                           const IntegratorConfig& cfg) {
  return class_ensemble_average(sys, HamiltonianMatrix(sys), cls, cfg);
}

// Per-spin time averages of one stochastic jump trajectory from Phi_{v0}.
inline Eigen::VectorXd stochastic_jump_trajectory(const SpinSystem& sys,
                                                  int v0_index,
                                                  const JumpConfig& jcfg,
                                                  const IntegratorConfig& cfg) {
  const HamiltonianMatrix h(sys);
  return detail::stochastic_trajectory_averages(sys, h, v0_index, jcfg, cfg,
                                                /*stream=*/0);
}

// Ensemble of independent stochastic trajectories; member i uses the RNG
// stream (seed, i). Members run concurrently; the reduction is ordered, so
// results are reproducible for a fixed config and seed.
inline JumpEnsemble stochastic_jump_ensemble(const SpinSystem& sys,
                                             const HamiltonianMatrix& h,
                                             int v0_index,
                                             const JumpConfig& jcfg,
                                             const IntegratorConfig& cfg) {
  jcfg.validate();
  const int n = sys.n_spins();
  Eigen::MatrixXd rows(jcfg.n_trajectories, n);
  detail::run_members(jcfg.n_trajectories, [&](int m) {
    rows.row(m) = detail::stochastic_trajectory_averages(
                      sys, h, v0_index, jcfg, cfg,
                      static_cast<std::uint64_t>(m))
                      .transpose();
  });
  return detail::reduce_rows(
      std::move(rows),
      std::vector<int>(static_cast<std::size_t>(jcfg.n_trajectories), v0_index),
      JumpEnsemble::Source::stochastic, jcfg);
}

inline JumpEnsemble stochastic_jump_ensemble(const SpinSystem& sys,
                                             int v0_index,
                                             const JumpConfig& jcfg,
                                             const IntegratorConfig& cfg) {
  return stochastic_jump_ensemble(sys, HamiltonianMatrix(sys), v0_index, jcfg,
                                  cfg);
}

struct ThermalComparison {
  ThermalPrediction prediction;
  double fitted_mean = 0.0;       // mean of per-spin averages, input to the fit
  Eigen::VectorXd residuals;      // |avg_i - predicted_avg|
  double trace_value = 0.0;       // Tr(rho_i I_z^i) from the 2x2 exp form
  double trace_residual = 0.0;    // |trace_value - predicted_avg|
};

// Fits beta to the ensemble mean and cross-checks the closed form against a
// direct trace of the 2x2 density matrix.
inline ThermalComparison thermal_compare(const JumpEnsemble& ens, double omega) {
  ThermalComparison cmp;
  cmp.fitted_mean = ens.per_spin_avg.mean();
  cmp.prediction = fit_beta(cmp.fitted_mean, omega);
  cmp.residuals =
      (ens.per_spin_avg.array() - cmp.prediction.predicted_avg).abs();
  const double z = cmp.prediction.beta * omega / 2.0;
  const double a = 1.0 / (std::exp(-z) + std::exp(z));  // A = 1/(2 cosh z)
  cmp.trace_value = 0.5 * a * std::exp(-z) - 0.5 * a * std::exp(z);
  cmp.trace_residual = std::abs(cmp.trace_value - cmp.prediction.predicted_avg);
  return cmp;
}

// CSV export: "spin, avg, stderr, beta, predicted, residual".
inline void write_jump_report_csv(const JumpEnsemble& ens,
                                  const ThermalComparison& cmp,
                                  std::ostream& os,
                                  const std::string& header_comment = "") {
  if (!header_comment.empty()) os << header_comment;
  os << "spin, avg, stderr, beta, predicted, residual\n";
  char buf[160];
  for (Eigen::Index i = 0; i < ens.per_spin_avg.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld, %.17g, %.17g, %.17g, %.17g, %.17g\n",
                  static_cast<long long>(i + 1), ens.per_spin_avg(i),
                  ens.per_spin_stderr(i), cmp.prediction.beta,
                  cmp.prediction.predicted_avg, cmp.residuals(i));
    os << buf;
  }
}

}  // namespace spinsurf
