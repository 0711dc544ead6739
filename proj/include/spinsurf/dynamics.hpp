#pragma once

// Fixed-step classical fourth-order Runge-Kutta integration of the
// coefficient equation i dC/dt = H C, i.e. dC/dt = -i H C.
//
// No renormalization is ever applied mid-run: norm and energy drift are
// diagnostics, and the integrator aborts if the norm leaves its budget.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spinsurf/errors.hpp"
#include "spinsurf/hamiltonian.hpp"
#include "spinsurf/system.hpp"

namespace spinsurf {

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 1000.0;
  int record_stride = 1;       // record every k-th step
  double norm_abort_tol = 1e-6;  // abort when | ||C||^2 - 1 | exceeds this

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("IntegratorConfig: dt must be > 0");
    if (!(t_end >= 0.0))
      throw std::invalid_argument("IntegratorConfig: t_end must be >= 0");
    if (record_stride < 1)
      throw std::invalid_argument("IntegratorConfig: record_stride must be >= 1");
    if (!(norm_abort_tol > 0.0))
      throw std::invalid_argument("IntegratorConfig: norm_abort_tol must be > 0");
  }

  long long n_steps() const { return static_cast<long long>(std::llround(t_end / dt)); }
};

// Advisory accuracy guard: keep dt * max_row_sum(H) at or below this.
inline constexpr double recommended_dt_h_product = 0.05;

inline double recommended_max_dt(const HamiltonianMatrix& h) {
  const double bound = h.max_row_sum();
  return bound > 0.0 ? recommended_dt_h_product / bound : 1.0;
}

// Basis vector e_k (1-based index) as a normalized amplitude vector.
inline Eigen::VectorXcd basis_vector(int k, int n_spins) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis_dim(n_spins));
  v(BasisState::from_index(k, n_spins).slot()) = std::complex<double>(1.0, 0.0);
  return v;
}

namespace detail {

// Workspace for one RK4 step; reused across steps so the hot loop does not
// allocate. rk4_step and the drive loop below share this exact arithmetic.
struct Rk4Workspace {
  Eigen::VectorXcd k1, k2, k3, k4, stage, hv;

  void resize(Eigen::Index n) {
    k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n);
    stage.resize(n); hv.resize(n);
  }

  void step(const Eigen::MatrixXcd& h, Eigen::VectorXcd& v, double dt) {
    const std::complex<double> minus_i(0.0, -1.0);
    hv.noalias() = h * v;
    k1 = minus_i * hv;
    stage = v + (0.5 * dt) * k1;
    hv.noalias() = h * stage;
    k2 = minus_i * hv;
    stage = v + (0.5 * dt) * k2;
    hv.noalias() = h * stage;
    k3 = minus_i * hv;
    stage = v + dt * k3;
    hv.noalias() = h * stage;
    k4 = minus_i * hv;
    v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

// Shared fixed-step driver.
//
// For s = 0..n_steps: at every s divisible by record_stride (always
// including s = 0) calls on_sample(t, v) after checking the norm budget;
// then, unless s == n_steps, calls before_step(t, v) (the jump hook) and
// advances one RK4 step. Sample times are s * dt, never accumulated sums.
template <class SampleFn, class BeforeStepFn>
void rk4_drive(const HamiltonianMatrix& h, Eigen::VectorXcd& v,
               const IntegratorConfig& cfg, SampleFn&& on_sample,
               BeforeStepFn&& before_step) {
  cfg.validate();
  if (v.size() != h.dim())
    throw std::invalid_argument("rk4_drive: state dimension " +
                                std::to_string(v.size()) +
                                " does not match Hamiltonian dimension " +
                                std::to_string(h.dim()));
  const long long n_steps = cfg.n_steps();
  Rk4Workspace ws;
  ws.resize(v.size());
  for (long long s = 0;; ++s) {
    const double t = static_cast<double>(s) * cfg.dt;
    if (s % cfg.record_stride == 0 || s == n_steps) {
      const double drift = std::abs(v.squaredNorm() - 1.0);
      if (!(drift <= cfg.norm_abort_tol))
        throw IntegrationError(
            "integration diverged: norm drift " + std::to_string(drift) +
                " exceeds " + std::to_string(cfg.norm_abort_tol) + " at t = " +
                std::to_string(t),
            t);
      if (s % cfg.record_stride == 0) on_sample(t, v);
    }
    if (s == n_steps) break;
    before_step(t, v);
    ws.step(h.matrix(), v, cfg.dt);
  }
}

inline void require_normalized(const Eigen::VectorXcd& v0, double tol) {
  if (std::abs(v0.norm() - 1.0) > tol) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "initial state must be normalized to 1 within %.3g "
                  "(|norm - 1| = %.3g)",
                  tol, std::abs(v0.norm() - 1.0));
    throw std::invalid_argument(buf);
  }
}

}  // namespace detail

// One classical RK4 step of dC/dt = -i H C. No renormalization.
inline Eigen::VectorXcd rk4_step(const HamiltonianMatrix& h,
                                 const Eigen::VectorXcd& v, double dt) {
  if (v.size() != h.dim())
    throw std::invalid_argument("rk4_step: dimension mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be > 0");
  detail::Rk4Workspace ws;
  ws.resize(v.size());
  Eigen::VectorXcd out = v;
  ws.step(h.matrix(), out, dt);
  if (!out.allFinite())
    throw NumericError("rk4_step: non-finite amplitudes after step");
  return out;
}

// Time series of amplitude snapshots plus norm/energy diagnostics, with the
// inputs that produced it.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  std::vector<double> norms;     // ||C|| at each snapshot
  std::vector<double> energies;  // <C|H|C> at each snapshot
  SpinSystem system;
  IntegratorConfig config;
  Eigen::VectorXcd initial_state;

  std::size_t size() const { return times.size(); }
  int dim() const { return static_cast<int>(initial_state.size()); }

  double max_norm_drift() const {
    double worst = 0.0;
    for (double n : norms) worst = std::max(worst, std::abs(n * n - 1.0));
    return worst;
  }

  double max_energy_drift() const {
    if (energies.empty()) return 0.0;
    double worst = 0.0;
    for (double e : energies) worst = std::max(worst, std::abs(e - energies.front()));
    return worst;
  }
};

inline Trajectory evolve(const SpinSystem& sys, const HamiltonianMatrix& h,
                         const Eigen::VectorXcd& v0,
                         const IntegratorConfig& cfg) {
  cfg.validate();
  detail::require_normalized(v0, 1e-12);
  Trajectory traj{{}, {}, {}, {}, sys, cfg, v0};
  const long long n_samples = cfg.n_steps() / cfg.record_stride + 1;
  traj.times.reserve(n_samples);
  traj.states.reserve(n_samples);
  traj.norms.reserve(n_samples);
  traj.energies.reserve(n_samples);
  Eigen::VectorXcd v = v0;
  Eigen::VectorXcd hv(v.size());
  detail::rk4_drive(
      h, v, cfg,
      [&](double t, const Eigen::VectorXcd& state) {
        traj.times.push_back(t);
        traj.states.push_back(state);
        traj.norms.push_back(state.norm());
        hv.noalias() = h.matrix() * state;
        traj.energies.push_back(state.dot(hv).real());
      },
      [](double, Eigen::VectorXcd&) {});
  return traj;
}

inline Trajectory evolve(const SpinSystem& sys, const Eigen::VectorXcd& v0,
                         const IntegratorConfig& cfg) {
  return evolve(sys, HamiltonianMatrix(sys), v0, cfg);
}

// CSV export: "t, re_C1, im_C1, ..., norm, energy" with 17-significant-digit
// decimals and LF line endings. header_comment lines are emitted verbatim
// before the column header.
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os,
                                 const std::string& header_comment = "") {
  if (!header_comment.empty()) os << header_comment;
  os << "t";
  for (int k = 1; k <= traj.dim(); ++k)
    os << ", re_C" << k << ", im_C" << k;
  os << ", norm, energy\n";
  char buf[64];
  for (std::size_t s = 0; s < traj.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[s]);
    os << buf;
    for (int slot = 0; slot < traj.dim(); ++slot) {
      const std::complex<double> c = traj.states[s](slot);
      std::snprintf(buf, sizeof buf, ", %.17g, %.17g", c.real(), c.imag());
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ", %.17g, %.17g\n", traj.norms[s],
                  traj.energies[s]);
    os << buf;
  }
}

}  // namespace spinsurf
