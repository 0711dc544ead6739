// Acceptance suite: end-to-end checks of the reproduction targets, printed
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spinsurf/spinsurf.hpp"

using namespace spinsurf;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& name, bool ok,
               const std::string& detail) {
  std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", id,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string cli_binary() {
  const char* env = std::getenv("SPINSURF_BIN");
  if (env != nullptr && fs::exists(env)) return env;
  for (const char* guess :
       {"./tools/spinsurf", "../tools/spinsurf", "build/tools/spinsurf"})
    if (fs::exists(guess)) return guess;
  return {};
}

}  // namespace

int main() {
  const auto t_total = std::chrono::steady_clock::now();

  // Paper configuration: N = 3, omega = 10, a = 1, start in Phi_2, H includes
  // the double-quantum term.
  const SpinSystem paper(3, 10.0, 1.0, true);
  const HamiltonianMatrix h(paper);
  const Eigen::VectorXcd phi2 = basis_vector(2, 3);
  const IntegratorConfig run_cfg{1e-3, 1000.0, 10, 1e-6};

  // ----- criterion 1: paper averages ---------------------------------------
  auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = evolve(paper, h, phi2, run_cfg);
  const AverageReport avg = time_average(traj);
  const double c1_elapsed = seconds_since(t0);
  {
    const bool ok = std::abs(avg.per_spin_avg(0) - (-0.06)) <= 0.02 &&
                    std::abs(avg.per_spin_avg(1) - 0.27) <= 0.02 &&
                    std::abs(avg.per_spin_avg(2) - 0.27) <= 0.02 &&
                    std::abs(avg.per_spin_avg(1) - avg.per_spin_avg(2)) <= 1e-3;
    criterion(1, "paper averages (-0.06, 0.27, 0.27) +/- 0.02", ok,
              fmt("got (%.5f, %.5f, %.5f), |spin2-spin3| = %.2e, %.1f s",
                  avg.per_spin_avg(0), avg.per_spin_avg(1), avg.per_spin_avg(2),
                  std::abs(avg.per_spin_avg(1) - avg.per_spin_avg(2)),
                  c1_elapsed));
  }

  // ----- criterion 2: jump (class ensemble) average -------------------------
  {
    const auto classes = degeneracy_classes(h, default_degeneracy_tol(h));
    const DegeneracyClass& cls =
        classes[static_cast<std::size_t>(class_of(classes, 2))];
    const JumpEnsemble ens = class_ensemble_average(paper, cls, run_cfg);
    const double mean_of_c1 = avg.per_spin_avg.mean();
    bool ok = cls.members == std::vector<int>{2, 3, 5};
    double worst_vs_016 = 0.0, worst_vs_mean = 0.0;
    for (int i = 0; i < 3; ++i) {
      worst_vs_016 = std::max(worst_vs_016, std::abs(ens.per_spin_avg(i) - 0.16));
      worst_vs_mean =
          std::max(worst_vs_mean, std::abs(ens.per_spin_avg(i) - mean_of_c1));
    }
    ok = ok && worst_vs_016 <= 0.02 && worst_vs_mean <= 1e-6;
    criterion(2, "class ensemble over {Phi2, Phi3, Phi5} = 0.16 +/- 0.02", ok,
              fmt("got (%.5f, %.5f, %.5f), max |dev from 0.16| = %.2e, "
                  "max |dev from criterion-1 mean| = %.2e",
                  ens.per_spin_avg(0), ens.per_spin_avg(1), ens.per_spin_avg(2),
                  worst_vs_016, worst_vs_mean));
  }

  // ----- criterion 3: thermal closure ---------------------------------------
  {
    const ThermalPrediction p = fit_beta(0.16, 10.0);
    JumpEnsemble flat;
    flat.per_spin_avg = Eigen::Vector3d(0.16, 0.16, 0.16);
    flat.per_spin_stderr = Eigen::Vector3d::Zero();
    const ThermalComparison cmp = thermal_compare(flat, 10.0);
    const double round_trip = std::abs(p.predicted_avg - 0.16);
    const bool ok = round_trip <= 1e-12 && cmp.trace_residual <= 1e-12;
    criterion(3, "thermal closure through the beta fit", ok,
              fmt("beta = %.10g, round trip = %.2e, trace residual = %.2e",
                  p.beta, round_trip, cmp.trace_residual));
  }

  // ----- criterion 4: conservation over the criterion-1 run -----------------
  {
    const double h_scale = h.max_row_sum();
    const double norm_drift = traj.max_norm_drift();
    const double energy_drift = traj.max_energy_drift();
    const bool ok = norm_drift <= 1e-8 && energy_drift <= 1e-8 * h_scale;
    criterion(4, "norm drift <= 1e-8 and energy drift <= 1e-8 |H|", ok,
              fmt("norm drift = %.2e, energy drift = %.2e (budget %.2e)",
                  norm_drift, energy_drift, 1e-8 * h_scale));
  }

  // ----- criterion 5: diagonal-ensemble oracle equivalence ------------------
  {
    const AverageReport diag = diagonal_ensemble_average(paper, h, phi2);
    const double d1000 =
        (avg.per_spin_avg - diag.per_spin_avg).cwiseAbs().maxCoeff();
    const Trajectory traj8k =
        evolve(paper, h, phi2, IntegratorConfig{1e-3, 8000.0, 100, 1e-6});
    const AverageReport avg8k = time_average(traj8k);
    const double d8000 =
        (avg8k.per_spin_avg - diag.per_spin_avg).cwiseAbs().maxCoeff();
    const bool ok = d1000 <= 1e-2 && d8000 <= 3e-3;
    criterion(5, "RK4 averages converge to the diagonal ensemble", ok,
              fmt("max dev: %.2e at t_end = 1000 (budget 1e-2), %.2e at "
                  "t_end = 8000 (budget 3e-3)",
                  d1000, d8000));
  }

  // ----- criterion 6: dynamical confinement, not disconnection --------------
  {
    const auto overlaps = max_overlap_scan(traj, {3, 5});
    const double o3 = overlaps.at(3), o5 = overlaps.at(5);
    const Trajectory traj_half =
        evolve(paper, h, phi2, IntegratorConfig{5e-4, 1000.0, 20, 1e-6});
    const double o3_half = max_overlap_scan(traj_half, {3}).at(3);
    const double edge = std::abs(h.element(3, 2));
    const bool ok = o3 < 0.99 && o5 < 0.99 && std::abs(o3 - o5) <= 1e-6 &&
                    std::abs(o3 - o3_half) <= 1e-4 && edge == 0.25;
    criterion(6, "Phi3/Phi5 stay unreached despite a direct a/4 edge", ok,
              fmt("max|C3|^2 = %.6f, max|C5|^2 = %.6f, |diff| = %.2e, "
                  "dt-halving shift = %.2e, |<Phi3|H|Phi2>| = %.3g",
                  o3, o5, std::abs(o3 - o5), std::abs(o3 - o3_half), edge));
  }

  // ----- criterion 7: symmetry and conservation properties ------------------
  {
    // (a) total Iz conservation without the double-quantum term
    const SpinSystem no_dq(3, 10.0, 1.0, false);
    const Trajectory traj_no_dq =
        evolve(no_dq, basis_vector(2, 3), run_cfg);
    const SpinExpectationSeries series = iz_series(traj_no_dq);
    double iz_drift = 0.0;
    const double total0 = series.values.row(0).sum();
    for (Eigen::Index s = 0; s < series.values.rows(); ++s)
      iz_drift =
          std::max(iz_drift, std::abs(series.values.row(s).sum() - total0));

    // (b) spin relabeling conjugates H exactly (couplings on a dyadic grid
    // keep all sums exact), and permutes trajectory averages at the
    // floating-point reordering level
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> quarter(-8, 8);
    double h_perm_dev = 0.0;
    for (int n : {3, 4, 5, 6}) {
      SpinSystem sys(n, 0.25 * quarter(rng), 0.0, true);
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
          sys.set_coupling(i, j, 0.25 * quarter(rng));
      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 1);
      std::shuffle(perm.begin(), perm.end(), rng);
      SpinSystem relabeled(n, sys.omega(), 0.0, true);
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
          relabeled.set_coupling(perm[static_cast<std::size_t>(i - 1)],
                                 perm[static_cast<std::size_t>(j - 1)],
                                 sys.coupling(i, j));
      const HamiltonianMatrix ha(sys), hb(relabeled);
      auto slot_map = [&](int slot) {
        int out = 0;
        for (int i = 1; i <= n; ++i)
          if (slot & (1 << (i - 1)))
            out |= 1 << (perm[static_cast<std::size_t>(i - 1)] - 1);
        return out;
      };
      for (int r = 0; r < sys.dim(); ++r)
        for (int c = 0; c < sys.dim(); ++c)
          h_perm_dev = std::max(
              h_perm_dev, std::abs(hb.matrix()(slot_map(r), slot_map(c)) -
                                   ha.matrix()(r, c)));
    }
    // trajectory level: Phi_3 and Phi_5 runs are 2<->3 images of each other
    const AverageReport from3 = time_average(evolve(paper, h, basis_vector(3, 3), run_cfg));
    const AverageReport from5 = time_average(evolve(paper, h, basis_vector(5, 3), run_cfg));
    const double traj_perm_dev = std::max(
        {std::abs(from5.per_spin_avg(0) - from3.per_spin_avg(0)),
         std::abs(from5.per_spin_avg(1) - from3.per_spin_avg(2)),
         std::abs(from5.per_spin_avg(2) - from3.per_spin_avg(1))});

    // (c) RK4 order: halving dt against a dt/16 reference
    auto end_state = [&](double dt) {
      return evolve(paper, h, phi2, IntegratorConfig{dt, 2.0, 200, 1e-3})
          .states.back();
    };
    const Eigen::VectorXcd ref = end_state(0.01 / 16.0);
    const double ratio = (end_state(0.01) - ref).norm() /
                         (end_state(0.005) - ref).norm();

    const bool ok = iz_drift <= 1e-10 && h_perm_dev == 0.0 &&
                    traj_perm_dev <= 1e-12 && ratio >= 12.0 && ratio <= 20.0;
    criterion(7, "conservation and symmetry properties", ok,
              fmt("total-Iz drift = %.2e, H permutation dev = %.2e (exact), "
                  "trajectory permutation dev = %.2e, RK4 order ratio = %.2f",
                  iz_drift, h_perm_dev, traj_perm_dev, ratio));
  }

  // ----- criterion 8: scaling runs N = 4, 6, 8 ------------------------------
  {
    struct ScalingCase {
      int n;
      IntegratorConfig cfg;
    };
    const ScalingCase cases[] = {
        {4, {1e-3, 100.0, 25, 1e-6}},
        {6, {1e-3, 50.0, 25, 1e-6}},
        {8, {5e-4, 30.0, 50, 1e-6}},
    };
    bool ok = true;
    std::string detail;
    for (const auto& c : cases) {
      const auto t_scale = std::chrono::steady_clock::now();
      const SpinSystem sys(c.n, 10.0, 1.0, true);
      const SeparabilityReport rep = separability_report(sys, 2, c.cfg);
      const double elapsed = seconds_since(t_scale);
      const double spread =
          rep.per_spin_avg.maxCoeff() - rep.per_spin_avg.minCoeff();
      const bool this_ok = spread > 0.1 && (c.n != 8 || elapsed < 60.0);
      ok = ok && this_ok;
      detail += fmt("N=%d: spread %.3f, %.1f s; ", c.n, spread, elapsed);
    }
    criterion(8, "scaling runs complete with unequal per-spin averages", ok,
              detail);
  }

  // ----- criterion 9: byte-identical outputs --------------------------------
  {
    const std::string bin = cli_binary();
    bool ok = !bin.empty();
    std::string detail;
    if (!ok) {
      detail = "spinsurf binary not found (set SPINSURF_BIN)";
    } else {
      const fs::path dir =
          fs::temp_directory_path() / "spinsurf_acceptance" / "determinism";
      fs::remove_all(dir);
      fs::create_directories(dir);
      {
        std::ofstream cfg(dir / "run.cfg");
        cfg << "n = 3\nomega = 10\na = 1\ninitial_index = 2\n"
               "dt = 1e-3\nt_end = 20\nrecord_stride = 10\n"
               "write_trajectory = true\n"
               "jump_rate = 0.05\nn_trajectories = 3\nseed = 7\n";
      }
      auto run = [&](const std::string& command, const std::string& out) {
        const std::string cmd = bin + " --config " + (dir / "run.cfg").string() +
                                " --command " + command + " --out " +
                                (dir / out).string() + " > /dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str())) == 0;
      };
      ok = run("evolve", "e1") && run("evolve", "e2") && run("jumps", "j1") &&
           run("jumps", "j2");
      int files_compared = 0;
      if (ok) {
        for (const char* name : {"observables.csv", "diagnostics.csv",
                                 "averages.csv", "trajectory.csv"}) {
          const std::string a = slurp(dir / "e1" / name);
          ok = ok && !a.empty() && a == slurp(dir / "e2" / name);
          ++files_compared;
        }
        for (const char* name :
             {"jumps.csv", "jumps_stochastic.csv", "jumps.txt"}) {
          const std::string a = slurp(dir / "j1" / name);
          ok = ok && !a.empty() && a == slurp(dir / "j2" / name);
          ++files_compared;
        }
      }
      detail = fmt("%d files byte-compared across repeated evolve and "
                   "stochastic jumps runs",
                   files_compared);
    }
    criterion(9, "identical config and seed give byte-identical outputs", ok,
              detail);
  }

  std::printf("%s: %d of 9 criteria passed (%.1f s total)\n",
              g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              9 - g_failures, seconds_since(t_total));
  return g_failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
