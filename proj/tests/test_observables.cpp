#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <sstream>

#include "spinsurf/observables.hpp"
#include "test_oracles.hpp"

using namespace spinsurf;

namespace {
const SpinSystem kPaper(3, 10.0, 1.0, true);
}

TEST_CASE("iz_expectation on basis states and superpositions") {
  const Eigen::VectorXcd phi2 = basis_vector(2, 3);
  CHECK(iz_expectation(phi2, 1, 3) == -0.5);
  CHECK(iz_expectation(phi2, 2, 3) == 0.5);
  CHECK(iz_expectation(phi2, 3, 3) == 0.5);

  const Eigen::VectorXcd mix =
      (basis_vector(2, 3) + basis_vector(3, 3)) / std::sqrt(2.0);
  CHECK(iz_expectation(mix, 1, 3) == 0.0);  // equal up/down weight

  CHECK_THROWS_AS(iz_expectation(phi2, 0, 3), std::out_of_range);
  CHECK_THROWS_AS(iz_expectation(phi2, 4, 3), std::out_of_range);
  CHECK_THROWS_AS(iz_expectation(Eigen::VectorXcd::Zero(4), 1, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(iz_expectation(2.0 * phi2, 1, 3), std::invalid_argument);
}

TEST_CASE("frozen diagonal dynamics gives exact time averages") {
  const SpinSystem sys(3, 10.0, 0.0, true);
  const Trajectory traj =
      evolve(sys, basis_vector(2, 3), IntegratorConfig{1e-3, 2.0, 10, 1e-6});
  const AverageReport avg = time_average(traj);
  // constant up to RK4's ~1e-13 modulus decay on the rotating mode
  CHECK(avg.per_spin_avg(0) == Catch::Approx(-0.5).margin(1e-12));
  CHECK(avg.per_spin_avg(1) == Catch::Approx(0.5).margin(1e-12));
  CHECK(avg.per_spin_avg(2) == Catch::Approx(0.5).margin(1e-12));
  CHECK(avg.method == AverageMethod::running_rk4);
  CHECK(avg.window_start == 0.0);
}

TEST_CASE("time_average windowing") {
  const Trajectory traj = evolve(kPaper, basis_vector(2, 3),
                                 IntegratorConfig{1e-3, 1.0, 100, 1e-6});
  SECTION("single-sample window returns that sample's instantaneous values") {
    const AverageReport avg = time_average(traj, traj.times.back());
    for (int i = 1; i <= 3; ++i)
      CHECK(avg.per_spin_avg(i - 1) ==
            iz_expectation(traj.states.back(), i, 3));
  }
  SECTION("empty window is an error") {
    CHECK_THROWS_AS(time_average(traj, traj.times.back() + 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("diagonal ensemble: frozen dynamics limit") {
  const SpinSystem sys(3, 10.0, 0.0, true);
  const AverageReport avg = diagonal_ensemble_average(sys, basis_vector(2, 3));
  CHECK(avg.per_spin_avg(0) == Catch::Approx(-0.5).margin(1e-12));
  CHECK(avg.per_spin_avg(1) == Catch::Approx(0.5).margin(1e-12));
  CHECK(avg.per_spin_avg(2) == Catch::Approx(0.5).margin(1e-12));
  CHECK(avg.method == AverageMethod::diagonal_ensemble);
}

TEST_CASE("diagonal ensemble: paper configuration closed form") {
  const AverageReport avg = diagonal_ensemble_average(kPaper, basis_vector(2, 3));
  const Eigen::Vector3d expected = testkit::paper_diagonal_ensemble();
  for (int i = 0; i < 3; ++i)
    CHECK(avg.per_spin_avg(i) == Catch::Approx(expected(i)).margin(1e-12));
  // frozen regression values
  CHECK(avg.per_spin_avg(0) == Catch::Approx(-0.059319375833).margin(1e-9));
  CHECK(avg.per_spin_avg(1) == Catch::Approx(0.2740139575).margin(1e-9));
  CHECK(avg.per_spin_avg(2) == Catch::Approx(0.2740139575).margin(1e-9));
}

TEST_CASE("diagonal ensemble without the double-quantum term is rational") {
  const SpinSystem sys(3, 10.0, 1.0, false);
  const AverageReport avg = diagonal_ensemble_average(sys, basis_vector(2, 3));
  CHECK(avg.per_spin_avg(0) == Catch::Approx(-1.0 / 18.0).margin(1e-12));
  CHECK(avg.per_spin_avg(1) == Catch::Approx(5.0 / 18.0).margin(1e-12));
  CHECK(avg.per_spin_avg(2) == Catch::Approx(5.0 / 18.0).margin(1e-12));
}

TEST_CASE("paper spectrum matches the hand-derived closed form") {
  const HamiltonianMatrix h(kPaper);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
  const auto expected = testkit::paper_spectrum();
  REQUIRE(solver.eigenvalues().size() == 8);
  for (int k = 0; k < 8; ++k)
    CHECK(solver.eigenvalues()(k) ==
          Catch::Approx(expected[static_cast<std::size_t>(k)]).margin(1e-12));
}

TEST_CASE("a stationary state averages to its instantaneous expectations") {
  const HamiltonianMatrix h(kPaper);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix());
  const Eigen::VectorXcd ground = solver.eigenvectors().col(0);  // nondegenerate
  const AverageReport diag = diagonal_ensemble_average(kPaper, h, ground);
  for (int i = 1; i <= 3; ++i)
    CHECK(diag.per_spin_avg(i - 1) ==
          Catch::Approx(iz_expectation(ground, i, 3)).margin(1e-12));
  // and the time series is constant
  const Trajectory traj =
      evolve(kPaper, h, ground, IntegratorConfig{1e-3, 2.0, 100, 1e-6});
  for (const auto& state : traj.states)
    for (int i = 1; i <= 3; ++i)
      CHECK(iz_expectation(state, i, 3) ==
            Catch::Approx(iz_expectation(ground, i, 3)).margin(1e-9));
}

TEST_CASE("total Iz is conserved without the double-quantum term") {
  const SpinSystem sys(3, 10.0, 1.0, false);
  const Trajectory traj =
      evolve(sys, basis_vector(2, 3), IntegratorConfig{1e-3, 20.0, 10, 1e-6});
  const SpinExpectationSeries series = iz_series(traj);
  const double total0 = series.values.row(0).sum();
  CHECK(total0 == 0.5);
  double worst = 0.0;
  for (Eigen::Index s = 0; s < series.values.rows(); ++s)
    worst = std::max(worst, std::abs(series.values.row(s).sum() - total0));
  CHECK(worst < 1e-10);
}

TEST_CASE("the double-quantum term visibly breaks total-Iz conservation") {
  const Trajectory traj = evolve(kPaper, basis_vector(2, 3),
                                 IntegratorConfig{1e-3, 20.0, 10, 1e-6});
  const SpinExpectationSeries series = iz_series(traj);
  double lo = 1e9, hi = -1e9;
  for (Eigen::Index s = 0; s < series.values.rows(); ++s) {
    const double total = series.values.row(s).sum();
    lo = std::min(lo, total);
    hi = std::max(hi, total);
  }
  CHECK(hi - lo > 0.01);
  // while the energy stays put
  CHECK(traj.max_energy_drift() < 1e-9 * 18.75);
}

TEST_CASE("swapping spins 2 and 3 in the initial state swaps the averages") {
  const IntegratorConfig cfg{1e-3, 20.0, 10, 1e-6};
  const AverageReport from3 = time_average(evolve(kPaper, basis_vector(3, 3), cfg));
  const AverageReport from5 = time_average(evolve(kPaper, basis_vector(5, 3), cfg));
  // Phi_3 = (+,-,+) and Phi_5 = (+,+,-) are images of one another under the
  // 2<->3 relabeling; IEEE summation order costs a few ulp.
  CHECK(std::abs(from5.per_spin_avg(0) - from3.per_spin_avg(0)) < 1e-12);
  CHECK(std::abs(from5.per_spin_avg(1) - from3.per_spin_avg(2)) < 1e-12);
  CHECK(std::abs(from5.per_spin_avg(2) - from3.per_spin_avg(1)) < 1e-12);

  // Phi_2 is itself 2<->3 symmetric, so one run reports equal averages.
  const AverageReport from2 = time_average(evolve(kPaper, basis_vector(2, 3), cfg));
  CHECK(std::abs(from2.per_spin_avg(1) - from2.per_spin_avg(2)) < 1e-9);
}

TEST_CASE("energy_and_norm series") {
  const Trajectory traj = evolve(kPaper, basis_vector(2, 3),
                                 IntegratorConfig{1e-3, 1.0, 100, 1e-6});
  const ConservationSeries cons = energy_and_norm(traj);
  REQUIRE(cons.times.size() == traj.size());
  CHECK(cons.energies.front() == Catch::Approx(4.75).margin(1e-13));
  for (double n : cons.norms) CHECK(std::abs(n - 1.0) < 1e-8);
  for (double e : cons.energies)
    CHECK(std::abs(e - cons.energies.front()) < 1e-8 * 18.75);
}

TEST_CASE("observables CSV layout") {
  const Trajectory traj = evolve(kPaper, basis_vector(2, 3),
                                 IntegratorConfig{1e-3, 0.01, 10, 1e-6});
  std::ostringstream os;
  write_observables_csv(iz_series(traj), os, "# hdr\n");
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# hdr");
  std::getline(in, line);
  CHECK(line == "t, Iz1, Iz2, Iz3");
  std::getline(in, line);
  std::istringstream row(line);
  std::string field;
  std::getline(row, field, ',');
  CHECK(std::stod(field) == 0.0);
  std::getline(row, field, ',');
  CHECK(std::stod(field) == -0.5);
}
