#pragma once

// Dense matrix of H = H_z + H_d + P on the product basis.
//
//   H_z = omega sum_i I_z^i                                  (diagonal)
//   H_d = sum_{i<j} a_ij [I_z^i I_z^j
//            - 1/4 (I_+^i I_-^j + I_-^i I_+^j)]              (flip-flop)
//   P   = sum_{i<j} a_ij [I_+^i I_+^j + I_-^i I_-^j]         (double quantum)
//
// Spin-1/2 ladder convention: I_+|-1/2> = |+1/2>, I_-|+1/2> = |-1/2>, both
// with coefficient 1, and I_+|+1/2> = I_-|-1/2> = 0. Matrix elements:
//   <k|H|k>   = omega M(k) + sum_{i<j} a_ij m_i(k) m_j(k)
//   <l|H_d|k> = -a_ij/4   if l is k with an antiparallel pair (i,j) exchanged
//   <l|P|k>   =  a_ij     if l is k with a parallel pair (i,j) jointly flipped
//
// All couplings are real, so H is real symmetric; it is stored as a complex
// matrix to keep the Hermitian contract explicit.

#include <Eigen/Dense>
#include <complex>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "spinsurf/basis.hpp"
#include "spinsurf/system.hpp"

namespace spinsurf {

inline bool is_hermitian(const Eigen::MatrixXcd& m, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_hermitian: tol must be >= 0");
  if (m.rows() != m.cols()) return false;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c <= r; ++c)
      worst = std::max(worst, std::abs(m(r, c) - std::conj(m(c, r))));
  return worst <= tol;
}

class HamiltonianMatrix {
 public:
  explicit HamiltonianMatrix(const SpinSystem& sys)
      : n_spins_(sys.n_spins()),
        matrix_(Eigen::MatrixXcd::Zero(sys.dim(), sys.dim())) {
    const int n = sys.n_spins();
    const int dim = sys.dim();
    const auto mask = static_cast<std::uint32_t>(dim - 1);
    for (int slot = 0; slot < dim; ++slot) {
      const std::uint32_t pattern = static_cast<std::uint32_t>(slot) ^ mask;
      const BasisState state(pattern, n);
      double diag = sys.omega() * state.m_total();
      for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
          const double a = sys.coupling(i, j);
          diag += a * state.m(i) * state.m(j);
          const std::uint32_t pair_mask =
              (1u << (i - 1)) | (1u << (j - 1));
          const int partner =
              static_cast<int>((pattern ^ pair_mask) ^ mask);  // partner slot
          if (state.up(i) != state.up(j)) {
            matrix_(partner, slot) += std::complex<double>(-0.25 * a, 0.0);
          } else if (sys.include_double_quantum()) {
            matrix_(partner, slot) += std::complex<double>(a, 0.0);
          }
        }
      }
      matrix_(slot, slot) = diag;
    }
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  int n_spins() const { return n_spins_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  // Element <Phi_k|H|Phi_l> by 1-based basis indices.
  std::complex<double> element(int k, int l) const {
    return matrix_(BasisState::from_index(k, n_spins_).slot(),
                   BasisState::from_index(l, n_spins_).slot());
  }

  double diagonal_energy(int k) const {
    return matrix_(BasisState::from_index(k, n_spins_).slot(),
                   BasisState::from_index(k, n_spins_).slot())
        .real();
  }

  // H * v. The result is a derivative ingredient, not a normalized state.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const {
    if (v.size() != matrix_.rows())
      throw std::invalid_argument(
          "HamiltonianMatrix::apply: vector length " +
          std::to_string(v.size()) + " does not match dimension " +
          std::to_string(matrix_.rows()));
    return matrix_ * v;
  }

  bool is_hermitian(double tol) const { return spinsurf::is_hermitian(matrix_, tol); }

  // Cheap upper bound on the spectral radius (max row sum of |H_nm|), used
  // by the dt * |H| <= 0.05 step-size guard.
  double max_row_sum() const {
    return matrix_.cwiseAbs().rowwise().sum().maxCoeff();
  }

  // One nonzero per line: "row col real imag" with 1-based basis indices and
  // 17-significant-digit decimals.
  void write_nonzeros(std::ostream& os) const {
    const int d = dim();
    char buf[128];
    for (int ks = 0; ks < d; ++ks) {
      for (int ls = 0; ls < d; ++ls) {
        const std::complex<double> z = matrix_(ks, ls);
        if (z == std::complex<double>(0.0, 0.0)) continue;
        std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", ks + 1, ls + 1,
                      z.real(), z.imag());
        os << buf;
      }
    }
  }

 private:
  int n_spins_;
  Eigen::MatrixXcd matrix_;
};

}  // namespace spinsurf
