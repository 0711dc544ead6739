#pragma once

// Static problem definition: spin count, Zeeman frequency, pair couplings.
// Energy units have hbar = 1 throughout.

#include <stdexcept>
#include <string>
#include <vector>

#include "spinsurf/basis.hpp"

namespace spinsurf {

class SpinSystem {
 public:
  // Uniform coupling a_ij = a for every pair; per-pair values can be
  // overridden afterwards with set_coupling.
  SpinSystem(int n_spins, double omega, double uniform_coupling,
             bool include_double_quantum = true)
      : n_spins_(n_spins),
        omega_(omega),
        include_double_quantum_(include_double_quantum),
        couplings_(static_cast<std::size_t>(n_spins) * n_spins, 0.0) {
    basis_dim(n_spins);  // validates the range
    for (int i = 1; i <= n_spins_; ++i)
      for (int j = i + 1; j <= n_spins_; ++j)
        set_coupling(i, j, uniform_coupling);
  }

  int n_spins() const { return n_spins_; }
  int dim() const { return 1 << n_spins_; }
  double omega() const { return omega_; }
  bool include_double_quantum() const { return include_double_quantum_; }

  // Spins are 1-based; the pair (i, j) is unordered and i == j is invalid.
  void set_coupling(int i, int j, double a) {
    check_pair(i, j);
    couplings_[flat(i, j)] = a;
    couplings_[flat(j, i)] = a;
  }

  double coupling(int i, int j) const {
    check_pair(i, j);
    return couplings_[flat(i, j)];
  }

  bool uniform_coupling() const {
    const double a12 = couplings_[flat(1, 2)];
    for (int i = 1; i <= n_spins_; ++i)
      for (int j = i + 1; j <= n_spins_; ++j)
        if (couplings_[flat(i, j)] != a12) return false;
    return true;
  }

 private:
  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(i - 1) * n_spins_ + (j - 1);
  }

  void check_pair(int i, int j) const {
    if (i < 1 || i > n_spins_ || j < 1 || j > n_spins_)
      throw std::out_of_range("SpinSystem: spin pair (" + std::to_string(i) +
                              ", " + std::to_string(j) + ") outside 1.." +
                              std::to_string(n_spins_));
    if (i == j)
      throw std::invalid_argument(
          "SpinSystem: self-coupling a_ii is undefined (i = " +
          std::to_string(i) + ")");
  }

  int n_spins_;
  double omega_;
  bool include_double_quantum_;
  std::vector<double> couplings_;  // dense symmetric lookup, zero diagonal
};

}  // namespace spinsurf
