#pragma once

// Product basis of single-spin I_z eigenstates for N spin-1/2 particles.
//
// Conventions (fixed across the whole library):
//   * A basis state is an N-bit word. Bit i-1 set means spin i has m = +1/2,
//     clear means m = -1/2. Spin 1 is the least significant bit.
//   * Basis states carry a 1-based index k in 1..2^N, ordered so that k = 1 is
//     all spins up and k = 2^N is all spins down, with spin 1 varying fastest:
//     k = 1 + sum_i (1 - bit_i) 2^(i-1). Equivalently pattern = slot XOR mask
//     with slot = k - 1 and mask = 2^N - 1.
//   * Vectors and matrices are stored by slot (0-based index k - 1).

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "spinsurf/errors.hpp"

namespace spinsurf {

inline constexpr int max_spins = 14;  // dense-matrix ceiling: 2^14 x 2^14

inline int basis_dim(int n_spins) {
  if (n_spins < 2 || n_spins > max_spins)
    throw std::out_of_range("basis_dim: spin count must be in [2, " +
                            std::to_string(max_spins) + "], got " +
                            std::to_string(n_spins));
  return 1 << n_spins;
}

class BasisState {
 public:
  BasisState(std::uint32_t bits, int n_spins)
      : bits_(bits), n_spins_(n_spins) {
    const auto dim = static_cast<std::uint32_t>(basis_dim(n_spins));
    if (bits >= dim)
      throw std::out_of_range("BasisState: bit pattern " +
                              std::to_string(bits) + " out of range for " +
                              std::to_string(n_spins) + " spins");
  }

  // 1-based basis index k in 1..2^N.
  static BasisState from_index(int k, int n_spins) {
    const int dim = basis_dim(n_spins);
    if (k < 1 || k > dim)
      throw std::out_of_range("BasisState: index " + std::to_string(k) +
                              " outside 1.." + std::to_string(dim));
    const auto mask = static_cast<std::uint32_t>(dim - 1);
    return BasisState(static_cast<std::uint32_t>(k - 1) ^ mask, n_spins);
  }

  // 0-based storage slot (= index - 1).
  static BasisState from_slot(int slot, int n_spins) {
    return from_index(slot + 1, n_spins);
  }

  int index() const {
    const auto mask = static_cast<std::uint32_t>((1u << n_spins_) - 1);
    return static_cast<int>((bits_ ^ mask) + 1);
  }

  int slot() const { return index() - 1; }

  int n_spins() const { return n_spins_; }
  std::uint32_t bits() const { return bits_; }

  // spin is 1-based in 1..N.
  bool up(int spin) const {
    check_spin(spin);
    return (bits_ >> (spin - 1)) & 1u;
  }

  // Magnetic quantum number of one spin, +1/2 or -1/2.
  double m(int spin) const { return up(spin) ? 0.5 : -0.5; }

  // Total magnetic quantum number M = sum_i m_i.
  double m_total() const {
    const int ups = std::popcount(bits_);
    return 0.5 * (2 * ups - n_spins_);
  }

  BasisState flipped(int spin) const {
    check_spin(spin);
    return BasisState(bits_ ^ (1u << (spin - 1)), n_spins_);
  }

  // Spin 1 first, '+' for m = +1/2, '-' for m = -1/2. E.g. "-++" has spin 1
  // down and spins 2, 3 up.
  std::string to_string() const {
    std::string s(static_cast<std::size_t>(n_spins_), '-');
    for (int i = 1; i <= n_spins_; ++i)
      if (up(i)) s[static_cast<std::size_t>(i - 1)] = '+';
    return s;
  }

  friend bool operator==(const BasisState&, const BasisState&) = default;

 private:
  void check_spin(int spin) const {
    if (spin < 1 || spin > n_spins_)
      throw std::out_of_range("BasisState: spin " + std::to_string(spin) +
                              " outside 1.." + std::to_string(n_spins_));
  }

  std::uint32_t bits_;
  int n_spins_;
};

}  // namespace spinsurf
