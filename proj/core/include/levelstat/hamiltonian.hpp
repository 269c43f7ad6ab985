#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "levelstat/distribution.hpp"
#include "levelstat/graph.hpp"

namespace levelstat {

/// One realization ω of the on-site potential.
struct PotentialVector {
  std::vector<double> values;
  std::uint64_t sample_index = 0;
  std::uint64_t seed = 0;
};

/// I.i.d. draws from `dist`, one per site. Value x is a pure function of
/// (seed, sample_index, x), so replaying an index is bit-exact.
[[nodiscard]] PotentialVector sample_potential(const PotentialDistribution& dist,
                                               std::uint64_t seed, std::uint64_t sample_index,
                                               std::size_t n_sites);

/// H = T + diag(V).
struct Hamiltonian {
  Eigen::MatrixXcd matrix;
  PotentialVector potential;

  [[nodiscard]] std::size_t n_sites() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Throws InvalidInput on a dimension mismatch or a non-Hermitian T.
[[nodiscard]] Hamiltonian assemble_hamiltonian(const Eigen::MatrixXcd& hopping,
                                               PotentialVector potential);

/// Convenience overload for a frozen, non-random potential.
[[nodiscard]] Hamiltonian assemble_hamiltonian(const Eigen::MatrixXcd& hopping,
                                               const std::vector<double>& values);

}  // namespace levelstat
