#include "levelstat/hamiltonian.hpp"

#include <string>
#include <utility>

#include "levelstat/error.hpp"
#include "levelstat/random.hpp"

namespace levelstat {

PotentialVector sample_potential(const PotentialDistribution& dist, std::uint64_t seed,
                                 std::uint64_t sample_index, std::size_t n_sites) {
  if (n_sites == 0) throw InvalidInput("sample_potential: n_sites must be >= 1");
  PotentialVector v;
  v.seed = seed;
  v.sample_index = sample_index;
  v.values.resize(n_sites);
  for (std::size_t x = 0; x < n_sites; ++x) {
    v.values[x] = dist.quantile(uniform01(seed, sample_index, static_cast<std::uint32_t>(x)));
  }
  return v;
}

Hamiltonian assemble_hamiltonian(const Eigen::MatrixXcd& hopping, PotentialVector potential) {
  const auto n = static_cast<Eigen::Index>(potential.values.size());
  if (hopping.rows() != n || hopping.cols() != n) {
    throw InvalidInput("assemble_hamiltonian: T is " + std::to_string(hopping.rows()) + "x" +
                       std::to_string(hopping.cols()) + " but V has " + std::to_string(n) +
                       " entries");
  }
  if (hopping != hopping.adjoint()) throw InvalidInput("assemble_hamiltonian: T is not Hermitian");
  Hamiltonian h;
  h.matrix = hopping;
  for (Eigen::Index x = 0; x < n; ++x) {
    h.matrix(x, x) = Complex(hopping(x, x).real() + potential.values[static_cast<std::size_t>(x)], 0.0);
  }
  h.potential = std::move(potential);
  return h;
}

Hamiltonian assemble_hamiltonian(const Eigen::MatrixXcd& hopping, const std::vector<double>& values) {
  PotentialVector v;
  v.values = values;
  return assemble_hamiltonian(hopping, std::move(v));
}

}  // namespace levelstat
