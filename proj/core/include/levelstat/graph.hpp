#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace levelstat {

using Complex = std::complex<double>;

enum class GraphKind { kChain, kTorus, kExplicit };

/// A directed declaration of one hopping amplitude. The reverse entry of T is
/// the complex conjugate and need not be listed.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  Complex weight{1.0, 0.0};
};

/// Finite site set Λ = {0, ..., n_sites-1} plus the off-diagonal structure of T.
struct GraphSpec {
  std::size_t n_sites = 0;
  std::vector<Edge> edges;
  GraphKind kind = GraphKind::kExplicit;

  /// Open (or periodic, n >= 3) nearest-neighbour chain.
  static GraphSpec chain(std::size_t n, double hopping = 1.0, bool periodic = false);
  /// nx-by-ny torus with nearest-neighbour hopping; site index is x + nx*y.
  static GraphSpec torus(std::size_t nx, std::size_t ny, double hopping = 1.0);
  static GraphSpec from_edges(std::size_t n, std::vector<Edge> edges);
};

/// Assembles T. Throws InvalidInput on self-loops, out-of-range sites, or a
/// pair declared in both directions with non-conjugate weights.
Eigen::MatrixXcd build_hopping(const GraphSpec& graph);

/// Validates the graph invariants without building T.
void validate(const GraphSpec& graph);

}  // namespace levelstat
