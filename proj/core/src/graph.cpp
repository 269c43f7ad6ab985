#include "levelstat/graph.hpp"

#include <string>
#include <utility>

#include "levelstat/error.hpp"

namespace levelstat {

GraphSpec GraphSpec::chain(std::size_t n, double hopping, bool periodic) {
  if (n == 0) throw InvalidInput("chain: n_sites must be positive");
  if (periodic && n < 3) throw InvalidInput("chain: periodic chain needs at least 3 sites");
  GraphSpec g;
  g.n_sites = n;
  g.kind = GraphKind::kChain;
  for (std::size_t x = 0; x + 1 < n; ++x) g.edges.push_back({x, x + 1, {hopping, 0.0}});
  if (periodic) g.edges.push_back({n - 1, 0, {hopping, 0.0}});
  return g;
}

GraphSpec GraphSpec::torus(std::size_t nx, std::size_t ny, double hopping) {
  if (nx < 3 || ny < 3) throw InvalidInput("torus: both extents must be at least 3");
  GraphSpec g;
  g.n_sites = nx * ny;
  g.kind = GraphKind::kTorus;
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t site = x + nx * y;
      g.edges.push_back({site, (x + 1) % nx + nx * y, {hopping, 0.0}});
      g.edges.push_back({site, x + nx * ((y + 1) % ny), {hopping, 0.0}});
    }
  }
  return g;
}

GraphSpec GraphSpec::from_edges(std::size_t n, std::vector<Edge> edges) {
  GraphSpec g;
  g.n_sites = n;
  g.edges = std::move(edges);
  g.kind = GraphKind::kExplicit;
  validate(g);
  return g;
}

void validate(const GraphSpec& graph) { (void)build_hopping(graph); }

Eigen::MatrixXcd build_hopping(const GraphSpec& graph) {
  const std::size_t n = graph.n_sites;
  if (n == 0) throw InvalidInput("graph: n_sites must be positive");
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(dim, dim);
  // 0 = unset, 1 = set as (x,y), 2 = set as the conjugate of (y,x)
  Eigen::MatrixXi origin = Eigen::MatrixXi::Zero(dim, dim);

  for (const Edge& e : graph.edges) {
    if (e.from >= n || e.to >= n) {
      throw InvalidInput("graph: edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                         ") references a site outside 0.." + std::to_string(n - 1));
    }
    if (e.from == e.to) {
      throw InvalidInput("graph: self-loop at site " + std::to_string(e.from) +
                         " (on-site terms belong to the potential)");
    }
    const auto x = static_cast<Eigen::Index>(e.from);
    const auto y = static_cast<Eigen::Index>(e.to);
    if (origin(x, y) == 0) {
      t(x, y) = e.weight;
      t(y, x) = std::conj(e.weight);
      origin(x, y) = 1;
      origin(y, x) = 2;
    } else if (origin(x, y) == 2) {
      if (t(x, y) != e.weight) {
        throw InvalidInput("graph: weights for (" + std::to_string(e.from) + "," +
                           std::to_string(e.to) + ") and its reverse are not conjugate");
      }
      origin(x, y) = 3;
    } else {
      throw InvalidInput("graph: edge (" + std::to_string(e.from) + "," + std::to_string(e.to) +
                         ") declared twice");
    }
  }
  return t;
}

}  // namespace levelstat
