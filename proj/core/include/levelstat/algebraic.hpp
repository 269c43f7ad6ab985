#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "levelstat/distribution.hpp"
#include "levelstat/graph.hpp"
#include "levelstat/hamiltonian.hpp"
#include "levelstat/spectral.hpp"

namespace levelstat {

/// Simultaneous solutions V_Σ of P_{E_j}(V_Σ) = det(H(V_Σ) − E_j) = 0,
/// j = 1..n, with the potential off Σ frozen.
class MultiplicityProblem {
 public:
  /// `frozen_potential` has one entry per site; entries on free sites are
  /// ignored. `onsite` is an optional deterministic diagonal term added on
  /// every site (empty = zero). Throws InvalidInput unless |targets| =
  /// |free_sites| >= 1, free sites are distinct, and targets are distinct.
  MultiplicityProblem(const GraphSpec& graph, std::vector<std::size_t> free_sites,
                      std::vector<double> frozen_potential, std::vector<double> targets,
                      std::vector<double> onsite = {});

  [[nodiscard]] std::size_t n() const { return free_sites_.size(); }
  [[nodiscard]] std::size_t n_sites() const { return static_cast<std::size_t>(hopping_.rows()); }
  [[nodiscard]] const std::vector<std::size_t>& free_sites() const { return free_sites_; }
  [[nodiscard]] const std::vector<double>& targets() const { return targets_; }
  [[nodiscard]] const std::vector<double>& onsite() const { return onsite_; }
  [[nodiscard]] const Eigen::MatrixXcd& hopping() const { return hopping_; }
  [[nodiscard]] bool real_hopping() const { return real_; }

  /// H with V_Σ = free_values on the free sites.
  [[nodiscard]] Eigen::MatrixXcd matrix(const Eigen::VectorXd& free_values) const;
  /// True when no free site couples to any other site.
  [[nodiscard]] bool free_sites_decoupled() const;

 private:
  Eigen::MatrixXcd hopping_;
  std::vector<std::size_t> free_sites_;
  std::vector<double> base_diagonal_;  // onsite + frozen potential, zero on free sites
  std::vector<double> onsite_;
  std::vector<double> targets_;
  bool real_ = true;
};

/// det(H(V_Σ) − E).
[[nodiscard]] double char_poly_eval(const MultiplicityProblem& problem, const Eigen::VectorXd& free_values,
                                    double energy);

/// ∂P_E/∂V_x for every free site, via principal minors (P_E is affine in
/// each V_x, so the derivative is the cofactor of the (x, x) entry).
[[nodiscard]] Eigen::VectorXd char_poly_gradient(const MultiplicityProblem& problem,
                                                 const Eigen::VectorXd& free_values, double energy);

struct SearchOptions {
  std::size_t n_starts = 0;  ///< 0 = 500·n!
  double box_lo = -1.0;
  double box_hi = 1.0;
  double newton_tol = 1e-12;
  double dedup_tol = 1e-8;
  double residual_tol = 1e-9;
  double isolation_tol = 1e-10;  ///< |det J| relative to its Hadamard bound
  unsigned max_iterations = 100;
  unsigned threads = 0;
};

/// Box = support inflated by 50% on each side.
[[nodiscard]] SearchOptions default_search(const PotentialDistribution& dist, std::size_t n);

struct SolutionSet {
  std::vector<Eigen::VectorXd> solutions;
  std::vector<double> jacobian_dets;
  std::size_t starts_used = 0;
  std::size_t converged = 0;
  std::size_t dedup_merges = 0;
  std::size_t rejected_singular = 0;  ///< converged roots failing the isolation test

  [[nodiscard]] std::size_t count() const { return solutions.size(); }
};

/// Multi-start Newton from a Halton sequence in the search box. Throws
/// DegenerateSpectrum if a target is an eigenvalue of the frozen block, and
/// BoundViolation if more than n! isolated roots survive deduplication.
[[nodiscard]] SolutionSet solve_multilinear_system(const MultiplicityProblem& problem,
                                                   const SearchOptions& search);

/// Exact solutions when no free site is coupled: T_x + V_x runs over the
/// permutations of the targets.
[[nodiscard]] SolutionSet diagonal_case_enumerate(const MultiplicityProblem& problem);

struct JacobianCheck {
  double jacobian_det = 0.0;  ///< det(∂P_{E_j}/∂V_{x_k}) from cofactors
  double factored = 0.0;      ///< D(E;Σ) · Π_j Π_{m≠j} (E_m − E_j)
  double profile_det = 0.0;   ///< D(E;Σ) = det(|ψ_j(x_k)|²)
  double relative_error = 0.0;
  bool agrees = false;  ///< relative_error <= 1e-6
};

/// Throws DegenerateSpectrum if the spectrum at the solution is not simple.
[[nodiscard]] JacobianCheck jacobian_condition(const MultiplicityProblem& problem,
                                               const Eigen::VectorXd& solution);

/// M_Λ = (H⊗1 − 1⊗H)² on span{δ⁻_xy : x < y}, basis ordered lexicographically.
struct AntisymmetricOperator {
  std::size_t n_sites = 0;
  std::vector<std::pair<std::size_t, std::size_t>> basis;
  Eigen::MatrixXcd matrix;
};

[[nodiscard]] AntisymmetricOperator build_antisymmetric_operator(const Hamiltonian& h);

/// Coordinates of Ψ⁻_jk in the δ⁻ basis.
[[nodiscard]] Eigen::VectorXcd antisymmetric_eigenvector(const SpectralData& spec,
                                                         const AntisymmetricOperator& op,
                                                         std::size_t j, std::size_t k);

struct DetM {
  double assembled = 0.0;  ///< det of the assembled M_Λ
  double spectral = 0.0;   ///< Π_{j<k} (E_j − E_k)²
  double relative_difference = 0.0;
};

[[nodiscard]] DetM det_M(const Hamiltonian& h);

struct DegreeProbe {
  std::size_t degree = 0;
  std::size_t n_sites = 0;
  bool within_site_bound = false;  ///< degree <= |Λ|
};

/// Fits V_x ↦ det M_Λ at the given points with Chebyshev polynomials of
/// increasing degree and returns the first with relative residual <= 1e-8.
/// Needs at least |Λ| + 2 distinct points; throws NumericalError if no
/// degree up to (#points − 2) fits.
[[nodiscard]] DegreeProbe degree_probe(const Hamiltonian& h, std::size_t site,
                                       const std::vector<double>& points);

/// Chebyshev nodes on [lo, hi].
[[nodiscard]] std::vector<double> chebyshev_points(double lo, double hi, std::size_t count);

}  // namespace levelstat
