#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "levelstat/graph.hpp"
#include "levelstat/hamiltonian.hpp"

namespace levelstat {

/// Ascending eigenvalues; column j of `eigenvectors` belongs to eigenvalue j.
struct SpectralData {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  /// |ψ_j(x)|²
  [[nodiscard]] double weight(std::size_t j, std::size_t x) const {
    return std::norm(eigenvectors(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(j)));
  }
};

/// Half-open energy window [lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double e) const { return lo <= e && e < hi; }
  [[nodiscard]] double length() const { return hi - lo; }
};

class IntervalSet {
 public:
  IntervalSet() = default;
  /// Throws InvalidInput if some interval has lo >= hi.
  explicit IntervalSet(std::vector<Interval> intervals);

  [[nodiscard]] std::size_t size() const { return intervals_.size(); }
  [[nodiscard]] bool empty() const { return intervals_.empty(); }
  [[nodiscard]] const Interval& operator[](std::size_t i) const { return intervals_[i]; }
  [[nodiscard]] const std::vector<Interval>& intervals() const { return intervals_; }
  [[nodiscard]] bool pairwise_disjoint() const { return disjoint_; }
  [[nodiscard]] auto begin() const { return intervals_.begin(); }
  [[nodiscard]] auto end() const { return intervals_.end(); }

 private:
  std::vector<Interval> intervals_;
  bool disjoint_ = true;
};

struct SimplicityReport {
  double min_gap = 0.0;
  bool degenerate = false;
  double gap_tolerance = 0.0;
};

/// Dense Hermitian eigendecomposition. Throws NumericalError if the solver
/// does not converge.
[[nodiscard]] SpectralData eigendecompose(const Hamiltonian& h);
[[nodiscard]] SpectralData eigendecompose(const Eigen::MatrixXcd& matrix);

/// Tr P_I = #{j : E_j in [lo, hi)}.
[[nodiscard]] std::size_t count_in_interval(const SpectralData& spec, const Interval& interval);

/// ⟨δ_x, P_I δ_x⟩ = Σ_{E_j ∈ I} |ψ_j(x)|².
[[nodiscard]] double projector_entry(const SpectralData& spec, const Interval& interval,
                                     std::size_t site);

/// |det M|, M(j,k) = ⟨δ_{x_k}, P_{I_j} δ_{x_k}⟩.
[[nodiscard]] double occupation_determinant(const SpectralData& spec, const IntervalSet& intervals,
                                            std::span<const std::size_t> sites);

using SiteSet = std::vector<std::size_t>;

/// Σ_{x_1∈B_1}…Σ_{x_n∈B_n} |det(|ψ_{j_m}(x_k)|²)_{m,k}|.
[[nodiscard]] double profile_determinant_sum(const SpectralData& spec,
                                             std::span<const std::size_t> eigenindices,
                                             std::span<const SiteSet> sets);

/// |det(⟨ψ_{j_m}, 1_{B_k} ψ_{j_m}⟩)_{m,k}|; never exceeds profile_determinant_sum.
[[nodiscard]] double occupation_minor(const SpectralData& spec,
                                      std::span<const std::size_t> eigenindices,
                                      std::span<const SiteSet> sets);

struct FeynmanHellmann {
  double analytic = 0.0;  ///< |ψ_j(x)|²
  double numeric = 0.0;   ///< central difference of E_j in V_x
};

/// Throws DegenerateSpectrum when E_j is not separated from its neighbours by
/// more than 10·h·‖H‖.
[[nodiscard]] FeynmanHellmann feynman_hellmann_check(const GraphSpec& graph,
                                                     const std::vector<double>& potential,
                                                     std::size_t site, std::size_t eigenindex,
                                                     double step);

/// 1e-12 · (1 + spectral diameter).
[[nodiscard]] double default_gap_tolerance(const SpectralData& spec);

/// min_gap is +inf for a one-point spectrum.
[[nodiscard]] SimplicityReport simplicity_report(const SpectralData& spec, double gap_tolerance);

/// |det| of a small dense matrix via partial-pivot LU (1 for a 0x0 matrix).
[[nodiscard]] double abs_determinant(const Eigen::MatrixXd& m);

}  // namespace levelstat
