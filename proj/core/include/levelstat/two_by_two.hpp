#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "levelstat/distribution.hpp"
#include "levelstat/graph.hpp"
#include "levelstat/spectral.hpp"

namespace levelstat {

/// H(ω) = [[a + ω_1, c], [c*, b + ω_2]].
struct TwoByTwoModel {
  double a = 0.0;
  double b = 0.0;
  Complex c{1.0, 0.0};

  [[nodiscard]] double abs_c() const { return std::abs(c); }
  [[nodiscard]] Eigen::Matrix2cd matrix(double omega1, double omega2) const;
};

/// Ordered pair, upper >= lower.
struct EigenPair {
  double upper = 0.0;
  double lower = 0.0;
};

/// Closed form ½(ω_1+ω_2+a+b ± √((ω_1−ω_2+a−b)² + 4|c|²)).
[[nodiscard]] EigenPair eigenvalues_2x2(const TwoByTwoModel& model, double omega1, double omega2);

/// |det ∂E/∂ω| = √((E_1−E_2)² − 4|c|²)/|E_1−E_2|. DomainError at or inside
/// the gap, and for c = 0.
[[nodiscard]] double jacobian_2x2(const TwoByTwoModel& model, double upper, double lower);

/// All real ω with eigenvalues (upper, lower): two branches strictly above the
/// gap edge, one on it. DomainError below the edge.
[[nodiscard]] std::vector<std::array<double, 2>> invert_to_potentials(const TwoByTwoModel& model,
                                                                      double upper, double lower);

/// Density of the ordered pair (E_1 > E_2) for i.i.d. ω_1, ω_2 ~ dist, summed
/// over both ω-branches. Zero when E_1 − E_2 <= 2|c|.
[[nodiscard]] double joint_density(const TwoByTwoModel& model, const PotentialDistribution& dist,
                                   double upper, double lower);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// P{E_1 ∈ upper_range, E_2 ∈ lower_range}. Integrates the density after the
/// substitution u = √(E_1 − E_2 − 2|c|), which removes the edge singularity.
/// Throws NumericalError if the error estimate exceeds 1e-6.
[[nodiscard]] QuadratureResult region_mass(const TwoByTwoModel& model, const PotentialDistribution& dist,
                                           const Interval& upper_range, const Interval& lower_range);
/// P{2|c| < E_1 − E_2 < 2|c| + eps}.
[[nodiscard]] QuadratureResult gap_window_mass(const TwoByTwoModel& model,
                                               const PotentialDistribution& dist, double eps);
[[nodiscard]] QuadratureResult total_mass(const TwoByTwoModel& model, const PotentialDistribution& dist);

/// Smallest box containing every ordered pair: by monotonicity of each
/// eigenvalue in each ω, the corners of the support give the extremes.
[[nodiscard]] std::pair<Interval, Interval> spectral_box(const TwoByTwoModel& model,
                                                         const PotentialDistribution& dist);

struct ScalingRow {
  double eps = 0.0;
  double mass = 0.0;
};

struct ScalingProbe {
  std::vector<ScalingRow> rows;
  std::optional<double> exponent;  ///< log-log least-squares slope; empty if < 2 positive masses
};

/// eps_list must be positive and strictly decreasing.
[[nodiscard]] ScalingProbe singular_scaling_probe(const TwoByTwoModel& model,
                                                  const PotentialDistribution& dist,
                                                  const std::vector<double>& eps_list);

/// I_1 = [anchor, anchor + w); I_2 = I_1 shifted down by `shift`, or by
/// 2|c| + w when no shift is given (the pair then straddles the gap edge).
struct IntervalPairPlacement {
  double anchor = 0.5;
  std::optional<double> shift;
};

struct BoundRow {
  double width = 0.0;
  double probability = 0.0;
  double ratio_product = 0.0;   ///< P / w²
  double ratio_modified = 0.0;  ///< P / max(w, √w)²
};

[[nodiscard]] std::vector<BoundRow> modified_bound_check(const TwoByTwoModel& model,
                                                         const PotentialDistribution& dist,
                                                         const std::vector<double>& widths,
                                                         const IntervalPairPlacement& placement = {});

/// Monte Carlo histogram of ordered eigenvalue pairs next to the integrated
/// analytic density on the same bins. Bin (i, k) is stored at i*bins_lower + k.
struct DensityGrid {
  std::vector<double> upper_edges;
  std::vector<double> lower_edges;
  std::vector<double> analytic_mass;
  std::vector<std::uint64_t> mc_count;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t out_of_range = 0;
  std::uint64_t gap_violations = 0;    ///< E_1 − E_2 < 2|c| − 1e-12
  std::uint64_t trace_violations = 0;  ///< |E_1 + E_2 − (ω_1+ω_2+a+b)| > 1e-12
  double analytic_total = 0.0;
  double l1 = 0.0;  ///< Σ|p − q| between the two normalized histograms

  [[nodiscard]] std::size_t bins_upper() const { return upper_edges.size() - 1; }
  [[nodiscard]] std::size_t bins_lower() const { return lower_edges.size() - 1; }
};

/// n_samples must be >= 1e4.
[[nodiscard]] DensityGrid mc_vs_analytic(const TwoByTwoModel& model, const PotentialDistribution& dist,
                                         std::size_t bins_upper, std::size_t bins_lower,
                                         std::uint64_t n_samples, std::uint64_t seed,
                                         unsigned threads = 0);

/// The model as a two-site graph (a and b move into the potential).
[[nodiscard]] GraphSpec two_site_graph(const TwoByTwoModel& model);

}  // namespace levelstat
