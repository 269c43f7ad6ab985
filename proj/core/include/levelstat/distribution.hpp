#pragma once

#include <string>
#include <vector>

namespace levelstat {

struct Support {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double width() const { return hi - lo; }
};

enum class DistributionKind { kUniform, kTriangular, kPiecewiseConstant };

/// Single-site law of the i.i.d. random potential.
///
/// Every kind has a bounded density that is polynomial of degree <= 1 between
/// consecutive breakpoints; `rho_inf()` is the exact supremum of that density,
/// which for a product law is also the conditional density bound.
class PotentialDistribution {
 public:
  static PotentialDistribution uniform(double a, double b);
  /// Symmetric triangular law on [a, b] with its peak at the midpoint.
  static PotentialDistribution triangular(double a, double b);
  /// Density `densities[i]` on [edges[i], edges[i+1]). Must integrate to 1
  /// within 1e-10.
  static PotentialDistribution piecewise_constant(std::vector<double> edges,
                                                  std::vector<double> densities);

  [[nodiscard]] DistributionKind kind() const { return kind_; }
  [[nodiscard]] Support support() const { return {edges_.front(), edges_.back()}; }
  [[nodiscard]] double rho_inf() const { return rho_inf_; }
  [[nodiscard]] double density(double v) const;
  [[nodiscard]] double cdf(double v) const;
  /// Inverse CDF; u in [0, 1).
  [[nodiscard]] double quantile(double u) const;
  [[nodiscard]] double mean() const;
  /// Points where the density may fail to be smooth, support ends included.
  [[nodiscard]] const std::vector<double>& breakpoints() const { return edges_; }
  /// For piecewise-constant laws: the per-cell densities.
  [[nodiscard]] const std::vector<double>& cell_densities() const { return densities_; }
  [[nodiscard]] std::string describe() const;

 private:
  PotentialDistribution() = default;

  DistributionKind kind_ = DistributionKind::kUniform;
  std::vector<double> edges_;
  std::vector<double> densities_;
  std::vector<double> cumulative_;
  double rho_inf_ = 1.0;
};

/// ρ_∞ of the distribution.
[[nodiscard]] inline double density_bound(const PotentialDistribution& dist) {
  return dist.rho_inf();
}

}  // namespace levelstat
