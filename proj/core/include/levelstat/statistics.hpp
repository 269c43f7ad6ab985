#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "levelstat/distribution.hpp"
#include "levelstat/graph.hpp"
#include "levelstat/hamiltonian.hpp"
#include "levelstat/spectral.hpp"

namespace levelstat {

/// Parameters shared by every Monte Carlo estimator.
struct ExperimentSpec {
  GraphSpec graph;
  PotentialDistribution dist = PotentialDistribution::uniform(0.0, 1.0);
  IntervalSet intervals;
  std::optional<std::vector<SiteSet>> sets;
  std::optional<double> alpha;
  std::optional<std::vector<std::size_t>> sites;
  std::uint64_t n_samples = 1;
  std::uint64_t seed = 0;
  double confidence_level = 0.99;
};

/// Throws InvalidInput when cross-field invariants fail.
void validate(const ExperimentSpec& spec);

struct EstimatorOptions {
  unsigned threads = 0;  ///< 0 = all cores; never changes results
  std::uint64_t assignment_cap = 10000;
};

struct EstimatorReport {
  std::string quantity;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_degenerate_flagged = 0;
  double bound = 0.0;
  bool bound_satisfied = false;  ///< estimate <= bound
  std::uint64_t seed = 0;
  std::optional<bool> conjecture_violated;

  /// The verdict used for bound-type experiments: ci_low <= bound.
  [[nodiscard]] bool consistent_with_bound() const { return ci_low <= bound; }
};

[[nodiscard]] double z_score(double confidence_level);
/// Wilson score interval for `successes` out of `n` Bernoulli trials.
[[nodiscard]] std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n,
                                                        double confidence_level);
/// mean ± z·sd/√n.
[[nodiscard]] std::pair<double, double> normal_interval(double mean, double sample_sd,
                                                        std::uint64_t n, double confidence_level);

/// Draws realizations of T + V(ω) for a spec; stateless after construction.
class Sampler {
 public:
  explicit Sampler(const ExperimentSpec& spec);

  [[nodiscard]] Hamiltonian hamiltonian(std::uint64_t sample_index) const;
  [[nodiscard]] SpectralData realize(std::uint64_t sample_index) const;
  [[nodiscard]] std::size_t n_sites() const { return static_cast<std::size_t>(hopping_.rows()); }

 private:
  Eigen::MatrixXcd hopping_;
  PotentialDistribution dist_;
  std::uint64_t seed_;
};

struct WegnerResult {
  EstimatorReport occupancy;  ///< P{σ ∩ I ≠ ∅}
  EstimatorReport trace;      ///< E[Tr P_I]
  std::uint64_t chain_violations = 0;  ///< samples with 1{σ∩I≠∅} > Tr P_I
};

struct MinamiResult {
  EstimatorReport factorial_moment;    ///< E[Tr P_I (Tr P_I − 1)]
  EstimatorReport multiple_occupancy;  ///< P{card ≥ 2}
  std::uint64_t chain_violations = 0;  ///< samples with 1{card≥2} > Tr P_I (Tr P_I − 1)
};

[[nodiscard]] WegnerResult estimate_wegner(const ExperimentSpec& spec, const EstimatorOptions& opts = {});
[[nodiscard]] MinamiResult estimate_minami(const ExperimentSpec& spec, const EstimatorOptions& opts = {});
/// P{card(σ ∩ I) ≥ n}; exactly 0 when n > |Λ|.
[[nodiscard]] EstimatorReport estimate_n_level(const ExperimentSpec& spec, std::size_t n,
                                               const EstimatorOptions& opts = {});
/// P{σ ∩ I_j ≠ ∅ for all j}, reported against the conjectured product bound
/// with constant 1.
[[nodiscard]] EstimatorReport estimate_joint_intervals(const ExperimentSpec& spec,
                                                       const EstimatorOptions& opts = {});
/// E|det(⟨δ_{x_k}, P_{I_j} δ_{x_k}⟩)|.
[[nodiscard]] EstimatorReport estimate_spectral_averaging(const ExperimentSpec& spec,
                                                          const EstimatorOptions& opts = {});
/// P{E_α(I_1..I_n; B_1..B_n)}.
[[nodiscard]] EstimatorReport estimate_profile_event(const ExperimentSpec& spec,
                                                     const EstimatorOptions& opts = {});

/// Does some assignment of distinct eigenindices j_m with E_{j_m} ∈ I_m have
/// a profile determinant sum of at least α^n? Throws NumericalError when the
/// number of assignments exceeds `assignment_cap`.
[[nodiscard]] bool indicator_event_alpha(const SpectralData& spec, const IntervalSet& intervals,
                                         std::span<const SiteSet> sets, double alpha,
                                         std::uint64_t assignment_cap = 10000);

/// Every interval holds exactly one eigenvalue.
[[nodiscard]] bool indicator_single_occupancy(const SpectralData& spec, const IntervalSet& intervals);

// Right-hand sides of the inequalities being checked.
[[nodiscard]] double wegner_bound(double rho, double length, std::size_t n_sites);
[[nodiscard]] double minami_bound(double rho, double length, std::size_t n_sites);
[[nodiscard]] double n_level_bound(double rho, double length, std::size_t n_sites, std::size_t n);
[[nodiscard]] double joint_interval_conjecture_bound(double rho, const IntervalSet& intervals,
                                                     std::size_t n_sites);
[[nodiscard]] double spectral_averaging_bound(double rho, const IntervalSet& intervals);
[[nodiscard]] double profile_event_bound(double rho, const IntervalSet& intervals,
                                         std::span<const SiteSet> sets, double alpha);

}  // namespace levelstat
