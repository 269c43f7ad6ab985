#include "levelstat/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "levelstat/error.hpp"
#include "levelstat/parallel.hpp"

namespace levelstat {

namespace {

double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  [[nodiscard]] double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
  [[nodiscard]] double sample_sd() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
    return std::sqrt(std::max(0.0, var));
  }
};

EstimatorReport bernoulli_report(std::string quantity, std::uint64_t successes, std::uint64_t n,
                                 const ExperimentSpec& spec, double bound) {
  EstimatorReport r;
  r.quantity = std::move(quantity);
  r.n_samples = n;
  r.seed = spec.seed;
  r.bound = bound;
  r.estimate = static_cast<double>(successes) / static_cast<double>(n);
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / static_cast<double>(n));
  std::tie(r.ci_low, r.ci_high) = wilson_interval(successes, n, spec.confidence_level);
  r.bound_satisfied = r.estimate <= bound;
  return r;
}

EstimatorReport mean_report(std::string quantity, const MeanAccumulator& acc,
                            const ExperimentSpec& spec, double bound) {
  EstimatorReport r;
  r.quantity = std::move(quantity);
  r.n_samples = acc.n;
  r.seed = spec.seed;
  r.bound = bound;
  r.estimate = acc.mean();
  const double sd = acc.sample_sd();
  r.std_error = sd / std::sqrt(static_cast<double>(acc.n));
  std::tie(r.ci_low, r.ci_high) = normal_interval(r.estimate, sd, acc.n, spec.confidence_level);
  r.bound_satisfied = r.estimate <= bound;
  return r;
}

void require_samples(const ExperimentSpec& spec) {
  if (spec.n_samples == 0) throw InvalidInput("estimator: n_samples must be >= 1");
}

void require_intervals(const ExperimentSpec& spec, std::size_t exactly, const char* who) {
  if (exactly != 0 && spec.intervals.size() != exactly) {
    throw InvalidInput(std::string(who) + ": expects exactly " + std::to_string(exactly) + " interval(s)");
  }
  if (spec.intervals.empty()) throw InvalidInput(std::string(who) + ": needs at least one interval");
}

double product_of_lengths(const IntervalSet& intervals) {
  double p = 1.0;
  for (const Interval& i : intervals) p *= i.length();
  return p;
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  const std::size_t n_sites = spec.graph.n_sites;
  validate(spec.graph);
  if (spec.n_samples == 0) throw InvalidInput("n_samples must be >= 1");
  if (!(spec.confidence_level > 0.0 && spec.confidence_level < 1.0)) {
    throw InvalidInput("confidence_level must lie in (0,1)");
  }
  if (spec.alpha.has_value() != spec.sets.has_value()) {
    throw InvalidInput(spec.alpha ? "alpha given without sets" : "sets given without alpha");
  }
  if (spec.alpha) {
    if (!(*spec.alpha > 0.0)) throw InvalidInput("alpha must be positive");
    if (spec.sets->size() != spec.intervals.size()) {
      throw InvalidInput("sets: need exactly one set per interval");
    }
    for (const SiteSet& b : *spec.sets) {
      if (b.empty()) throw InvalidInput("sets: every set must be nonempty");
      for (std::size_t x : b) {
        if (x >= n_sites) throw InvalidInput("sets: site " + std::to_string(x) + " out of range");
      }
    }
  }
  if (spec.sites) {
    const auto& s = *spec.sites;
    if (s.size() != spec.intervals.size()) throw InvalidInput("sites: need exactly one site per interval");
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (s[a] >= n_sites) throw InvalidInput("sites: site " + std::to_string(s[a]) + " out of range");
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        if (s[a] == s[b]) throw InvalidInput("sites: repeated site " + std::to_string(s[a]));
      }
    }
  }
}

double z_score(double confidence_level) {
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw InvalidInput("confidence level must lie in (0,1)");
  }
  const boost::math::normal standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * confidence_level);
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n,
                                          double confidence_level) {
  if (n == 0) throw InvalidInput("wilson_interval: n must be >= 1");
  if (successes > n) throw InvalidInput("wilson_interval: successes exceed trials");
  const double z = z_score(confidence_level);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  double lo = successes == 0 ? 0.0 : std::clamp(center - half, 0.0, p);
  double hi = successes == n ? 1.0 : std::clamp(center + half, p, 1.0);
  return {lo, hi};
}

std::pair<double, double> normal_interval(double mean, double sample_sd, std::uint64_t n,
                                          double confidence_level) {
  if (n == 0) throw InvalidInput("normal_interval: n must be >= 1");
  const double half = z_score(confidence_level) * sample_sd / std::sqrt(static_cast<double>(n));
  return {mean - half, mean + half};
}

Sampler::Sampler(const ExperimentSpec& spec)
    : hopping_(build_hopping(spec.graph)), dist_(spec.dist), seed_(spec.seed) {}

Hamiltonian Sampler::hamiltonian(std::uint64_t sample_index) const {
  return assemble_hamiltonian(hopping_, sample_potential(dist_, seed_, sample_index, n_sites()));
}

SpectralData Sampler::realize(std::uint64_t sample_index) const {
  return eigendecompose(hamiltonian(sample_index));
}

double wegner_bound(double rho, double length, std::size_t n_sites) {
  return rho * length * static_cast<double>(n_sites);
}

double minami_bound(double rho, double length, std::size_t n_sites) {
  const double w = rho * length * static_cast<double>(n_sites);
  return 0.5 * std::numbers::pi * std::numbers::pi * w * w;
}

double n_level_bound(double rho, double length, std::size_t n_sites, std::size_t n) {
  const double w = std::numbers::pi * rho * length * static_cast<double>(n_sites);
  return std::pow(w, static_cast<double>(n)) / factorial(n);
}

double joint_interval_conjecture_bound(double rho, const IntervalSet& intervals, std::size_t n_sites) {
  return std::pow(rho, static_cast<double>(intervals.size())) * product_of_lengths(intervals) *
         static_cast<double>(n_sites);
}

double spectral_averaging_bound(double rho, const IntervalSet& intervals) {
  const std::size_t n = intervals.size();
  return factorial(n) * std::pow(rho, static_cast<double>(n)) * product_of_lengths(intervals);
}

double profile_event_bound(double rho, const IntervalSet& intervals, std::span<const SiteSet> sets,
                           double alpha) {
  const std::size_t n = intervals.size();
  double b = factorial(n) / std::pow(alpha, static_cast<double>(n)) * std::pow(rho, static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) b *= intervals[j].length() * static_cast<double>(sets[j].size());
  return b;
}

WegnerResult estimate_wegner(const ExperimentSpec& spec, const EstimatorOptions& opts) {
  validate(spec);
  require_samples(spec);
  require_intervals(spec, 1, "estimate_wegner");
  const Sampler sampler(spec);
  const Interval interval = spec.intervals[0];

  std::uint64_t hits = 0;
  std::uint64_t violations = 0;
  MeanAccumulator trace;
  ordered_map_fold<std::uint64_t>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) -> std::uint64_t { return count_in_interval(sampler.realize(i), interval); },
      [&](std::uint64_t, std::uint64_t count) {
        const std::uint64_t hit = count > 0 ? 1 : 0;
        hits += hit;
        if (hit > count) ++violations;
        trace.add(static_cast<double>(count));
      });

  const double bound = wegner_bound(spec.dist.rho_inf(), interval.length(), sampler.n_sites());
  WegnerResult out;
  out.occupancy = bernoulli_report("P{spectrum meets I}", hits, spec.n_samples, spec, bound);
  out.trace = mean_report("E[Tr P_I]", trace, spec, bound);
  out.chain_violations = violations;
  return out;
}

MinamiResult estimate_minami(const ExperimentSpec& spec, const EstimatorOptions& opts) {
  validate(spec);
  require_samples(spec);
  require_intervals(spec, 1, "estimate_minami");
  const Sampler sampler(spec);
  const Interval interval = spec.intervals[0];

  std::uint64_t multiple = 0;
  std::uint64_t violations = 0;
  MeanAccumulator moment;
  ordered_map_fold<std::uint64_t>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) -> std::uint64_t { return count_in_interval(sampler.realize(i), interval); },
      [&](std::uint64_t, std::uint64_t count) {
        const double c = static_cast<double>(count);
        const double falling = count == 0 ? 0.0 : c * (c - 1.0);
        const std::uint64_t indicator = count >= 2 ? 1 : 0;
        multiple += indicator;
        if (static_cast<double>(indicator) > falling) ++violations;
        moment.add(falling);
      });

  const double bound = minami_bound(spec.dist.rho_inf(), interval.length(), sampler.n_sites());
  MinamiResult out;
  out.factorial_moment = mean_report("E[Tr P_I (Tr P_I - 1)]", moment, spec, bound);
  out.multiple_occupancy = bernoulli_report("P{card >= 2}", multiple, spec.n_samples, spec, bound);
  out.chain_violations = violations;
  return out;
}

EstimatorReport estimate_n_level(const ExperimentSpec& spec, std::size_t n, const EstimatorOptions& opts) {
  validate(spec);
  require_samples(spec);
  require_intervals(spec, 1, "estimate_n_level");
  if (n == 0) throw InvalidInput("estimate_n_level: n must be >= 1");
  const Sampler sampler(spec);
  const Interval interval = spec.intervals[0];

  std::uint64_t hits = 0;
  ordered_map_fold<std::uint64_t>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) -> std::uint64_t { return count_in_interval(sampler.realize(i), interval); },
      [&](std::uint64_t, std::uint64_t count) { hits += count >= n ? 1 : 0; });

  const double bound = n_level_bound(spec.dist.rho_inf(), interval.length(), sampler.n_sites(), n);
  return bernoulli_report("P{card >= " + std::to_string(n) + "}", hits, spec.n_samples, spec, bound);
}

EstimatorReport estimate_joint_intervals(const ExperimentSpec& spec, const EstimatorOptions& opts) {
  validate(spec);
  require_samples(spec);
  require_intervals(spec, 0, "estimate_joint_intervals");
  const Sampler sampler(spec);

  std::uint64_t hits = 0;
  ordered_map_fold<unsigned char>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) -> unsigned char {
        const SpectralData s = sampler.realize(i);
        for (const Interval& interval : spec.intervals) {
          if (count_in_interval(s, interval) == 0) return 0;
        }
        return 1;
      },
      [&](std::uint64_t, unsigned char hit) { hits += hit; });

  const double bound = joint_interval_conjecture_bound(spec.dist.rho_inf(), spec.intervals, sampler.n_sites());
  EstimatorReport r = bernoulli_report("P{spectrum meets every I_j} (conjectured bound)", hits,
                                       spec.n_samples, spec, bound);
  r.conjecture_violated = r.estimate - 3.0 * r.std_error > bound;
  return r;
}

namespace {

// Per-sample value for eigenvector-based estimators; degenerate samples are
// tallied and excluded.
struct FlaggedValue {
  double value = 0.0;
  bool degenerate = false;
};

}  // namespace

EstimatorReport estimate_spectral_averaging(const ExperimentSpec& spec, const EstimatorOptions& opts) {
  validate(spec);
  require_samples(spec);
  require_intervals(spec, 0, "estimate_spectral_averaging");
  if (!spec.sites) throw InvalidInput("estimate_spectral_averaging: sites are required");
  const Sampler sampler(spec);
  if (spec.intervals.size() > sampler.n_sites()) {
    throw InvalidInput("estimate_spectral_averaging: more intervals than sites");
  }
  const auto& sites = *spec.sites;

  MeanAccumulator acc;
  std::uint64_t degenerate = 0;
  ordered_map_fold<FlaggedValue>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) -> FlaggedValue {
        const SpectralData s = sampler.realize(i);
        if (simplicity_report(s, default_gap_tolerance(s)).degenerate) return {0.0, true};
        return {occupation_determinant(s, spec.intervals, sites), false};
      },
      [&](std::uint64_t, const FlaggedValue& v) {
        if (v.degenerate) {
          ++degenerate;
        } else {
          acc.add(v.value);
        }
      });
  if (acc.n == 0) throw NumericalError("estimate_spectral_averaging: every sample was degenerate");

  const double bound = spectral_averaging_bound(spec.dist.rho_inf(), spec.intervals);
  EstimatorReport r = mean_report("E|det <d_x, P_I d_x>|", acc, spec, bound);
  r.n_samples = spec.n_samples;
  r.n_degenerate_flagged = degenerate;
  return r;
}

EstimatorReport estimate_profile_event(const ExperimentSpec& spec, const EstimatorOptions& opts) {
  validate(spec);
  require_samples(spec);
  require_intervals(spec, 0, "estimate_profile_event");
  if (!spec.alpha || !spec.sets) throw InvalidInput("estimate_profile_event: alpha and sets are required");
  const Sampler sampler(spec);
  const auto& sets = *spec.sets;
  const double alpha = *spec.alpha;

  std::uint64_t used = 0;
  std::uint64_t hits = 0;
  std::uint64_t degenerate = 0;
  ordered_map_fold<FlaggedValue>(
      spec.n_samples, opts.threads,
      [&](std::uint64_t i) -> FlaggedValue {
        const SpectralData s = sampler.realize(i);
        if (simplicity_report(s, default_gap_tolerance(s)).degenerate) return {0.0, true};
        const bool event = indicator_event_alpha(s, spec.intervals, sets, alpha, opts.assignment_cap);
        return {event ? 1.0 : 0.0, false};
      },
      [&](std::uint64_t, const FlaggedValue& v) {
        if (v.degenerate) {
          ++degenerate;
          return;
        }
        ++used;
        if (v.value > 0.0) ++hits;
      });
  if (used == 0) throw NumericalError("estimate_profile_event: every sample was degenerate");

  const double bound = profile_event_bound(spec.dist.rho_inf(), spec.intervals, sets, alpha);
  EstimatorReport r = bernoulli_report("P{E_alpha}", hits, used, spec, bound);
  r.n_samples = spec.n_samples;
  r.n_degenerate_flagged = degenerate;
  return r;
}

bool indicator_event_alpha(const SpectralData& spec, const IntervalSet& intervals,
                           std::span<const SiteSet> sets, double alpha, std::uint64_t assignment_cap) {
  const std::size_t n = intervals.size();
  if (n == 0) throw InvalidInput("indicator_event_alpha: need at least one interval");
  if (sets.size() != n) throw InvalidInput("indicator_event_alpha: need one set per interval");
  if (!(alpha > 0.0)) throw InvalidInput("indicator_event_alpha: alpha must be positive");

  std::vector<std::vector<std::size_t>> candidates(n);
  double worst_case = 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < spec.size(); ++j) {
      if (intervals[m].contains(spec.eigenvalues[static_cast<Eigen::Index>(j)])) candidates[m].push_back(j);
    }
    if (candidates[m].empty()) return false;
    worst_case *= static_cast<double>(candidates[m].size());
  }
  if (worst_case > static_cast<double>(assignment_cap)) {
    throw NumericalError("indicator_event_alpha: " + std::to_string(static_cast<std::uint64_t>(worst_case)) +
                         " index assignments exceed the cap of " + std::to_string(assignment_cap));
  }

  const double threshold = std::pow(alpha, static_cast<double>(n));
  std::vector<std::size_t> chosen(n);
  std::vector<bool> used(spec.size(), false);

  auto search = [&](auto&& self, std::size_t m) -> bool {
    if (m == n) return profile_determinant_sum(spec, chosen, sets) >= threshold;
    for (std::size_t j : candidates[m]) {
      if (used[j]) continue;
      used[j] = true;
      chosen[m] = j;
      const bool found = self(self, m + 1);
      used[j] = false;
      if (found) return true;
    }
    return false;
  };
  return search(search, 0);
}

bool indicator_single_occupancy(const SpectralData& spec, const IntervalSet& intervals) {
  if (intervals.empty()) return false;
  for (const Interval& i : intervals) {
    if (count_in_interval(spec, i) != 1) return false;
  }
  return true;
}

}  // namespace levelstat
