#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "levelstat/error.hpp"
#include "levelstat/statistics.hpp"

using namespace levelstat;

namespace {

ExperimentSpec single_site(std::vector<Interval> intervals, std::uint64_t n = 20000) {
  ExperimentSpec s;
  s.graph = GraphSpec::chain(1);
  s.dist = PotentialDistribution::uniform(0, 1);
  s.intervals = IntervalSet(std::move(intervals));
  s.n_samples = n;
  s.seed = 42;
  return s;
}

ExperimentSpec chain(std::size_t n_sites, std::vector<Interval> intervals, std::uint64_t n = 5000) {
  ExperimentSpec s;
  s.graph = GraphSpec::chain(n_sites);
  s.dist = PotentialDistribution::uniform(0, 1);
  s.intervals = IntervalSet(std::move(intervals));
  s.n_samples = n;
  s.seed = 9;
  return s;
}

SpectralData diag01() {
  return eigendecompose(Eigen::MatrixXcd(Eigen::Vector2cd(0, 1).asDiagonal()));
}

void expect_same(const EstimatorReport& a, const EstimatorReport& b) {
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
  EXPECT_EQ(a.n_degenerate_flagged, b.n_degenerate_flagged);
}

}  // namespace

TEST(ConfidenceInterval, WilsonEdges) {
  EXPECT_EQ(wilson_interval(0, 50, 0.99).first, 0.0);
  EXPECT_EQ(wilson_interval(50, 50, 0.99).second, 1.0);
  const auto [lo, hi] = wilson_interval(500, 1000, 0.95);
  EXPECT_NEAR(lo, 0.469, 5e-4);
  EXPECT_NEAR(hi, 0.531, 5e-4);
  EXPECT_THROW((void)wilson_interval(1, 2, 1.0), InvalidInput);
}

TEST(ConfidenceInterval, NormalInterval) {
  const auto [lo, hi] = normal_interval(1.0, 2.0, 100, 0.95);
  EXPECT_NEAR(lo, 1.0 - 1.959963984540054 * 0.2, 1e-12);
  EXPECT_NEAR(hi, 1.0 + 1.959963984540054 * 0.2, 1e-12);
}

TEST(Wegner, SingleSiteSaturation) {
  const auto w = estimate_wegner(single_site({{0.2, 0.5}}));
  EXPECT_DOUBLE_EQ(w.occupancy.bound, 0.3);
  EXPECT_NEAR(w.occupancy.estimate, 0.3, 3 * w.occupancy.std_error);
  EXPECT_EQ(w.occupancy.estimate, w.trace.estimate);
  EXPECT_EQ(w.chain_violations, 0u);
  EXPECT_LE(w.occupancy.ci_low, w.occupancy.estimate);
  EXPECT_GE(w.occupancy.ci_high, w.occupancy.estimate);
}

TEST(Wegner, IntervalOutsideSpectrumGivesZero) {
  const auto w = estimate_wegner(chain(4, {{10, 11}}, 500));
  EXPECT_EQ(w.occupancy.estimate, 0.0);
  EXPECT_EQ(w.trace.estimate, 0.0);
}

TEST(Wegner, TenSiteChainBelowBound) {
  const auto w = estimate_wegner(chain(10, {{0, 0.2}}, 4000));
  EXPECT_DOUBLE_EQ(w.trace.bound, 2.0);
  EXPECT_TRUE(w.trace.consistent_with_bound());
  EXPECT_LE(w.occupancy.estimate, w.trace.estimate);
  EXPECT_EQ(w.chain_violations, 0u);
}

TEST(Wegner, EnlargingIntervalNeverDecreasesOccupancy) {
  double previous = 0.0;
  for (double hi : {0.1, 0.2, 0.4, 0.8, 1.6}) {
    const double e = estimate_wegner(chain(5, {{0.0, hi}}, 3000)).occupancy.estimate;
    EXPECT_GE(e, previous);
    previous = e;
  }
}

TEST(Minami, SingleSiteHasNoPairs) {
  const auto m = estimate_minami(single_site({{0.0, 1.0}}, 1000));
  EXPECT_EQ(m.multiple_occupancy.estimate, 0.0);
  EXPECT_EQ(m.factorial_moment.estimate, 0.0);
}

TEST(Minami, EightSiteBound) {
  const auto m = estimate_minami(chain(8, {{0.4, 0.5}}, 3000));
  EXPECT_NEAR(m.factorial_moment.bound, std::numbers::pi * std::numbers::pi / 2 * 0.01 * 64, 1e-9);
  EXPECT_LT(m.factorial_moment.estimate, m.factorial_moment.bound);
  EXPECT_EQ(m.chain_violations, 0u);
}

TEST(NLevel, Examples) {
  const auto spec = chain(6, {{0.0, 1.5}}, 3000);
  const auto one = estimate_n_level(spec, 1);
  EXPECT_EQ(one.estimate, estimate_wegner(spec).occupancy.estimate);
  EXPECT_NEAR(one.bound, std::numbers::pi * 1.5 * 6, 1e-12);
  expect_same(estimate_n_level(spec, 2), estimate_minami(spec).multiple_occupancy);
  EXPECT_EQ(estimate_n_level(chain(2, {{-5, 5}}, 100), 3).estimate, 0.0);
}

TEST(JointIntervals, SingleIntervalMatchesWegner) {
  const auto spec = chain(5, {{0.3, 0.9}}, 3000);
  expect_same(estimate_joint_intervals(spec), estimate_wegner(spec).occupancy);
}

TEST(JointIntervals, GapForbidsCloseWindows) {
  ExperimentSpec s;
  s.graph = GraphSpec::from_edges(2, {{0, 1, 0.25}});
  s.dist = PotentialDistribution::uniform(-1, 1);
  s.intervals = IntervalSet({{0.1, 0.2}, {-0.2, 0.05}});  // any pair is within 0.4 < 2|c|
  s.n_samples = 20000;
  s.seed = 3;
  EXPECT_EQ(estimate_joint_intervals(s).estimate, 0.0);
}

TEST(JointIntervals, StraddlingPairViolatesProductBound) {
  ExperimentSpec s;
  s.graph = GraphSpec::from_edges(2, {{0, 1, 0.25}});
  s.dist = PotentialDistribution::uniform(-1, 1);
  const double w = 0.01;
  s.intervals = IntervalSet({{0.5, 0.5 + w}, {0.5 - 0.5 - w, 0.5 - 0.5}});
  s.n_samples = 200000;
  s.seed = 4;
  const auto r = estimate_joint_intervals(s);
  ASSERT_TRUE(r.conjecture_violated.has_value());
  EXPECT_TRUE(*r.conjecture_violated);
  EXPECT_GT(r.estimate / (w * w), 2.0);
}

TEST(SpectralAveraging, SingleSiteSaturation) {
  auto s = single_site({{0.2, 0.5}});
  s.sites = std::vector<std::size_t>{0};
  const auto r = estimate_spectral_averaging(s);
  EXPECT_DOUBLE_EQ(r.bound, 0.3);
  EXPECT_NEAR(r.estimate, 0.3, 3 * r.std_error);
}

TEST(SpectralAveraging, IdenticalIntervalsVanish) {
  auto s = chain(5, {{0.2, 0.9}, {0.2, 0.9}}, 500);
  s.sites = std::vector<std::size_t>{0, 4};
  EXPECT_EQ(estimate_spectral_averaging(s).estimate, 0.0);
}

TEST(SpectralAveraging, EightSiteBound) {
  auto s = chain(8, {{0.2, 0.3}, {0.6, 0.7}}, 2000);
  s.sites = std::vector<std::size_t>{0, 7};
  const auto r = estimate_spectral_averaging(s);
  EXPECT_NEAR(r.bound, 0.02, 1e-15);
  EXPECT_TRUE(r.consistent_with_bound());
}

TEST(EventAlpha, Examples) {
  const auto d = diag01();
  const std::vector<SiteSet> all{{0, 1}};
  EXPECT_FALSE(indicator_event_alpha(d, IntervalSet({{-1, 2}}), all, 1.5));
  EXPECT_TRUE(indicator_event_alpha(d, IntervalSet({{-1, 2}}), all, 0.5));
  const std::vector<SiteSet> split{{0}, {1}};
  EXPECT_TRUE(indicator_event_alpha(d, IntervalSet({{-0.5, 0.5}, {0.5, 1.5}}), split, 1.0));
  EXPECT_FALSE(indicator_event_alpha(d, IntervalSet({{-0.5, 0.5}, {-0.5, 0.5}}), split, 0.1));
}

TEST(EventAlpha, MonotoneInAlpha) {
  ExperimentSpec s = chain(8, {{0.0, 0.8}, {0.8, 1.6}});
  const Sampler sampler(s);
  const std::vector<SiteSet> sets{{0, 1, 2, 3}, {4, 5, 6, 7}};
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto spec = sampler.realize(i);
    bool previous = true;
    for (double alpha : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
      const bool now = indicator_event_alpha(spec, s.intervals, sets, alpha);
      EXPECT_FALSE(now && !previous);
      previous = now;
    }
  }
}

TEST(EventAlpha, AssignmentCapAborts) {
  const auto spec = eigendecompose(build_hopping(GraphSpec::chain(8)));
  const std::vector<SiteSet> sets{{0}, {1}, {2}};
  EXPECT_THROW((void)indicator_event_alpha(spec, IntervalSet({{-3, 3}, {-3, 3}, {-3, 3}}), sets, 0.1, 10),
               NumericalError);
}

TEST(ProfileEvent, SingleSite) {
  auto s = single_site({{0.2, 0.5}});
  s.sets = std::vector<SiteSet>{{0}};
  s.alpha = 0.5;
  const auto r = estimate_profile_event(s);
  EXPECT_DOUBLE_EQ(r.bound, 0.6);
  EXPECT_NEAR(r.estimate, 0.3, 3 * r.std_error);
}

TEST(ProfileEvent, AlphaAboveFactorialRootIsEmpty) {
  auto s = chain(4, {{-2, 0.5}, {0.5, 3}}, 500);
  s.sets = std::vector<SiteSet>{{0, 1, 2, 3}, {0, 1, 2, 3}};
  s.alpha = 1.5;
  EXPECT_EQ(estimate_profile_event(s).estimate, 0.0);
  s.alpha = 0.3;
  EXPECT_GT(estimate_profile_event(s).estimate, 0.0);
}

TEST(SingleOccupancy, Examples) {
  const auto s = eigendecompose(Eigen::MatrixXcd(Eigen::Vector2cd(-1, 1).asDiagonal()));
  EXPECT_TRUE(indicator_single_occupancy(s, IntervalSet({{-2, 0}, {0, 2}})));
  const auto t = eigendecompose(Eigen::MatrixXcd(Eigen::Vector2cd(0.1, 0.2).asDiagonal()));
  EXPECT_FALSE(indicator_single_occupancy(t, IntervalSet({{0, 1}})));
  EXPECT_FALSE(indicator_single_occupancy(s, IntervalSet({{-2, 0}, {5, 6}})));
}

TEST(Determinism, ThreadCountDoesNotChangeReports) {
  auto s = chain(8, {{0.2, 0.3}, {0.6, 0.7}}, 20000);
  s.sets = std::vector<SiteSet>{{0, 1, 2}, {5, 6, 7}};
  s.alpha = 0.2;
  expect_same(estimate_profile_event(s, {1}), estimate_profile_event(s, {8}));
  s.sets.reset();
  s.alpha.reset();
  s.sites = std::vector<std::size_t>{0, 7};
  expect_same(estimate_spectral_averaging(s, {1}), estimate_spectral_averaging(s, {3}));
  s.sites.reset();
  s.intervals = IntervalSet({{0.4, 0.5}});
  const auto a = estimate_minami(s, {1});
  const auto b = estimate_minami(s, {8});
  expect_same(a.factorial_moment, b.factorial_moment);
}

TEST(Validate, CrossFieldInvariants) {
  auto s = chain(4, {{0, 1}, {1, 2}});
  s.alpha = 0.5;
  EXPECT_THROW(validate(s), InvalidInput);
  s.sets = std::vector<SiteSet>{{0}};
  EXPECT_THROW(validate(s), InvalidInput);
  s.sets = std::vector<SiteSet>{{0}, {1}};
  EXPECT_NO_THROW(validate(s));
  s.sites = std::vector<std::size_t>{2, 2};
  EXPECT_THROW(validate(s), InvalidInput);
  s.sites = std::vector<std::size_t>{2, 9};
  EXPECT_THROW(validate(s), InvalidInput);
  s.sites.reset();
  s.n_samples = 0;
  EXPECT_THROW(validate(s), InvalidInput);
}
