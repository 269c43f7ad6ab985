#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "levelstat/distribution.hpp"
#include "levelstat/error.hpp"
#include "levelstat/graph.hpp"
#include "levelstat/hamiltonian.hpp"
#include "levelstat/random.hpp"
#include "levelstat/spectral.hpp"

using namespace levelstat;

TEST(BuildHopping, ThreeSiteChain) {
  const Eigen::MatrixXcd t = build_hopping(GraphSpec::chain(3));
  Eigen::MatrixXcd expected(3, 3);
  expected << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(t, expected);
}

TEST(BuildHopping, EmptyEdgeListGivesZero) {
  EXPECT_TRUE(build_hopping(GraphSpec::from_edges(2, {})).isZero(0.0));
}

TEST(BuildHopping, ComplexWeightIsConjugated) {
  const Eigen::MatrixXcd t = build_hopping(GraphSpec::from_edges(2, {{0, 1, Complex(0, 1)}}));
  EXPECT_EQ(t(0, 1), Complex(0, 1));
  EXPECT_EQ(t(1, 0), Complex(0, -1));
}

TEST(BuildHopping, RejectsMalformedGraphs) {
  EXPECT_THROW((void)GraphSpec::from_edges(2, {{1, 1, 1.0}}), InvalidInput);
  EXPECT_THROW((void)GraphSpec::from_edges(2, {{0, 2, 1.0}}), InvalidInput);
  EXPECT_THROW((void)GraphSpec::from_edges(2, {{0, 1, Complex(0, 1)}, {1, 0, Complex(0, 1)}}), InvalidInput);
  EXPECT_NO_THROW((void)GraphSpec::from_edges(2, {{0, 1, Complex(0, 1)}, {1, 0, Complex(0, -1)}}));
}

TEST(BuildHopping, TorusHasFourNeighbours) {
  const Eigen::MatrixXcd t = build_hopping(GraphSpec::torus(3, 4));
  for (Eigen::Index r = 0; r < t.rows(); ++r) EXPECT_DOUBLE_EQ(t.row(r).cwiseAbs().sum(), 4.0);
  EXPECT_THROW((void)GraphSpec::torus(2, 3), InvalidInput);
}

TEST(Philox, KnownAnswers) {
  const Philox4x32 zero(0);
  EXPECT_EQ(zero({0, 0, 0, 0}), (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  const Philox4x32 pi(0x299f31d0a4093822ULL);
  EXPECT_EQ(pi({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}),
            (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(SamplePotential, UniformStaysInSupport) {
  const auto dist = PotentialDistribution::uniform(0.0, 1.0);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    for (double v : sample_potential(dist, 99, i, 5).values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(SamplePotential, ReplayIsBitIdentical) {
  const auto dist = PotentialDistribution::triangular(-2.0, 3.0);
  const auto a = sample_potential(dist, 5, 12345, 8);
  const auto b = sample_potential(dist, 5, 12345, 8);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, sample_potential(dist, 6, 12345, 8).values);
}

TEST(SamplePotential, SiteValueIndependentOfVolume) {
  const auto dist = PotentialDistribution::uniform(0.0, 1.0);
  const auto small = sample_potential(dist, 3, 7, 2);
  const auto large = sample_potential(dist, 3, 7, 10);
  EXPECT_EQ(small.values[0], large.values[0]);
  EXPECT_EQ(small.values[1], large.values[1]);
}

TEST(SamplePotential, UniformMeanOverMillionDraws) {
  const auto dist = PotentialDistribution::uniform(0.0, 1.0);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < 1000000; ++i) sum += sample_potential(dist, 42, i, 1).values[0];
  EXPECT_NEAR(sum / 1e6, 0.5, 0.002);
}

TEST(SamplePotential, PiecewiseQuantileMatchesCdf) {
  const auto dist = PotentialDistribution::piecewise_constant({0.0, 0.5, 2.0}, {1.5, 1.0 / 6.0});
  for (double u : {0.0, 0.1, 0.5, 0.75, 0.9, 0.999}) EXPECT_NEAR(dist.cdf(dist.quantile(u)), u, 1e-12);
  EXPECT_DOUBLE_EQ(dist.rho_inf(), 1.5);
  EXPECT_THROW((void)PotentialDistribution::piecewise_constant({0.0, 1.0}, {0.9}), InvalidInput);
}

TEST(DensityBound, StandardLaws) {
  EXPECT_DOUBLE_EQ(density_bound(PotentialDistribution::uniform(0, 1)), 1.0);
  EXPECT_DOUBLE_EQ(density_bound(PotentialDistribution::uniform(-1, 1)), 0.5);
  EXPECT_DOUBLE_EQ(density_bound(PotentialDistribution::triangular(0, 1)), 2.0);
}

TEST(DensityBound, DensityNeverExceedsBoundAndIntegratesToOne) {
  for (const auto& dist : {PotentialDistribution::uniform(-1, 2), PotentialDistribution::triangular(0, 4),
                           PotentialDistribution::piecewise_constant({0, 1, 3}, {0.8, 0.1})}) {
    const Support s = dist.support();
    const auto& cuts = dist.breakpoints();
    double mass = 0.0;
    // midpoint rule is exact for densities linear between breakpoints
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const int n = 20000;
      const double h = (cuts[c + 1] - cuts[c]) / n;
      for (int i = 0; i < n; ++i) {
        const double v = cuts[c] + (i + 0.5) * h;
        EXPECT_LE(dist.density(v), dist.rho_inf());
        mass += dist.density(v) * h;
      }
    }
    EXPECT_NEAR(mass, 1.0, 1e-10) << dist.describe();
    EXPECT_NEAR(dist.cdf(s.hi), 1.0, 1e-12);
  }
}

TEST(AssembleHamiltonian, ThreeChainSpectrum) {
  const auto h = assemble_hamiltonian(build_hopping(GraphSpec::chain(3)), std::vector<double>{0, 0, 0});
  const auto spec = eigendecompose(h);
  EXPECT_NEAR(spec.eigenvalues[0], -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(spec.eigenvalues[1], 0.0, 1e-14);
  EXPECT_NEAR(spec.eigenvalues[2], std::sqrt(2.0), 1e-14);
}

TEST(AssembleHamiltonian, SingleSite) {
  const auto h = assemble_hamiltonian(build_hopping(GraphSpec::chain(1)), std::vector<double>{0.3});
  EXPECT_EQ(h.matrix(0, 0), Complex(0.3, 0));
}

TEST(AssembleHamiltonian, ConstantShiftMovesSpectrum) {
  const auto t = build_hopping(GraphSpec::torus(3, 3, 0.7));
  const auto dist = PotentialDistribution::uniform(0, 1);
  auto v = sample_potential(dist, 1, 0, 9);
  const auto base = eigendecompose(assemble_hamiltonian(t, v));
  for (double& x : v.values) x += 5.0;
  const auto shifted = eigendecompose(assemble_hamiltonian(t, v));
  for (Eigen::Index j = 0; j < 9; ++j) EXPECT_NEAR(shifted.eigenvalues[j], base.eigenvalues[j] + 5.0, 1e-13);
}

TEST(AssembleHamiltonian, ExactlyHermitian) {
  const auto t = build_hopping(GraphSpec::from_edges(3, {{0, 1, Complex(0.3, -0.7)}, {1, 2, Complex(-1, 2)}}));
  const auto h = assemble_hamiltonian(t, sample_potential(PotentialDistribution::uniform(0, 1), 8, 3, 3));
  EXPECT_EQ((h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AssembleHamiltonian, DimensionMismatch) {
  EXPECT_THROW((void)assemble_hamiltonian(build_hopping(GraphSpec::chain(3)), std::vector<double>{0, 0}),
               InvalidInput);
}
