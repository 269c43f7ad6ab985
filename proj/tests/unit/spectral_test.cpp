#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "levelstat/error.hpp"
#include "levelstat/hamiltonian.hpp"
#include "levelstat/spectral.hpp"

using namespace levelstat;

namespace {

SpectralData from_real(const Eigen::MatrixXd& m) { return eigendecompose(Eigen::MatrixXcd(m.cast<Complex>())); }

SpectralData random_chain(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  const auto dist = PotentialDistribution::uniform(0, 1);
  return eigendecompose(assemble_hamiltonian(build_hopping(GraphSpec::chain(n)), sample_potential(dist, seed, index, n)));
}

SpectralData with_eigenvalues(std::vector<double> values) {
  SpectralData s;
  s.eigenvalues = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  s.eigenvectors = Eigen::MatrixXcd::Identity(s.eigenvalues.size(), s.eigenvalues.size());
  return s;
}

}  // namespace

TEST(Eigendecompose, DiagonalMatrix) {
  const auto s = from_real(Eigen::Vector3d(3, 1, 2).asDiagonal().toDenseMatrix());
  EXPECT_EQ(s.eigenvalues, Eigen::Vector3d(1, 2, 3));
  EXPECT_TRUE(s.eigenvectors.cwiseAbs().isApprox(Eigen::MatrixXd((Eigen::Matrix3d() << 0, 0, 1, 1, 0, 0, 0, 1, 0).finished()).cast<Complex>()));
}

TEST(Eigendecompose, OffDiagonalPair) {
  const auto s = from_real((Eigen::Matrix2d() << 0, 1, 1, 0).finished());
  EXPECT_NEAR(s.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-15);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(std::abs(s.eigenvectors(0, j)), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(s.eigenvectors(1, j)), 1 / std::sqrt(2.0), 1e-15);
  }
}

TEST(Eigendecompose, OrthonormalAndSmallResidual) {
  const auto t = build_hopping(GraphSpec::from_edges(4, {{0, 1, Complex(1, 1)}, {1, 2, 0.5}, {2, 3, Complex(0, -2)}, {3, 0, 1}}));
  const auto h = assemble_hamiltonian(t, sample_potential(PotentialDistribution::uniform(-1, 1), 3, 0, 4));
  const auto s = eigendecompose(h);
  const Eigen::MatrixXcd gram = s.eigenvectors.adjoint() * s.eigenvectors;
  EXPECT_LE((gram - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  const double norm = h.matrix.cwiseAbs().rowwise().sum().maxCoeff();
  for (Eigen::Index j = 0; j < 4; ++j) {
    const Eigen::VectorXcd r = h.matrix * s.eigenvectors.col(j) - s.eigenvalues[j] * s.eigenvectors.col(j);
    EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-10 * (1 + norm));
  }
  for (Eigen::Index j = 1; j < 4; ++j) EXPECT_LE(s.eigenvalues[j - 1], s.eigenvalues[j]);
}

TEST(CountInInterval, HalfOpenCounts) {
  const auto s = with_eigenvalues({-1, 1});
  EXPECT_EQ(count_in_interval(s, {0, 2}), 1u);
  EXPECT_EQ(count_in_interval(s, {2, 3}), 0u);
  EXPECT_EQ(count_in_interval(s, {-1, 1}), 1u);
  EXPECT_EQ(count_in_interval(with_eigenvalues({0.5, 0.5 + 1e-15}), {0, 1}), 2u);
}

TEST(CountInInterval, AdditiveOverAdjacentCells) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto s = random_chain(7, 1, i);
    EXPECT_EQ(count_in_interval(s, {-1, 0.4}) + count_in_interval(s, {0.4, 2.5}), count_in_interval(s, {-1, 2.5}));
  }
}

TEST(ProjectorEntry, SingleSite) {
  const auto s = from_real(Eigen::MatrixXd::Constant(1, 1, 0.3));
  EXPECT_DOUBLE_EQ(projector_entry(s, {0, 0.5}, 0), 1.0);
  EXPECT_DOUBLE_EQ(projector_entry(s, {0.5, 1}, 0), 0.0);
  EXPECT_THROW((void)projector_entry(s, {0, 1}, 1), InvalidInput);
}

TEST(ProjectorEntry, PartitionIsComplete) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto s = random_chain(6, 2, i);
    for (std::size_t x = 0; x < 6; ++x) {
      const double total = projector_entry(s, {-10, -0.5}, x) + projector_entry(s, {-0.5, 0.7}, x) +
                           projector_entry(s, {0.7, 10}, x);
      EXPECT_NEAR(total, 1.0, 1e-10);
      EXPECT_NEAR(projector_entry(s, {-10, 10}, x), 1.0, 1e-10);
    }
  }
}

TEST(OccupationDeterminant, Examples) {
  const auto s = random_chain(5, 3, 0);
  const std::array<std::size_t, 1> one{2};
  EXPECT_DOUBLE_EQ(occupation_determinant(s, IntervalSet({{-0.5, 1.5}}), one), projector_entry(s, {-0.5, 1.5}, 2));
  const std::array<std::size_t, 2> two{0, 3};
  EXPECT_EQ(occupation_determinant(s, IntervalSet({{-0.5, 1.5}, {-0.5, 1.5}}), two), 0.0);

  const auto d = from_real(Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix());
  const std::array<std::size_t, 2> sites{0, 1};
  EXPECT_DOUBLE_EQ(occupation_determinant(d, IntervalSet({{-0.5, 0.5}, {0.5, 1.5}}), sites), 1.0);
  const std::array<std::size_t, 2> repeated{1, 1};
  EXPECT_THROW((void)occupation_determinant(d, IntervalSet({{-0.5, 0.5}, {0.5, 1.5}}), repeated), InvalidInput);
}

TEST(OccupationDeterminant, DisjointIntervalsBoundedByOne) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.5, 3.5);
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto s = random_chain(6, 4, i);
    double cut1 = u(rng);
    double cut2 = u(rng);
    if (cut1 > cut2) std::swap(cut1, cut2);
    if (cut2 - cut1 < 1e-6) continue;
    const IntervalSet set({{-3, cut1}, {cut1, cut2}, {cut2, 4}});
    const std::array<std::size_t, 3> sites{static_cast<std::size_t>(i % 6), static_cast<std::size_t>((i + 2) % 6),
                                           static_cast<std::size_t>((i + 5) % 6)};
    EXPECT_LE(occupation_determinant(s, set, sites), 1.0 + 1e-12);
  }
}

TEST(ProfileDeterminant, Examples) {
  const auto s = random_chain(4, 5, 1);
  const std::array<std::size_t, 1> j1{2};
  const std::vector<SiteSet> all{{0, 1, 2, 3}};
  EXPECT_NEAR(profile_determinant_sum(s, j1, all), 1.0, 1e-12);
  EXPECT_NEAR(occupation_minor(s, j1, all), 1.0, 1e-12);

  const auto d = from_real(Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix());
  const std::array<std::size_t, 2> j2{0, 1};
  const std::vector<SiteSet> split{{0}, {1}};
  EXPECT_DOUBLE_EQ(profile_determinant_sum(d, j2, split), 1.0);
  EXPECT_DOUBLE_EQ(occupation_minor(d, j2, split), 1.0);

  const std::vector<SiteSet> same{{2}, {2}};
  const std::array<std::size_t, 2> j3{0, 3};
  EXPECT_EQ(profile_determinant_sum(s, j3, same), 0.0);
  const std::vector<SiteSet> same_big{{0, 2}, {0, 2}};
  EXPECT_NEAR(occupation_minor(s, j3, same_big), 0.0, 1e-15);
  EXPECT_THROW((void)profile_determinant_sum(s, std::array<std::size_t, 2>{1, 1}, same), InvalidInput);
  EXPECT_THROW((void)profile_determinant_sum(s, std::array<std::size_t, 2>{1, 4}, same), InvalidInput);
}

TEST(ProfileDeterminant, FullSetsBoundedByFactorial) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    const auto s = random_chain(5, 6, i);
    const SiteSet all{0, 1, 2, 3, 4};
    EXPECT_LE(profile_determinant_sum(s, std::array<std::size_t, 2>{0, 3}, std::vector<SiteSet>{all, all}), 2.0 + 1e-12);
    EXPECT_LE(profile_determinant_sum(s, std::array<std::size_t, 3>{0, 2, 4}, std::vector<SiteSet>{all, all, all}),
              6.0 + 1e-12);
  }
}

TEST(ProfileDeterminant, DominatesOccupationMinor) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto s = random_chain(6, 7, i);
    const std::vector<SiteSet> sets{{0, 1, 2}, {2, 3, 5}};
    const std::array<std::size_t, 2> idx{i % 6, (i + 1 + i / 6 % 5) % 6};
    if (idx[0] == idx[1]) continue;
    EXPECT_GE(profile_determinant_sum(s, idx, sets) + 1e-13, occupation_minor(s, idx, sets));
  }
}

TEST(FeynmanHellmann, TwoSiteTopEigenvalue) {
  const auto g = GraphSpec::from_edges(2, {{0, 1, 1.0}});
  const auto fh = feynman_hellmann_check(g, {0.0, 0.0}, 0, 1, 1e-5);
  EXPECT_NEAR(fh.analytic, 0.5, 1e-14);
  EXPECT_NEAR(fh.numeric, 0.5, 1e-9);
}

TEST(FeynmanHellmann, SingleSiteIsExact) {
  const auto fh = feynman_hellmann_check(GraphSpec::chain(1), {0.25}, 0, 0, 0.125);
  EXPECT_EQ(fh.analytic, 1.0);
  EXPECT_EQ(fh.numeric, 1.0);
}

TEST(FeynmanHellmann, DecoupledSite) {
  const auto fh = feynman_hellmann_check(GraphSpec::from_edges(2, {}), {0.0, 5.0}, 1, 0, 1e-5);
  EXPECT_EQ(fh.analytic, 0.0);
  EXPECT_EQ(fh.numeric, 0.0);
}

TEST(FeynmanHellmann, RefusesDegenerateLevel) {
  EXPECT_THROW((void)feynman_hellmann_check(GraphSpec::from_edges(2, {}), {1.0, 1.0}, 0, 0, 1e-5), DegenerateSpectrum);
}

TEST(SimplicityReport, Examples) {
  const auto r = simplicity_report(with_eigenvalues({-1, 1}), 1e-12);
  EXPECT_EQ(r.min_gap, 2.0);
  EXPECT_FALSE(r.degenerate);
  EXPECT_TRUE(simplicity_report(with_eigenvalues({0, 0}), 1e-300).degenerate);
  EXPECT_TRUE(std::isinf(simplicity_report(with_eigenvalues({4}), 1e-12).min_gap));
}

TEST(SimplicityReport, TwoSiteGapNeverBelowTwiceCoupling) {
  const auto t = build_hopping(GraphSpec::from_edges(2, {{0, 1, 1.0}}));
  const auto dist = PotentialDistribution::uniform(-3, 3);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto s = eigendecompose(assemble_hamiltonian(t, sample_potential(dist, 8, i, 2)));
    EXPECT_GE(simplicity_report(s, 1e-12).min_gap, 2.0 - 1e-12);
  }
}

TEST(IntervalSet, DisjointFlag) {
  EXPECT_TRUE(IntervalSet({{0, 1}, {1, 2}}).pairwise_disjoint());
  EXPECT_FALSE(IntervalSet({{0, 1}, {0.5, 2}}).pairwise_disjoint());
  EXPECT_THROW(IntervalSet({{1, 1}}), InvalidInput);
}
