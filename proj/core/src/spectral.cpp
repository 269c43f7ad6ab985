#include "levelstat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "levelstat/error.hpp"

namespace levelstat {

IntervalSet::IntervalSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (const Interval& i : intervals_) {
    if (!(i.lo < i.hi)) {
      throw InvalidInput("interval [" + std::to_string(i.lo) + ", " + std::to_string(i.hi) +
                         ") has non-positive length");
    }
  }
  for (std::size_t a = 0; a < intervals_.size() && disjoint_; ++a) {
    for (std::size_t b = a + 1; b < intervals_.size(); ++b) {
      if (intervals_[a].lo < intervals_[b].hi && intervals_[b].lo < intervals_[a].hi) {
        disjoint_ = false;
        break;
      }
    }
  }
}

SpectralData eigendecompose(const Eigen::MatrixXcd& matrix) {
  SpectralData out;
  if (matrix.imag().isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix.real());
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver did not converge");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver did not converge");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
  }
  return out;
}

SpectralData eigendecompose(const Hamiltonian& h) { return eigendecompose(h.matrix); }

std::size_t count_in_interval(const SpectralData& spec, const Interval& interval) {
  const double* first = spec.eigenvalues.data();
  const double* last = first + spec.eigenvalues.size();
  const double* lo = std::lower_bound(first, last, interval.lo);
  const double* hi = std::lower_bound(lo, last, interval.hi);
  return static_cast<std::size_t>(hi - lo);
}

double projector_entry(const SpectralData& spec, const Interval& interval, std::size_t site) {
  if (site >= spec.size()) {
    throw InvalidInput("projector_entry: site " + std::to_string(site) + " out of range");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    if (interval.contains(spec.eigenvalues[static_cast<Eigen::Index>(j)])) sum += spec.weight(j, site);
  }
  return sum;
}

double abs_determinant(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  return std::abs(m.partialPivLu().determinant());
}

namespace {

void require_distinct(std::span<const std::size_t> items, std::size_t bound, const char* what) {
  for (std::size_t a = 0; a < items.size(); ++a) {
    if (items[a] >= bound) {
      throw InvalidInput(std::string(what) + " " + std::to_string(items[a]) + " out of range");
    }
    for (std::size_t b = a + 1; b < items.size(); ++b) {
      if (items[a] == items[b]) {
        throw InvalidInput(std::string("repeated ") + what + " " + std::to_string(items[a]));
      }
    }
  }
}

void check_profile_args(const SpectralData& spec, std::span<const std::size_t> eigenindices,
                        std::span<const SiteSet> sets) {
  if (eigenindices.empty()) throw InvalidInput("profile: need at least one eigenindex");
  if (sets.size() != eigenindices.size()) {
    throw InvalidInput("profile: number of sets must equal the number of eigenindices");
  }
  require_distinct(eigenindices, spec.size(), "eigenindex");
  for (const SiteSet& b : sets) {
    if (b.empty()) throw InvalidInput("profile: site sets must be nonempty");
    for (std::size_t x : b) {
      if (x >= spec.size()) throw InvalidInput("profile: site " + std::to_string(x) + " out of range");
    }
  }
}

}  // namespace

double occupation_determinant(const SpectralData& spec, const IntervalSet& intervals,
                              std::span<const std::size_t> sites) {
  const std::size_t n = intervals.size();
  if (n == 0) throw InvalidInput("occupation_determinant: need at least one interval");
  if (sites.size() != n) throw InvalidInput("occupation_determinant: need one site per interval");
  if (n > spec.size()) throw InvalidInput("occupation_determinant: n exceeds |Λ|");
  require_distinct(sites, spec.size(), "site");

  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m(dim, dim);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          projector_entry(spec, intervals[j], sites[k]);
    }
  }
  return abs_determinant(m);
}

double profile_determinant_sum(const SpectralData& spec, std::span<const std::size_t> eigenindices,
                               std::span<const SiteSet> sets) {
  check_profile_args(spec, eigenindices, sets);
  const std::size_t n = eigenindices.size();
  const auto dim = static_cast<Eigen::Index>(n);

  // weights(m, x) = |ψ_{j_m}(x)|² for every site, reused by each summand
  Eigen::MatrixXd weights(dim, static_cast<Eigen::Index>(spec.size()));
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t x = 0; x < spec.size(); ++x) {
      weights(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(x)) = spec.weight(eigenindices[m], x);
    }
  }

  std::vector<std::size_t> odometer(n, 0);
  Eigen::MatrixXd summand(dim, dim);
  double total = 0.0;
  while (true) {
    for (std::size_t k = 0; k < n; ++k) {
      summand.col(static_cast<Eigen::Index>(k)) = weights.col(static_cast<Eigen::Index>(sets[k][odometer[k]]));
    }
    total += abs_determinant(summand);

    std::size_t k = 0;
    while (k < n && ++odometer[k] == sets[k].size()) odometer[k++] = 0;
    if (k == n) break;
  }
  return total;
}

double occupation_minor(const SpectralData& spec, std::span<const std::size_t> eigenindices,
                        std::span<const SiteSet> sets) {
  check_profile_args(spec, eigenindices, sets);
  const std::size_t n = eigenindices.size();
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double occ = 0.0;
      for (std::size_t x : sets[k]) occ += spec.weight(eigenindices[j], x);
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = occ;
    }
  }
  return abs_determinant(m);
}

namespace {

Eigen::VectorXd eigenvalues_only(const Eigen::MatrixXcd& h) {
  if (h.imag().isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solve did not converge");
    return solver.eigenvalues();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solve did not converge");
  return solver.eigenvalues();
}

}  // namespace

FeynmanHellmann feynman_hellmann_check(const GraphSpec& graph, const std::vector<double>& potential,
                                       std::size_t site, std::size_t eigenindex, double step) {
  if (!(step > 0.0)) throw InvalidInput("feynman_hellmann_check: step must be positive");
  const Hamiltonian h = assemble_hamiltonian(build_hopping(graph), potential);
  const std::size_t n = h.n_sites();
  if (site >= n) throw InvalidInput("feynman_hellmann_check: site out of range");
  if (eigenindex >= n) throw InvalidInput("feynman_hellmann_check: eigenindex out of range");

  const SpectralData spec = eigendecompose(h);
  const auto& e = spec.eigenvalues;
  const auto j = static_cast<Eigen::Index>(eigenindex);
  const double norm = std::max(std::abs(e[0]), std::abs(e[e.size() - 1]));
  double gap = std::numeric_limits<double>::infinity();
  if (j > 0) gap = std::min(gap, e[j] - e[j - 1]);
  if (j + 1 < e.size()) gap = std::min(gap, e[j + 1] - e[j]);
  if (!(gap > 10.0 * step * norm)) {
    throw DegenerateSpectrum("feynman_hellmann_check: eigenvalue " + std::to_string(eigenindex) +
                             " has gap " + std::to_string(gap) + " below 10*h*|H|");
  }

  const auto x = static_cast<Eigen::Index>(site);
  Eigen::MatrixXcd plus = h.matrix;
  Eigen::MatrixXcd minus = h.matrix;
  plus(x, x) += step;
  minus(x, x) -= step;
  const double up = eigenvalues_only(plus)[j];
  const double down = eigenvalues_only(minus)[j];
  return {spec.weight(eigenindex, site), (up - down) / (2.0 * step)};
}

double default_gap_tolerance(const SpectralData& spec) {
  if (spec.size() == 0) return 1e-12;
  const double diameter = spec.eigenvalues[spec.eigenvalues.size() - 1] - spec.eigenvalues[0];
  return 1e-12 * (1.0 + diameter);
}

SimplicityReport simplicity_report(const SpectralData& spec, double gap_tolerance) {
  SimplicityReport r;
  r.gap_tolerance = gap_tolerance;
  r.min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 1; j < spec.eigenvalues.size(); ++j) {
    r.min_gap = std::min(r.min_gap, spec.eigenvalues[j] - spec.eigenvalues[j - 1]);
  }
  r.degenerate = r.min_gap < gap_tolerance;
  return r;
}

}  // namespace levelstat
