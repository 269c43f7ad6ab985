#include "levelstat/algebraic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "levelstat/error.hpp"
#include "levelstat/parallel.hpp"

namespace levelstat {

namespace {

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

template <class Matrix>
Matrix without_index(const Matrix& a, Eigen::Index drop) {
  const Eigen::Index n = a.rows();
  Matrix out(n - 1, n - 1);
  for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
    if (r == drop) continue;
    for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
      if (c == drop) continue;
      out(rr, cc++) = a(r, c);
    }
    ++rr;
  }
  return out;
}

template <class Matrix>
double real_det(const Matrix& a) {
  if (a.rows() == 0) return 1.0;
  return std::real(a.partialPivLu().determinant());
}

// Product of row 2-norms: bounds |det| and sets the scale of P_E.
template <class Matrix>
double hadamard_scale(const Matrix& a) {
  double s = 1.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) s *= std::max(a.row(r).norm(), 1e-300);
  return s;
}

constexpr std::array<int, 12> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

struct Evaluation {
  Eigen::VectorXd values;    // P_{E_j}
  Eigen::MatrixXd jacobian;  // ∂P_{E_j}/∂V_{x_k}
  Eigen::VectorXd scales;    // Hadamard scale of H − E_j
};

template <class Matrix>
Evaluation evaluate_system(const MultiplicityProblem& problem, const Matrix& h) {
  const std::size_t n = problem.n();
  const auto dim = static_cast<Eigen::Index>(n);
  Evaluation ev{Eigen::VectorXd(dim), Eigen::MatrixXd(dim, dim), Eigen::VectorXd(dim)};
  const Matrix identity = Matrix::Identity(h.rows(), h.cols());
  for (std::size_t j = 0; j < n; ++j) {
    const Matrix shifted = h - problem.targets()[j] * identity;
    const auto jj = static_cast<Eigen::Index>(j);
    ev.values[jj] = real_det(shifted);
    ev.scales[jj] = hadamard_scale(shifted);
    for (std::size_t k = 0; k < n; ++k) {
      const auto x = static_cast<Eigen::Index>(problem.free_sites()[k]);
      ev.jacobian(jj, static_cast<Eigen::Index>(k)) = real_det(without_index(shifted, x));
    }
  }
  return ev;
}

Evaluation evaluate_system(const MultiplicityProblem& problem, const Eigen::VectorXd& free_values) {
  const Eigen::MatrixXcd h = problem.matrix(free_values);
  if (problem.real_hopping()) return evaluate_system(problem, Eigen::MatrixXd(h.real()));
  return evaluate_system(problem, h);
}

bool isolated(const Eigen::MatrixXd& jacobian, double tol, double* det_out) {
  const double det = jacobian.partialPivLu().determinant();
  if (det_out) *det_out = det;
  return std::abs(det) > tol * hadamard_scale(jacobian);
}

void check_frozen_block(const MultiplicityProblem& problem) {
  const std::size_t n_sites = problem.n_sites();
  std::vector<Eigen::Index> frozen;
  for (std::size_t x = 0; x < n_sites; ++x) {
    if (std::find(problem.free_sites().begin(), problem.free_sites().end(), x) == problem.free_sites().end()) {
      frozen.push_back(static_cast<Eigen::Index>(x));
    }
  }
  if (frozen.empty()) return;
  const Eigen::MatrixXcd h = problem.matrix(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.n())));
  const auto m = static_cast<Eigen::Index>(frozen.size());
  Eigen::MatrixXcd block(m, m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) block(r, c) = h(frozen[static_cast<std::size_t>(r)], frozen[static_cast<std::size_t>(c)]);
  }
  const SpectralData spec = eigendecompose(block);
  const double scale = 1.0 + spec.eigenvalues.cwiseAbs().maxCoeff();
  for (const double e : problem.targets()) {
    for (Eigen::Index k = 0; k < spec.eigenvalues.size(); ++k) {
      if (std::abs(spec.eigenvalues[k] - e) <= 1e-9 * scale) {
        throw DegenerateSpectrum("multiplicity: target " + std::to_string(e) +
                                 " is an eigenvalue of the frozen block; perturb the targets");
      }
    }
  }
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

struct StartOutcome {
  bool converged = false;
  Eigen::VectorXd root;
};

}  // namespace

MultiplicityProblem::MultiplicityProblem(const GraphSpec& graph, std::vector<std::size_t> free_sites,
                                         std::vector<double> frozen_potential, std::vector<double> targets,
                                         std::vector<double> onsite)
    : hopping_(build_hopping(graph)),
      free_sites_(std::move(free_sites)),
      onsite_(std::move(onsite)),
      targets_(std::move(targets)) {
  const std::size_t n_sites = graph.n_sites;
  if (free_sites_.empty()) throw InvalidInput("multiplicity: need at least one free site");
  if (targets_.size() != free_sites_.size()) {
    throw InvalidInput("multiplicity: need exactly one target per free site");
  }
  if (frozen_potential.size() != n_sites) {
    throw InvalidInput("multiplicity: frozen_potential needs one entry per site");
  }
  if (onsite_.empty()) onsite_.assign(n_sites, 0.0);
  if (onsite_.size() != n_sites) throw InvalidInput("multiplicity: onsite needs one entry per site");
  for (std::size_t a = 0; a < free_sites_.size(); ++a) {
    if (free_sites_[a] >= n_sites) throw InvalidInput("multiplicity: free site out of range");
    for (std::size_t b = a + 1; b < free_sites_.size(); ++b) {
      if (free_sites_[a] == free_sites_[b]) throw InvalidInput("multiplicity: repeated free site");
      if (targets_[a] == targets_[b]) throw InvalidInput("multiplicity: targets must be distinct");
    }
  }
  base_diagonal_.resize(n_sites);
  for (std::size_t x = 0; x < n_sites; ++x) base_diagonal_[x] = onsite_[x] + frozen_potential[x];
  for (std::size_t x : free_sites_) base_diagonal_[x] = onsite_[x];
  real_ = hopping_.imag().isZero(0.0);
}

Eigen::MatrixXcd MultiplicityProblem::matrix(const Eigen::VectorXd& free_values) const {
  if (static_cast<std::size_t>(free_values.size()) != free_sites_.size()) {
    throw InvalidInput("multiplicity: wrong number of free values");
  }
  Eigen::MatrixXcd h = hopping_;
  for (std::size_t x = 0; x < base_diagonal_.size(); ++x) {
    h(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = base_diagonal_[x];
  }
  for (std::size_t k = 0; k < free_sites_.size(); ++k) {
    const auto x = static_cast<Eigen::Index>(free_sites_[k]);
    h(x, x) += free_values[static_cast<Eigen::Index>(k)];
  }
  return h;
}

bool MultiplicityProblem::free_sites_decoupled() const {
  for (std::size_t x : free_sites_) {
    const auto r = static_cast<Eigen::Index>(x);
    for (Eigen::Index c = 0; c < hopping_.cols(); ++c) {
      if (c != r && hopping_(r, c) != Complex(0.0, 0.0)) return false;
    }
  }
  return true;
}

double char_poly_eval(const MultiplicityProblem& problem, const Eigen::VectorXd& free_values, double energy) {
  const Eigen::MatrixXcd h = problem.matrix(free_values);
  const Eigen::MatrixXcd shifted = h - energy * Eigen::MatrixXcd::Identity(h.rows(), h.cols());
  if (problem.real_hopping()) return real_det(Eigen::MatrixXd(shifted.real()));
  return real_det(shifted);
}

Eigen::VectorXd char_poly_gradient(const MultiplicityProblem& problem, const Eigen::VectorXd& free_values,
                                   double energy) {
  const Eigen::MatrixXcd h = problem.matrix(free_values);
  const Eigen::MatrixXcd shifted = h - energy * Eigen::MatrixXcd::Identity(h.rows(), h.cols());
  Eigen::VectorXd grad(static_cast<Eigen::Index>(problem.n()));
  for (std::size_t k = 0; k < problem.n(); ++k) {
    const auto x = static_cast<Eigen::Index>(problem.free_sites()[k]);
    grad[static_cast<Eigen::Index>(k)] = problem.real_hopping()
                                             ? real_det(without_index(Eigen::MatrixXd(shifted.real()), x))
                                             : real_det(without_index(shifted, x));
  }
  return grad;
}

SearchOptions default_search(const PotentialDistribution& dist, std::size_t n) {
  SearchOptions opts;
  const Support s = dist.support();
  opts.box_lo = s.lo - 0.5 * s.width();
  opts.box_hi = s.hi + 0.5 * s.width();
  opts.n_starts = 500 * factorial(n);
  return opts;
}

SolutionSet solve_multilinear_system(const MultiplicityProblem& problem, const SearchOptions& search) {
  const std::size_t n = problem.n();
  if (n > kPrimes.size()) throw InvalidInput("multiplicity: n too large for the Halton start sequence");
  if (!(search.box_lo < search.box_hi)) throw InvalidInput("multiplicity: empty search box");
  check_frozen_block(problem);

  const std::size_t n_starts = search.n_starts == 0 ? 500 * factorial(n) : search.n_starts;
  const auto dim = static_cast<Eigen::Index>(n);
  const double width = search.box_hi - search.box_lo;

  SolutionSet out;
  out.starts_used = n_starts;
  std::vector<Eigen::VectorXd> roots;

  ordered_map_fold<StartOutcome>(
      n_starts, search.threads,
      [&](std::uint64_t s) {
        Eigen::VectorXd x(dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
          x[k] = search.box_lo + width * radical_inverse(s + 1, kPrimes[static_cast<std::size_t>(k)]);
        }
        StartOutcome outcome;
        for (unsigned it = 0; it < search.max_iterations; ++it) {
          const Evaluation ev = evaluate_system(problem, x);
          const Eigen::FullPivLU<Eigen::MatrixXd> lu(ev.jacobian);
          if (!lu.isInvertible()) return outcome;
          const Eigen::VectorXd step = lu.solve(ev.values);
          x -= step;
          if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e8) return outcome;
          if (step.cwiseAbs().maxCoeff() <= search.newton_tol * (1.0 + x.cwiseAbs().maxCoeff())) break;
        }
        const Evaluation ev = evaluate_system(problem, x);
        for (Eigen::Index j = 0; j < dim; ++j) {
          if (!(std::abs(ev.values[j]) <= search.residual_tol * ev.scales[j])) return outcome;
        }
        outcome.converged = true;
        outcome.root = std::move(x);
        return outcome;
      },
      [&](std::uint64_t, const StartOutcome& o) {
        if (o.converged) roots.push_back(o.root);
      });
  out.converged = roots.size();

  std::sort(roots.begin(), roots.end(), lex_less);
  std::vector<Eigen::VectorXd> distinct;
  for (const auto& r : roots) {
    bool merged = false;
    for (const auto& d : distinct) {
      const double scale = 1.0 + std::max(r.cwiseAbs().maxCoeff(), d.cwiseAbs().maxCoeff());
      if ((r - d).cwiseAbs().maxCoeff() <= search.dedup_tol * scale) {
        merged = true;
        break;
      }
    }
    if (merged) {
      ++out.dedup_merges;
    } else {
      distinct.push_back(r);
    }
  }

  for (const auto& r : distinct) {
    double det = 0.0;
    if (isolated(evaluate_system(problem, r).jacobian, search.isolation_tol, &det)) {
      out.solutions.push_back(r);
      out.jacobian_dets.push_back(det);
    } else {
      ++out.rejected_singular;
    }
  }

  if (out.count() > factorial(n)) {
    throw BoundViolation("multiplicity: found " + std::to_string(out.count()) + " isolated roots, more than " +
                         std::to_string(n) + "! = " + std::to_string(factorial(n)));
  }
  return out;
}

SolutionSet diagonal_case_enumerate(const MultiplicityProblem& problem) {
  if (!problem.free_sites_decoupled()) {
    throw InvalidInput("diagonal_case_enumerate: free sites must carry no hopping");
  }
  const std::size_t n = problem.n();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SolutionSet out;
  do {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      v[static_cast<Eigen::Index>(j)] = problem.targets()[perm[j]] - problem.onsite()[problem.free_sites()[j]];
    }
    out.solutions.push_back(std::move(v));
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(out.solutions.begin(), out.solutions.end(), lex_less);
  for (const auto& v : out.solutions) {
    out.jacobian_dets.push_back(evaluate_system(problem, v).jacobian.partialPivLu().determinant());
  }
  return out;
}

JacobianCheck jacobian_condition(const MultiplicityProblem& problem, const Eigen::VectorXd& solution) {
  const std::size_t n = problem.n();
  const auto dim = static_cast<Eigen::Index>(n);
  const SpectralData spec = eigendecompose(problem.matrix(solution));
  if (simplicity_report(spec, default_gap_tolerance(spec)).degenerate) {
    throw DegenerateSpectrum("jacobian_condition: spectrum at the solution is degenerate");
  }

  // eigenvalue index carrying each target
  std::vector<Eigen::Index> index(n);
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::Index best = 0;
    (spec.eigenvalues.array() - problem.targets()[j]).abs().minCoeff(&best);
    index[j] = best;
    for (std::size_t i = 0; i < j; ++i) {
      if (index[i] == best) throw InvalidInput("jacobian_condition: two targets map to one eigenvalue");
    }
  }

  JacobianCheck check;
  check.jacobian_det = evaluate_system(problem, solution).jacobian.partialPivLu().determinant();

  Eigen::MatrixXd profile(dim, dim);
  double spectral_factor = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Eigen::Index m = index[j];
    for (std::size_t k = 0; k < n; ++k) {
      profile(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          spec.weight(static_cast<std::size_t>(m), problem.free_sites()[k]);
    }
    for (Eigen::Index other = 0; other < spec.eigenvalues.size(); ++other) {
      if (other != m) spectral_factor *= spec.eigenvalues[other] - spec.eigenvalues[m];
    }
  }
  check.profile_det = profile.partialPivLu().determinant();
  check.factored = check.profile_det * spectral_factor;
  const double scale = std::max({std::abs(check.jacobian_det), std::abs(check.factored), 1e-300});
  check.relative_error = std::abs(check.jacobian_det - check.factored) / scale;
  check.agrees = check.relative_error <= 1e-6;
  return check;
}

AntisymmetricOperator build_antisymmetric_operator(const Hamiltonian& h) {
  const std::size_t n = h.n_sites();
  if (n < 2) throw InvalidInput("build_antisymmetric_operator: needs at least 2 sites");
  const auto nn = static_cast<Eigen::Index>(n);

  AntisymmetricOperator op;
  op.n_sites = n;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) op.basis.emplace_back(x, y);
  }
  const auto pairs = static_cast<Eigen::Index>(op.basis.size());

  // K = H⊗1 − 1⊗H with product index (a, b) -> a*n + b
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(nn * nn, nn * nn);
  for (Eigen::Index a = 0; a < nn; ++a) {
    for (Eigen::Index b = 0; b < nn; ++b) {
      for (Eigen::Index x = 0; x < nn; ++x) {
        k(a * nn + b, x * nn + b) += h.matrix(a, x);
        k(a * nn + b, a * nn + x) -= h.matrix(b, x);
      }
    }
  }
  Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(nn * nn, pairs);
  const double r = 1.0 / std::numbers::sqrt2;
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const auto [x, y] = op.basis[static_cast<std::size_t>(p)];
    basis(static_cast<Eigen::Index>(x) * nn + static_cast<Eigen::Index>(y), p) = r;
    basis(static_cast<Eigen::Index>(y) * nn + static_cast<Eigen::Index>(x), p) = -r;
  }
  const Eigen::MatrixXcd kb = k * basis;
  op.matrix = kb.adjoint() * kb;
  return op;
}

Eigen::VectorXcd antisymmetric_eigenvector(const SpectralData& spec, const AntisymmetricOperator& op,
                                           std::size_t j, std::size_t k) {
  if (j >= spec.size() || k >= spec.size() || j == k) {
    throw InvalidInput("antisymmetric_eigenvector: need distinct eigenindices in range");
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(op.basis.size()));
  const auto jj = static_cast<Eigen::Index>(j);
  const auto kk = static_cast<Eigen::Index>(k);
  for (std::size_t p = 0; p < op.basis.size(); ++p) {
    const auto x = static_cast<Eigen::Index>(op.basis[p].first);
    const auto y = static_cast<Eigen::Index>(op.basis[p].second);
    v[static_cast<Eigen::Index>(p)] =
        spec.eigenvectors(x, jj) * spec.eigenvectors(y, kk) - spec.eigenvectors(x, kk) * spec.eigenvectors(y, jj);
  }
  return v;
}

DetM det_M(const Hamiltonian& h) {
  const AntisymmetricOperator op = build_antisymmetric_operator(h);
  const SpectralData spec = eigendecompose(h);
  DetM out;
  out.assembled = std::real(op.matrix.partialPivLu().determinant());
  out.spectral = 1.0;
  for (Eigen::Index j = 0; j < spec.eigenvalues.size(); ++j) {
    for (Eigen::Index k = j + 1; k < spec.eigenvalues.size(); ++k) {
      const double gap = spec.eigenvalues[j] - spec.eigenvalues[k];
      out.spectral *= gap * gap;
    }
  }
  const double scale = std::max(std::abs(out.spectral), 1e-300);
  out.relative_difference = std::abs(out.assembled - out.spectral) / scale;
  return out;
}

std::vector<double> chebyshev_points(double lo, double hi, std::size_t count) {
  std::vector<double> pts(count);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (std::size_t k = 0; k < count; ++k) {
    pts[k] = mid + half * std::cos(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(count));
  }
  return pts;
}

DegreeProbe degree_probe(const Hamiltonian& h, std::size_t site, const std::vector<double>& points) {
  const std::size_t n = h.n_sites();
  if (site >= n) throw InvalidInput("degree_probe: site out of range");
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("degree_probe: evaluation points must be distinct");
  }
  if (points.size() < n + 2) throw InvalidInput("degree_probe: need at least |Λ| + 2 points");

  const auto m = static_cast<Eigen::Index>(points.size());
  const double lo = sorted.front();
  const double hi = sorted.back();
  Eigen::VectorXd values(m);
  Eigen::MatrixXd cheb(m, m - 1);
  const auto x = static_cast<Eigen::Index>(site);
  for (Eigen::Index i = 0; i < m; ++i) {
    Hamiltonian probe = h;
    probe.matrix(x, x) = points[static_cast<std::size_t>(i)];
    values[i] = det_M(probe).assembled;
    const double t = (2.0 * points[static_cast<std::size_t>(i)] - lo - hi) / (hi - lo);
    for (Eigen::Index d = 0; d < m - 1; ++d) {
      cheb(i, d) = d == 0 ? 1.0 : d == 1 ? t : 2.0 * t * cheb(i, d - 1) - cheb(i, d - 2);
    }
  }

  DegreeProbe out;
  out.n_sites = n;
  const double norm = values.norm();
  if (norm == 0.0) {
    out.within_site_bound = true;
    return out;
  }
  for (Eigen::Index d = 0; d < m - 1; ++d) {
    const Eigen::MatrixXd basis = cheb.leftCols(d + 1);
    const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(values);
    if ((basis * coef - values).norm() <= 1e-8 * norm) {
      out.degree = static_cast<std::size_t>(d);
      out.within_site_bound = out.degree <= n;
      return out;
    }
  }
  throw NumericalError("degree_probe: no polynomial of degree <= " + std::to_string(m - 2) +
                       " fits within 1e-8; add evaluation points");
}

}  // namespace levelstat
