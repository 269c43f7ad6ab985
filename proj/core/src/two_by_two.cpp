#include "levelstat/two_by_two.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levelstat/error.hpp"
#include "levelstat/hamiltonian.hpp"
#include "levelstat/parallel.hpp"

namespace levelstat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadratureTolerance = 1e-9;
constexpr double kMaxQuadratureError = 1e-6;

void require_coupling(const TwoByTwoModel& model, const char* who) {
  if (!(model.abs_c() > 0.0)) throw DomainError(std::string(who) + ": requires |c| > 0");
}

// Integrates the ordered-pair density over a rectangle in (E_1, E_2) using
// coordinates s = E_1 + E_2 and u = √(E_1 − E_2 − 2|c|). In those coordinates
// dE_1 dE_2 = u ds du and the density carries a factor 1/u, so the integrand
//   Σ_branches  g / √(u² + 4|c|) · ϱ(ω_1) ϱ(ω_2),   g = 2|c| + u²,
// is bounded. For fixed u the ϱ-product is a polynomial of degree <= 2 in s
// between breakpoints, so the inner integral is exact with 3-point Gauss.
class EdgeIntegrator {
 public:
  EdgeIntegrator(const TwoByTwoModel& model, const PotentialDistribution& dist)
      : model_(model), dist_(dist), c_(model.abs_c()), support_(dist.support()) {}

  QuadratureResult integrate(double p1, double q1, double p2, double q2, double u_cap = kInf) const {
    // gap range reachable inside the rectangle and inside the support
    const double spread = support_.width();
    const double offset = std::abs(model_.a - model_.b);
    const double delta_min = std::max(0.0, offset - spread);
    const double delta_max = offset + spread;
    double u_lo = std::sqrt(gap_excess(delta_min));
    double u_hi = std::sqrt(gap_excess(delta_max));
    if (std::isfinite(p1) && std::isfinite(q2)) u_lo = std::max(u_lo, std::sqrt(std::max(0.0, p1 - q2 - 2.0 * c_)));
    if (std::isfinite(q1) && std::isfinite(p2)) {
      const double g_top = q1 - p2;
      if (g_top <= 2.0 * c_) return {};
      u_hi = std::min(u_hi, std::sqrt(g_top - 2.0 * c_));
    }
    u_hi = std::min(u_hi, u_cap);
    if (!(u_lo < u_hi)) return {};

    auto f = [&](double u) { return inner(u, p1, q1, p2, q2); };
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, u_lo, u_hi, 20, kQuadratureTolerance, &error);
    if (!(error <= kMaxQuadratureError)) {
      throw NumericalError("two-by-two quadrature error estimate " + std::to_string(error) + " exceeds 1e-6");
    }
    return {value, error};
  }

 private:
  // g − 2|c| for g = √(δ² + 4|c|²), written to avoid cancellation.
  [[nodiscard]] double gap_excess(double delta) const {
    return delta * delta / (std::sqrt(delta * delta + 4.0 * c_ * c_) + 2.0 * c_);
  }

  [[nodiscard]] double inner(double u, double p1, double q1, double p2, double q2) const {
    const double root = std::sqrt(u * u + 4.0 * c_);
    if (root == 0.0) return 0.0;
    const double g = 2.0 * c_ + u * u;
    const double d = u * root;
    const double a = model_.a;
    const double b = model_.b;
    const double lo = support_.lo;
    const double hi = support_.hi;

    double total = 0.0;
    for (const double sigma : {1.0, -1.0}) {
      const double s_lo = std::max({2.0 * p1 - g, 2.0 * p2 + g, 2.0 * lo + 2.0 * a - sigma * d,
                                    2.0 * lo + 2.0 * b + sigma * d});
      const double s_hi = std::min({2.0 * q1 - g, 2.0 * q2 + g, 2.0 * hi + 2.0 * a - sigma * d,
                                    2.0 * hi + 2.0 * b + sigma * d});
      if (!(s_lo < s_hi)) continue;

      cuts_.assign({s_lo, s_hi});
      for (const double bp : dist_.breakpoints()) {
        for (const double s : {2.0 * bp + 2.0 * a - sigma * d, 2.0 * bp + 2.0 * b + sigma * d}) {
          if (s > s_lo && s < s_hi) cuts_.push_back(s);
        }
      }
      std::sort(cuts_.begin(), cuts_.end());

      for (std::size_t k = 0; k + 1 < cuts_.size(); ++k) {
        const double left = cuts_[k];
        const double right = cuts_[k + 1];
        if (!(left < right)) continue;
        const double mid = 0.5 * (left + right);
        const double half = 0.5 * (right - left);
        static constexpr double kNode = 0.7745966692414833770;  // √(3/5)
        static constexpr double kW0 = 8.0 / 9.0;
        static constexpr double kW1 = 5.0 / 9.0;
        auto rho2 = [&](double s) {
          return dist_.density(0.5 * (s - 2.0 * a + sigma * d)) * dist_.density(0.5 * (s - 2.0 * b - sigma * d));
        };
        total += half * (kW0 * rho2(mid) + kW1 * (rho2(mid - half * kNode) + rho2(mid + half * kNode)));
      }
    }
    return g / root * total;
  }

  const TwoByTwoModel& model_;
  const PotentialDistribution& dist_;
  double c_;
  Support support_;
  mutable std::vector<double> cuts_;
};

}  // namespace

Eigen::Matrix2cd TwoByTwoModel::matrix(double omega1, double omega2) const {
  Eigen::Matrix2cd h;
  h << Complex(a + omega1, 0.0), c, std::conj(c), Complex(b + omega2, 0.0);
  return h;
}

EigenPair eigenvalues_2x2(const TwoByTwoModel& model, double omega1, double omega2) {
  const double sum = omega1 + omega2 + model.a + model.b;
  const double diff = omega1 - omega2 + model.a - model.b;
  const double c = model.abs_c();
  const double root = std::sqrt(diff * diff + 4.0 * c * c);
  return {0.5 * (sum + root), 0.5 * (sum - root)};
}

double jacobian_2x2(const TwoByTwoModel& model, double upper, double lower) {
  require_coupling(model, "jacobian_2x2");
  const double c = model.abs_c();
  const double g = std::abs(upper - lower);
  if (!(g > 2.0 * c)) throw DomainError("jacobian_2x2: |E_1 - E_2| must exceed 2|c|");
  return std::sqrt(g * g - 4.0 * c * c) / g;
}

std::vector<std::array<double, 2>> invert_to_potentials(const TwoByTwoModel& model, double upper,
                                                        double lower) {
  const double c = model.abs_c();
  const double g = upper - lower;
  if (g < 2.0 * c) throw DomainError("invert_to_potentials: E_1 - E_2 < 2|c| has no real solution");
  const double s = upper + lower;
  const double d = std::sqrt(std::max(0.0, g * g - 4.0 * c * c));
  const auto branch = [&](double sigma) -> std::array<double, 2> {
    return {0.5 * (s - 2.0 * model.a + sigma * d), 0.5 * (s - 2.0 * model.b - sigma * d)};
  };
  if (d == 0.0) return {branch(1.0)};
  return {branch(1.0), branch(-1.0)};
}

double joint_density(const TwoByTwoModel& model, const PotentialDistribution& dist, double upper,
                     double lower) {
  require_coupling(model, "joint_density");
  const double c = model.abs_c();
  const double g = upper - lower;
  if (!(g > 2.0 * c)) return 0.0;
  const double factor = g / std::sqrt(g * g - 4.0 * c * c);
  double total = 0.0;
  for (const auto& omega : invert_to_potentials(model, upper, lower)) {
    total += factor * dist.density(omega[0]) * dist.density(omega[1]);
  }
  return total;
}

QuadratureResult region_mass(const TwoByTwoModel& model, const PotentialDistribution& dist,
                             const Interval& upper_range, const Interval& lower_range) {
  require_coupling(model, "region_mass");
  return EdgeIntegrator(model, dist).integrate(upper_range.lo, upper_range.hi, lower_range.lo, lower_range.hi);
}

QuadratureResult gap_window_mass(const TwoByTwoModel& model, const PotentialDistribution& dist, double eps) {
  require_coupling(model, "gap_window_mass");
  if (!(eps > 0.0)) throw InvalidInput("gap_window_mass: eps must be positive");
  return EdgeIntegrator(model, dist).integrate(-kInf, kInf, -kInf, kInf, std::sqrt(eps));
}

QuadratureResult total_mass(const TwoByTwoModel& model, const PotentialDistribution& dist) {
  require_coupling(model, "total_mass");
  return EdgeIntegrator(model, dist).integrate(-kInf, kInf, -kInf, kInf);
}

std::pair<Interval, Interval> spectral_box(const TwoByTwoModel& model, const PotentialDistribution& dist) {
  const Support sup = dist.support();
  const EigenPair bottom = eigenvalues_2x2(model, sup.lo, sup.lo);
  const EigenPair top = eigenvalues_2x2(model, sup.hi, sup.hi);
  return {Interval{bottom.upper, top.upper}, Interval{bottom.lower, top.lower}};
}

ScalingProbe singular_scaling_probe(const TwoByTwoModel& model, const PotentialDistribution& dist,
                                    const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw InvalidInput("singular_scaling_probe: eps list is empty");
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (!(eps_list[k] > 0.0)) throw InvalidInput("singular_scaling_probe: eps values must be positive");
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) {
      throw InvalidInput("singular_scaling_probe: eps values must decrease strictly");
    }
  }
  ScalingProbe probe;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (const double eps : eps_list) {
    const double mass = gap_window_mass(model, dist, eps).value;
    probe.rows.push_back({eps, mass});
    if (mass > 0.0) {
      const double x = std::log(eps);
      const double y = std::log(mass);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
  }
  if (m >= 2) {
    const double mm = static_cast<double>(m);
    probe.exponent = (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
  }
  return probe;
}

std::vector<BoundRow> modified_bound_check(const TwoByTwoModel& model, const PotentialDistribution& dist,
                                           const std::vector<double>& widths,
                                           const IntervalPairPlacement& placement) {
  require_coupling(model, "modified_bound_check");
  std::vector<BoundRow> rows;
  rows.reserve(widths.size());
  for (const double w : widths) {
    if (!(w > 0.0)) throw InvalidInput("modified_bound_check: widths must be positive");
    const double shift = placement.shift.value_or(2.0 * model.abs_c() + w);
    const Interval upper{placement.anchor, placement.anchor + w};
    const Interval lower{placement.anchor - shift, placement.anchor - shift + w};
    const double p = region_mass(model, dist, upper, lower).value;
    const double modified = std::max(w, std::sqrt(w));
    rows.push_back({w, p, p / (w * w), p / (modified * modified)});
  }
  return rows;
}

namespace {

struct PairSample {
  std::int64_t bin = -1;
  bool gap_violation = false;
  bool trace_violation = false;
};

std::int64_t bin_of(double value, const Interval& range, std::size_t bins) {
  if (value < range.lo || value > range.hi) return -1;
  const double width = range.length() / static_cast<double>(bins);
  auto k = static_cast<std::int64_t>(std::floor((value - range.lo) / width));
  return std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(bins) - 1);
}

std::vector<double> edges_of(const Interval& range, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    e[k] = range.lo + range.length() * static_cast<double>(k) / static_cast<double>(bins);
  }
  e.back() = range.hi;
  return e;
}

}  // namespace

DensityGrid mc_vs_analytic(const TwoByTwoModel& model, const PotentialDistribution& dist,
                           std::size_t bins_upper, std::size_t bins_lower, std::uint64_t n_samples,
                           std::uint64_t seed, unsigned threads) {
  require_coupling(model, "mc_vs_analytic");
  if (n_samples < 10000) throw InvalidInput("mc_vs_analytic: n_samples must be >= 1e4");
  if (bins_upper == 0 || bins_lower == 0) throw InvalidInput("mc_vs_analytic: bin counts must be positive");

  const auto [upper_range, lower_range] = spectral_box(model, dist);
  DensityGrid grid;
  grid.upper_edges = edges_of(upper_range, bins_upper);
  grid.lower_edges = edges_of(lower_range, bins_lower);
  grid.n_samples = n_samples;
  grid.seed = seed;
  grid.mc_count.assign(bins_upper * bins_lower, 0);
  grid.analytic_mass.assign(bins_upper * bins_lower, 0.0);

  const double c = model.abs_c();
  ordered_map_fold<PairSample>(
      n_samples, threads,
      [&](std::uint64_t i) {
        const PotentialVector omega = sample_potential(dist, seed, i, 2);
        const double w1 = omega.values[0];
        const double w2 = omega.values[1];
        const EigenPair e = eigenvalues_2x2(model, w1, w2);
        PairSample out;
        out.gap_violation = e.upper - e.lower < 2.0 * c - 1e-12;
        out.trace_violation = std::abs(e.upper + e.lower - (w1 + w2 + model.a + model.b)) > 1e-12;
        const std::int64_t iu = bin_of(e.upper, upper_range, bins_upper);
        const std::int64_t il = bin_of(e.lower, lower_range, bins_lower);
        if (iu >= 0 && il >= 0) out.bin = iu * static_cast<std::int64_t>(bins_lower) + il;
        return out;
      },
      [&](std::uint64_t, const PairSample& s) {
        if (s.bin < 0) {
          ++grid.out_of_range;
        } else {
          ++grid.mc_count[static_cast<std::size_t>(s.bin)];
        }
        grid.gap_violations += s.gap_violation ? 1 : 0;
        grid.trace_violations += s.trace_violation ? 1 : 0;
      });

  ordered_map_fold<double>(
      bins_upper * bins_lower, threads,
      [&](std::uint64_t b) {
        const std::size_t i = b / bins_lower;
        const std::size_t k = b % bins_lower;
        return EdgeIntegrator(model, dist)
            .integrate(grid.upper_edges[i], grid.upper_edges[i + 1], grid.lower_edges[k], grid.lower_edges[k + 1])
            .value;
      },
      [&](std::uint64_t b, double m) {
        grid.analytic_mass[b] = m;
        grid.analytic_total += m;
      },
      64);

  const double counted = static_cast<double>(n_samples - grid.out_of_range);
  double l1 = 0.0;
  for (std::size_t b = 0; b < grid.mc_count.size(); ++b) {
    const double p = grid.analytic_total > 0.0 ? grid.analytic_mass[b] / grid.analytic_total : 0.0;
    const double q = counted > 0.0 ? static_cast<double>(grid.mc_count[b]) / counted : 0.0;
    l1 += std::abs(p - q);
  }
  grid.l1 = l1;
  return grid;
}

GraphSpec two_site_graph(const TwoByTwoModel& model) {
  return GraphSpec::from_edges(2, {Edge{0, 1, model.c}});
}

}  // namespace levelstat
