#include "levelstat/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levelstat/error.hpp"

namespace levelstat {

PotentialDistribution PotentialDistribution::uniform(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidInput("uniform: need finite a < b");
  }
  PotentialDistribution d;
  d.kind_ = DistributionKind::kUniform;
  d.edges_ = {a, b};
  d.densities_ = {1.0 / (b - a)};
  d.cumulative_ = {0.0, 1.0};
  d.rho_inf_ = 1.0 / (b - a);
  return d;
}

PotentialDistribution PotentialDistribution::triangular(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidInput("triangular: need finite a < b");
  }
  PotentialDistribution d;
  d.kind_ = DistributionKind::kTriangular;
  d.edges_ = {a, 0.5 * (a + b), b};
  d.cumulative_ = {0.0, 0.5, 1.0};
  d.rho_inf_ = 2.0 / (b - a);
  return d;
}

PotentialDistribution PotentialDistribution::piecewise_constant(std::vector<double> edges,
                                                                std::vector<double> densities) {
  if (edges.size() < 2 || densities.size() + 1 != edges.size()) {
    throw InvalidInput("piecewise: need k+1 edges for k densities (k >= 1)");
  }
  double mass = 0.0;
  double peak = 0.0;
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) throw InvalidInput("piecewise: edges must increase strictly");
    if (!(densities[i] >= 0.0) || !std::isfinite(densities[i])) {
      throw InvalidInput("piecewise: densities must be finite and nonnegative");
    }
    mass += densities[i] * (edges[i + 1] - edges[i]);
    cumulative.push_back(mass);
    peak = std::max(peak, densities[i]);
  }
  if (std::abs(mass - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "piecewise: density integrates to " << mass << ", not 1";
    throw InvalidInput(os.str());
  }
  PotentialDistribution d;
  d.kind_ = DistributionKind::kPiecewiseConstant;
  d.edges_ = std::move(edges);
  d.densities_ = std::move(densities);
  d.cumulative_ = std::move(cumulative);
  d.rho_inf_ = peak;
  return d;
}

double PotentialDistribution::density(double v) const {
  const double lo = edges_.front();
  const double hi = edges_.back();
  if (v < lo || v > hi) return 0.0;
  switch (kind_) {
    case DistributionKind::kUniform:
      return densities_[0];
    case DistributionKind::kTriangular: {
      const double mid = edges_[1];
      const double half = mid - lo;
      return rho_inf_ * (v <= mid ? (v - lo) / half : (hi - v) / half);
    }
    case DistributionKind::kPiecewiseConstant: {
      if (v == hi) return densities_.back();
      const auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
      return densities_[static_cast<std::size_t>(it - edges_.begin()) - 1];
    }
  }
  return 0.0;
}

double PotentialDistribution::cdf(double v) const {
  const double lo = edges_.front();
  const double hi = edges_.back();
  if (v <= lo) return 0.0;
  if (v >= hi) return 1.0;
  switch (kind_) {
    case DistributionKind::kUniform:
      return (v - lo) * densities_[0];
    case DistributionKind::kTriangular: {
      const double w = hi - lo;
      if (v <= edges_[1]) return 2.0 * (v - lo) * (v - lo) / (w * w);
      return 1.0 - 2.0 * (hi - v) * (hi - v) / (w * w);
    }
    case DistributionKind::kPiecewiseConstant: {
      const auto it = std::upper_bound(edges_.begin(), edges_.end(), v);
      const auto i = static_cast<std::size_t>(it - edges_.begin()) - 1;
      return cumulative_[i] + densities_[i] * (v - edges_[i]);
    }
  }
  return 0.0;
}

double PotentialDistribution::quantile(double u) const {
  const double lo = edges_.front();
  const double hi = edges_.back();
  u = std::clamp(u, 0.0, 1.0);
  double v = lo;
  switch (kind_) {
    case DistributionKind::kUniform:
      v = lo + (hi - lo) * u;
      break;
    case DistributionKind::kTriangular:
      v = u < 0.5 ? lo + (hi - lo) * std::sqrt(0.5 * u) : hi - (hi - lo) * std::sqrt(0.5 * (1.0 - u));
      break;
    case DistributionKind::kPiecewiseConstant: {
      // last cell whose cumulative start is <= u, skipping zero-density cells
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, u);
      auto i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
      while (densities_[i] == 0.0 && i + 1 < densities_.size()) ++i;
      v = edges_[i] + (u - cumulative_[i]) / densities_[i];
      v = std::min(v, edges_[i + 1]);
      break;
    }
  }
  return std::clamp(v, lo, hi);
}

double PotentialDistribution::mean() const {
  switch (kind_) {
    case DistributionKind::kUniform:
    case DistributionKind::kTriangular:
      return 0.5 * (edges_.front() + edges_.back());
    case DistributionKind::kPiecewiseConstant: {
      double m = 0.0;
      for (std::size_t i = 0; i < densities_.size(); ++i) {
        m += densities_[i] * 0.5 * (edges_[i + 1] * edges_[i + 1] - edges_[i] * edges_[i]);
      }
      return m;
    }
  }
  return 0.0;
}

std::string PotentialDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case DistributionKind::kUniform:
      os << "uniform(" << edges_.front() << "," << edges_.back() << ")";
      break;
    case DistributionKind::kTriangular:
      os << "triangular(" << edges_.front() << "," << edges_.back() << ")";
      break;
    case DistributionKind::kPiecewiseConstant:
      os << "piecewise[" << densities_.size() << " cells]";
      break;
  }
  return os.str();
}

}  // namespace levelstat
