#include "clt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clt/error.hpp"

namespace clt {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RobustStats robust_stats(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  RobustStats s;
  s.median = quantile_sorted(sorted, 0.5);
  s.iqr = std::max(0.0, quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25));
  return s;
}

void ExpandingRobustStats::push(double value) {
  sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), value), value);
}

RobustStats ExpandingRobustStats::current() const {
  RobustStats s;
  s.median = quantile_sorted(sorted_, 0.5);
  s.iqr = std::max(0.0, quantile_sorted(sorted_, 0.75) - quantile_sorted(sorted_, 0.25));
  return s;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double point_biserial(std::span<const double> x, const std::vector<bool>& labels) {
  if (x.size() != labels.size()) {
    throw LengthMismatch("series length " + std::to_string(x.size()) + " vs " +
                         std::to_string(labels.size()) + " labels");
  }
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (positives == 0 || positives == labels.size()) {
    throw DegenerateLabels(positives == 0 ? "no positive labels" : "no negative labels");
  }
  const double n = static_cast<double>(x.size());
  const double mx = mean(x);
  const double my = static_cast<double>(positives) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = (labels[i] ? 1.0 : 0.0) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx / n <= kConstantVariance) throw ConstantCli("series has no variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace clt
