#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace clt {

// Quantile by linear interpolation between order statistics: position
// h = (n - 1) q in the sorted sample.
double quantile_sorted(std::span<const double> sorted, double q);

struct RobustStats {
  double median = 0.0;
  double iqr = 0.0;  // Q3 - Q1, always >= 0

  bool operator==(const RobustStats&) const = default;
};

RobustStats robust_stats(std::span<const double> values);

// Median/IQR over an expanding window x_{1:t}; push() is O(t).
class ExpandingRobustStats {
 public:
  void push(double value);
  RobustStats current() const;
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

double logistic(double z);

double mean(std::span<const double> values);

// Pearson correlation between x and a binary label. Throws DegenerateLabels
// when the labels are single-class and ConstantCli when x has no variance.
double point_biserial(std::span<const double> x, const std::vector<bool>& labels);

// Variance below which a series counts as constant for correlation purposes.
inline constexpr double kConstantVariance = 1e-18;

}  // namespace clt
