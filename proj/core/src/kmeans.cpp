#include <cmath>
#include <limits>
#include <random>

#include "clt/analytics.hpp"
#include "clt/error.hpp"

namespace clt {
namespace {

using Point3 = std::array<double, 3>;

double sq_dist(const Point3& a, const Point3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

// Farthest-first traversal from a seeded starting point; ties go to the
// lowest index.
std::vector<Point3> farthest_first(std::span<const Point3> points, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = points.size();
  std::vector<Point3> centroids;
  centroids.reserve(static_cast<std::size_t>(k));
  centroids.push_back(points[rng() % n]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < static_cast<std::size_t>(k)) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(points[i], centroids.back()));
      if (nearest[i] > best) {
        best = nearest[i];
        pick = i;
      }
    }
    centroids.push_back(points[pick]);
  }
  return centroids;
}

double assign(std::span<const Point3> points, const std::vector<Point3>& centroids,
              std::vector<int>& labels) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = 0;
    double best_d = sq_dist(points[i], centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
      const double d = sq_dist(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    inertia += best_d;
  }
  return inertia;
}

}  // namespace

ClusterModel kmeans3(std::span<const Point3> points, int k, std::uint64_t seed) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (points.size() < static_cast<std::size_t>(k)) {
    throw TooFewPoints(std::to_string(points.size()) + " points for k = " + std::to_string(k));
  }
  ClusterModel model;
  model.k = k;
  model.seed = seed;
  model.centroids = farthest_first(points, k, seed);
  model.assignments.assign(points.size(), 0);

  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    const double inertia = assign(points, model.centroids, model.assignments);
    model.inertia_history.push_back(inertia);
    model.iterations = iter + 1;
    if (iter > 0) {
      const double prev = model.inertia_history[model.inertia_history.size() - 2];
      if (prev == 0.0 || std::abs(prev - inertia) <= kInertiaTolerance * prev) break;
    }

    std::vector<Point3> sums(static_cast<std::size_t>(k), Point3{0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(model.assignments[i]);
      for (int d = 0; d < 3; ++d) sums[c][d] += points[i][d];
      ++counts[c];
    }
    std::vector<bool> reseeded(points.size(), false);
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] > 0) {
        for (int d = 0; d < 3; ++d) sums[c][d] /= static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point worst served by its centroid.
      std::size_t pick = 0;
      double worst = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (reseeded[i]) continue;
        const double d = sq_dist(points[i], model.centroids[model.assignments[i]]);
        if (d > worst) {
          worst = d;
          pick = i;
        }
      }
      reseeded[pick] = true;
      sums[c] = points[pick];
      ++model.empty_repairs;
    }
    model.centroids = std::move(sums);
  }

  // Canonical labels: clusters numbered by first appearance in point order,
  // clusters with no points last.
  std::vector<int> relabel(static_cast<std::size_t>(k), -1);
  int next = 0;
  for (int a : model.assignments) {
    if (relabel[static_cast<std::size_t>(a)] < 0) relabel[static_cast<std::size_t>(a)] = next++;
  }
  for (auto& r : relabel) {
    if (r < 0) r = next++;
  }
  std::vector<Point3> ordered(model.centroids.size());
  for (std::size_t c = 0; c < ordered.size(); ++c) {
    ordered[static_cast<std::size_t>(relabel[c])] = model.centroids[c];
  }
  model.centroids = std::move(ordered);
  for (auto& a : model.assignments) a = relabel[static_cast<std::size_t>(a)];
  return model;
}

}  // namespace clt
