#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "clt/composition.hpp"

namespace clt {

struct LabeledPoints {
  std::vector<LoadPoint> points;  // normalization already applied
  std::vector<bool> labels;       // error onset per step
};

struct FitOptions {
  // Also search alpha/beta/gamma on their own grid; otherwise `fixed` is used.
  bool joint = false;
  CompositionWeights fixed;
  int cli_grid_steps = 20;   // w pitch 1/20 = 0.05
  int pair_grid_steps = 10;  // alpha/beta/gamma pitch 0.1
};

struct FitResult {
  CompositionWeights cw;
  CliWeights w;
  double correlation = 0.0;
  std::size_t evaluated = 0;  // grid points with a defined correlation
  std::size_t skipped = 0;    // grid points where CLI was constant
};

// Enumerates the CLI weight simplex at pitch 1/steps, in lexicographic order.
std::vector<CliWeights> cli_weight_grid(int steps);
std::vector<WeightPair> pair_grid(int steps);

// Tie-break rank: squared distance of all weights from uniform.
double distance_from_uniform(const CompositionWeights& cw, const CliWeights& w);

// Grid search maximizing the point-biserial correlation between pooled CLI
// and labels. Ties (within 1e-12) go to the candidate nearest the uniform
// weights, then to the lexicographically smallest (w_I, w_E, w_G, a1, b1, g1).
FitResult fit_weights(std::span<const LabeledPoints> data, const FitOptions& options = {});

inline constexpr double kCorrelationTieTolerance = 1e-12;

// True when candidate (r, cw, w) should replace the incumbent best.
bool better_fit(double r, const CompositionWeights& cw, const CliWeights& w, const FitResult& best);

}  // namespace clt
