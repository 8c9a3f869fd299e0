#include "clt/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <tuple>

#include "clt/error.hpp"

namespace clt {
namespace {

// Pooled first and second moments of (IL, EL, GL) against the labels for
// one choice of composition weights. Every CLI weight vector then has a
// closed-form correlation: r = w.c / sqrt(w' S w * var_y).
struct LoadMoments {
  std::array<std::array<double, 3>, 3> cov{};
  std::array<double, 3> cov_y{};
  double var_y = 0.0;
};

LoadMoments moments(std::span<const LabeledPoints> data, const CompositionWeights& cw,
                    std::size_t n) {
  std::vector<std::array<double, 3>> loads;
  std::vector<double> y;
  loads.reserve(n);
  y.reserve(n);
  std::array<double, 3> mu{};
  double mu_y = 0.0;
  for (const auto& set : data) {
    for (std::size_t t = 0; t < set.points.size(); ++t) {
      const Loads l = compose_loads(set.points[t].normalized, cw);
      loads.push_back({l.il, l.el, l.gl});
      y.push_back(set.labels[t] ? 1.0 : 0.0);
      for (int k = 0; k < 3; ++k) mu[k] += loads.back()[k];
      mu_y += y.back();
    }
  }
  const double count = static_cast<double>(loads.size());
  for (double& m : mu) m /= count;
  mu_y /= count;

  LoadMoments m;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    std::array<double, 3> d{};
    for (int k = 0; k < 3; ++k) d[k] = loads[i][k] - mu[k];
    const double dy = y[i] - mu_y;
    for (int a = 0; a < 3; ++a) {
      m.cov_y[a] += d[a] * dy;
      for (int b = a; b < 3; ++b) m.cov[a][b] += d[a] * d[b];
    }
    m.var_y += dy * dy;
  }
  for (int a = 0; a < 3; ++a) {
    m.cov_y[a] /= count;
    for (int b = a; b < 3; ++b) {
      m.cov[a][b] /= count;
      m.cov[b][a] = m.cov[a][b];
    }
  }
  m.var_y /= count;
  return m;
}

auto lex_key(const CompositionWeights& cw, const CliWeights& w) {
  return std::make_tuple(w.intrinsic, w.extraneous, w.germane, cw.alpha.first, cw.beta.first,
                         cw.gamma.first);
}

}  // namespace

std::vector<CliWeights> cli_weight_grid(int steps) {
  std::vector<CliWeights> grid;
  const double s = static_cast<double>(steps);
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const int k = steps - i - j;
      grid.push_back({i / s, j / s, k / s});
    }
  }
  return grid;
}

std::vector<WeightPair> pair_grid(int steps) {
  std::vector<WeightPair> grid;
  const double s = static_cast<double>(steps);
  for (int i = 0; i <= steps; ++i) grid.push_back({i / s, (steps - i) / s});
  return grid;
}

double distance_from_uniform(const CompositionWeights& cw, const CliWeights& w) {
  const double third = 1.0 / 3.0;
  auto sq = [](double x) { return x * x; };
  return sq(w.intrinsic - third) + sq(w.extraneous - third) + sq(w.germane - third) +
         sq(cw.alpha.first - 0.5) + sq(cw.beta.first - 0.5) + sq(cw.gamma.first - 0.5);
}

bool better_fit(double r, const CompositionWeights& cw, const CliWeights& w,
                const FitResult& best) {
  if (best.evaluated == 0) return true;
  if (r > best.correlation + kCorrelationTieTolerance) return true;
  if (r < best.correlation - kCorrelationTieTolerance) return false;
  const double d = distance_from_uniform(cw, w);
  const double d_best = distance_from_uniform(best.cw, best.w);
  if (d < d_best - 1e-15) return true;
  if (d > d_best + 1e-15) return false;
  return lex_key(cw, w) < lex_key(best.cw, best.w);
}

FitResult fit_weights(std::span<const LabeledPoints> data, const FitOptions& options) {
  std::size_t n = 0, positives = 0;
  for (const auto& set : data) {
    if (set.points.size() != set.labels.size()) {
      throw LengthMismatch("points and labels differ in length");
    }
    n += set.points.size();
    for (bool b : set.labels) positives += b ? 1 : 0;
  }
  if (n == 0 || positives == 0 || positives == n) {
    throw DegenerateLabels(positives == 0 ? "no positive labels" : "no negative labels");
  }

  std::vector<CompositionWeights> composition_grid;
  if (options.joint) {
    const auto pairs = pair_grid(options.pair_grid_steps);
    for (const auto& a : pairs)
      for (const auto& b : pairs)
        for (const auto& g : pairs) composition_grid.push_back({a, b, g});
  } else {
    options.fixed.validate();
    composition_grid.push_back(options.fixed);
  }
  const auto w_grid = cli_weight_grid(options.cli_grid_steps);

  FitResult best;
  std::size_t skipped = 0;
  for (const auto& cw : composition_grid) {
    const LoadMoments m = moments(data, cw, n);
    for (const auto& w : w_grid) {
      const std::array<double, 3> wv{w.intrinsic, w.extraneous, w.germane};
      double var = 0.0, cov = 0.0;
      for (int a = 0; a < 3; ++a) {
        cov += wv[a] * m.cov_y[a];
        for (int b = 0; b < 3; ++b) var += wv[a] * wv[b] * m.cov[a][b];
      }
      if (var <= kConstantVariance) {
        ++skipped;
        continue;
      }
      const double r = std::clamp(cov / std::sqrt(var * m.var_y), -1.0, 1.0);
      if (better_fit(r, cw, w, best)) {
        const std::size_t evaluated = best.evaluated;
        best = {cw, w, r, evaluated, 0};
      }
      ++best.evaluated;
    }
  }
  if (best.evaluated == 0) throw ConstantCli("CLI is constant at every grid point");
  best.skipped = skipped;
  return best;
}

}  // namespace clt
