#include "clt/composition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clt/error.hpp"

namespace clt {
namespace {

bool near_one(double s) { return std::abs(s - 1.0) <= kWeightSumTolerance; }

double unit_clamp(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void WeightPair::validate(std::string_view name) const {
  if (!(first >= 0.0 && second >= 0.0) || !near_one(first + second)) {
    throw ConfigError(std::string(name) + " weights must be non-negative and sum to 1, got (" +
                      std::to_string(first) + ", " + std::to_string(second) + ")");
  }
}

void CompositionWeights::validate() const {
  alpha.validate("alpha");
  beta.validate("beta");
  gamma.validate("gamma");
}

void CliWeights::validate() const {
  if (!(intrinsic >= 0.0 && extraneous >= 0.0 && germane >= 0.0) ||
      !near_one(intrinsic + extraneous + germane)) {
    throw ConfigError("CLI weights must be non-negative and sum to 1");
  }
}

std::string_view to_string(NormMode mode) {
  return mode == NormMode::kOffline ? "offline" : "causal";
}

NormMode parse_norm_mode(std::string_view text) {
  if (text == "offline") return NormMode::kOffline;
  if (text == "causal") return NormMode::kCausal;
  throw ConfigError("unknown normalization mode '" + std::string(text) + "'");
}

std::string_view to_string(LoadComponent c) {
  switch (c) {
    case LoadComponent::kIntrinsic: return "IL";
    case LoadComponent::kExtraneous: return "EL";
    case LoadComponent::kGermane: return "GL";
    case LoadComponent::kCli: return "CLI";
  }
  return "?";
}

LoadComponent parse_load_component(std::string_view text) {
  if (text == "IL" || text == "il") return LoadComponent::kIntrinsic;
  if (text == "EL" || text == "el") return LoadComponent::kExtraneous;
  if (text == "GL" || text == "gl") return LoadComponent::kGermane;
  if (text == "CLI" || text == "cli") return LoadComponent::kCli;
  throw ConfigError("unknown load component '" + std::string(text) + "'");
}

double LoadPoint::component(LoadComponent c) const {
  switch (c) {
    case LoadComponent::kIntrinsic: return il;
    case LoadComponent::kExtraneous: return el;
    case LoadComponent::kGermane: return gl;
    case LoadComponent::kCli: return cli;
  }
  return cli;
}

NormStats fit_norm_stats(std::span<const ProxyVector> proxies) {
  NormStats stats;
  std::vector<double> column(proxies.size());
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    for (std::size_t t = 0; t < proxies.size(); ++t) column[t] = proxies[t][p];
    stats.per_proxy[p] = robust_stats(column);
  }
  return stats;
}

double robust_z(double value, const RobustStats& stats, double epsilon) {
  return (value - stats.median) / (stats.iqr + epsilon);
}

double normalize(double value, const RobustStats& stats, double epsilon) {
  return logistic(robust_z(value, stats, epsilon));
}

ProxyVector normalize(const ProxyVector& raw, const NormStats& stats, double epsilon) {
  ProxyVector out;
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    out[p] = normalize(raw[p], stats.per_proxy[p], epsilon);
  }
  return out;
}

Loads compose_loads(const ProxyVector& n, const CompositionWeights& cw) {
  Loads l;
  l.il = unit_clamp(cw.alpha.first * n.entropy + cw.alpha.second * n.dispersion);
  l.el = unit_clamp(cw.beta.first * n.miss + cw.beta.second * n.stability);
  l.gl = unit_clamp(cw.gamma.first * (1.0 - n.consolidation) + cw.gamma.second * (1.0 - n.reuse));
  return l;
}

double composite_cli(const Loads& l, const CliWeights& w) {
  return unit_clamp(w.intrinsic * l.il + w.extraneous * l.el + w.germane * l.gl);
}

LoadPoint make_load_point(std::int64_t step, const ProxyVector& raw, const ProxyVector& normalized,
                          const CompositionWeights& cw, const CliWeights& w) {
  LoadPoint pt;
  pt.step = step;
  pt.raw = raw;
  pt.normalized = normalized;
  const Loads loads = compose_loads(normalized, cw);
  pt.il = loads.il;
  pt.el = loads.el;
  pt.gl = loads.gl;
  pt.cli = composite_cli(loads, w);
  return pt;
}

std::vector<LoadPoint> compose_points(std::span<const ProxyVector> raw, const NormStats& stats,
                                      const CompositionWeights& cw, const CliWeights& w,
                                      double epsilon) {
  std::vector<LoadPoint> out;
  out.reserve(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    out.push_back(make_load_point(static_cast<std::int64_t>(t), raw[t],
                                  normalize(raw[t], stats, epsilon), cw, w));
  }
  return out;
}

std::vector<LoadPoint> compose_points(std::span<const ProxyVector> raw,
                                      const CompositionWeights& cw, const CliWeights& w,
                                      NormMode mode, double epsilon) {
  cw.validate();
  w.validate();
  if (mode == NormMode::kOffline) {
    return compose_points(raw, fit_norm_stats(raw), cw, w, epsilon);
  }
  CausalComposer composer(cw, w, epsilon);
  std::vector<LoadPoint> out;
  out.reserve(raw.size());
  for (std::size_t t = 0; t < raw.size(); ++t) {
    out.push_back(composer.push(static_cast<std::int64_t>(t), raw[t]));
  }
  return out;
}

std::vector<LoadPoint> compute_clt(const Trace& trace, const CompositionWeights& cw,
                                   const CliWeights& w, NormMode mode, const ReuseConfig& reuse) {
  const auto raw = compute_proxies(trace, reuse);
  auto points = compose_points(raw, cw, w, mode, trace.meta.epsilon);
  for (std::size_t t = 0; t < points.size(); ++t) points[t].step = trace.steps[t].step;
  return points;
}

std::vector<LoadPoint> recompose(std::span<const LoadPoint> points, const CompositionWeights& cw,
                                 const CliWeights& w) {
  std::vector<LoadPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(make_load_point(p.step, p.raw, p.normalized, cw, w));
  return out;
}

CausalComposer::CausalComposer(CompositionWeights cw, CliWeights w, double epsilon)
    : cw_(cw), w_(w), epsilon_(epsilon) {
  cw_.validate();
  w_.validate();
}

LoadPoint CausalComposer::push(std::int64_t step, const ProxyVector& raw) {
  ProxyVector normalized;
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    windows_[p].push(raw[p]);
    normalized[p] = normalize(raw[p], windows_[p].current(), epsilon_);
  }
  return make_load_point(step, raw, normalized, cw_, w_);
}

}  // namespace clt
