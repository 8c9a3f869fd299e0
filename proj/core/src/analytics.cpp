#include "clt/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "clt/error.hpp"

namespace clt {

std::vector<SpikeEvent> detect_spikes(std::span<const LoadPoint> points, LoadComponent component,
                                      double threshold) {
  std::vector<SpikeEvent> out;
  for (const auto& p : points) {
    const double v = p.component(component);
    if (v > threshold) out.push_back({p.step, component, v, threshold});
  }
  return out;
}

std::optional<double> CoincidenceCount::fraction() const {
  if (errors == 0) return std::nullopt;
  return static_cast<double>(coincident) / static_cast<double>(errors);
}

CoincidenceCount count_error_spike_coincidence(std::span<const LoadPoint> points,
                                               const std::vector<bool>& labels, double threshold,
                                               int window) {
  if (labels.size() != points.size()) {
    throw LengthMismatch("labels (" + std::to_string(labels.size()) + ") vs points (" +
                         std::to_string(points.size()) + ")");
  }
  if (window < 0) throw ConfigError("coincidence window must be non-negative");
  CoincidenceCount count;
  // last_spike: most recent index <= t with an EL spike.
  std::optional<std::size_t> last_spike;
  for (std::size_t t = 0; t < points.size(); ++t) {
    if (points[t].el > threshold) last_spike = t;
    if (!labels[t]) continue;
    ++count.errors;
    if (last_spike && t - *last_spike <= static_cast<std::size_t>(window)) ++count.coincident;
  }
  return count;
}

std::optional<double> error_spike_coincidence(std::span<const LoadPoint> points,
                                              const std::vector<bool>& labels, double threshold,
                                              int window) {
  return count_error_spike_coincidence(points, labels, threshold, window).fraction();
}

double cli_error_correlation(std::span<const LoadPoint> points, const std::vector<bool>& labels) {
  std::vector<double> cli;
  cli.reserve(points.size());
  for (const auto& p : points) cli.push_back(p.cli);
  return point_biserial(cli, labels);
}

ClusterModel cluster_strategies(std::span<const LoadPoint> points, int k, std::uint64_t seed) {
  std::vector<std::array<double, 3>> xyz;
  xyz.reserve(points.size());
  for (const auto& p : points) xyz.push_back({p.il, p.el, p.gl});
  return kmeans3(xyz, k, seed);
}

TraceSummary trace_summary(std::span<const LoadPoint> points, double spike_threshold) {
  TraceSummary s;
  s.steps = points.size();
  s.spike_threshold = spike_threshold;
  if (points.empty()) return s;
  constexpr std::array<LoadComponent, 4> kComponents = {
      LoadComponent::kIntrinsic, LoadComponent::kExtraneous, LoadComponent::kGermane,
      LoadComponent::kCli};
  for (std::size_t c = 0; c < kComponents.size(); ++c) {
    ComponentSummary& cs = s.components[c];
    double sum = 0.0;
    cs.max = points.front().component(kComponents[c]);
    cs.argmax_step = points.front().step;
    for (const auto& p : points) {
      const double v = p.component(kComponents[c]);
      sum += v;
      if (v > cs.max) {
        cs.max = v;
        cs.argmax_step = p.step;
      }
      if (v > spike_threshold) ++cs.spikes;
    }
    cs.mean = sum / static_cast<double>(points.size());
  }
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    double norm_sum = 0.0, raw_sum = 0.0;
    for (const auto& pt : points) {
      norm_sum += pt.normalized[p];
      raw_sum += pt.raw[p];
    }
    s.normalized_means[p] = norm_sum / static_cast<double>(points.size());
    s.raw_means[p] = raw_sum / static_cast<double>(points.size());
  }
  return s;
}

std::string format_summary(const TraceSummary& s) {
  std::ostringstream os;
  char buf[160];
  os << "steps: " << s.steps << "\n";
  std::snprintf(buf, sizeof buf, "spike threshold: %.3f\n", s.spike_threshold);
  os << buf;
  os << "component  mean      max       argmax  spikes\n";
  constexpr std::array<const char*, 4> kNames = {"IL", "EL", "GL", "CLI"};
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& cs = s.components[c];
    std::snprintf(buf, sizeof buf, "%-9s  %.6f  %.6f  %6lld  %zu\n", kNames[c], cs.mean, cs.max,
                  static_cast<long long>(cs.argmax_step), cs.spikes);
    os << buf;
  }
  os << "proxy          raw_mean      normalized_mean\n";
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    std::snprintf(buf, sizeof buf, "%-13s  %.6e  %.6f\n", std::string(kProxyNames[p]).c_str(),
                  s.raw_means[p], s.normalized_means[p]);
    os << buf;
  }
  return os.str();
}

}  // namespace clt
