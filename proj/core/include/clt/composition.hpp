#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "clt/proxies.hpp"
#include "clt/stats.hpp"
#include "clt/trace.hpp"

namespace clt {

// Convex pair (first, second); first weights the earlier proxy of a load.
struct WeightPair {
  double first = 0.5;
  double second = 0.5;

  void validate(std::string_view name) const;
  bool operator==(const WeightPair&) const = default;
};

struct CompositionWeights {
  WeightPair alpha;  // IL: entropy, dispersion
  WeightPair beta;   // EL: miss, stability
  WeightPair gamma;  // GL: (1 - consolidation), (1 - reuse)

  void validate() const;
  bool operator==(const CompositionWeights&) const = default;
};

struct CliWeights {
  double intrinsic = 1.0 / 3.0;
  double extraneous = 1.0 / 3.0;
  double germane = 1.0 / 3.0;

  void validate() const;
  bool operator==(const CliWeights&) const = default;
};

inline constexpr double kWeightSumTolerance = 1e-9;

struct NormStats {
  std::array<RobustStats, kProxyCount> per_proxy{};

  const RobustStats& operator[](Proxy p) const { return per_proxy[static_cast<std::size_t>(p)]; }
  bool operator==(const NormStats&) const = default;
};

enum class NormMode { kOffline, kCausal };

std::string_view to_string(NormMode mode);
NormMode parse_norm_mode(std::string_view text);

enum class LoadComponent { kIntrinsic, kExtraneous, kGermane, kCli };

std::string_view to_string(LoadComponent c);
LoadComponent parse_load_component(std::string_view text);

struct Loads {
  double il = 0.0;
  double el = 0.0;
  double gl = 0.0;
};

struct LoadPoint {
  std::int64_t step = 0;
  ProxyVector raw;
  ProxyVector normalized;  // squashed into [0, 1]
  double il = 0.0;
  double el = 0.0;
  double gl = 0.0;
  double cli = 0.0;

  double component(LoadComponent c) const;
  bool operator==(const LoadPoint&) const = default;
};

NormStats fit_norm_stats(std::span<const ProxyVector> proxies);

// Robust z-score (x - median) / (IQR + eps), before squashing.
double robust_z(double value, const RobustStats& stats, double epsilon);
// Robust z-score squashed through the logistic into (0, 1).
double normalize(double value, const RobustStats& stats, double epsilon);
ProxyVector normalize(const ProxyVector& raw, const NormStats& stats, double epsilon);

Loads compose_loads(const ProxyVector& normalized, const CompositionWeights& cw);
double composite_cli(const Loads& loads, const CliWeights& w);

LoadPoint make_load_point(std::int64_t step, const ProxyVector& raw, const ProxyVector& normalized,
                          const CompositionWeights& cw, const CliWeights& w);

// Offline: stats over the whole series. Causal: stats over x_{1:t} at step t.
std::vector<LoadPoint> compose_points(std::span<const ProxyVector> raw,
                                      const CompositionWeights& cw, const CliWeights& w,
                                      NormMode mode, double epsilon);

// Normalizes with externally fitted statistics (e.g. loaded from a file).
std::vector<LoadPoint> compose_points(std::span<const ProxyVector> raw, const NormStats& stats,
                                      const CompositionWeights& cw, const CliWeights& w,
                                      double epsilon);

std::vector<LoadPoint> compute_clt(const Trace& trace, const CompositionWeights& cw,
                                   const CliWeights& w, NormMode mode,
                                   const ReuseConfig& reuse = {});

// Re-derives il/el/gl/cli from the stored normalized proxies.
std::vector<LoadPoint> recompose(std::span<const LoadPoint> points, const CompositionWeights& cw,
                                 const CliWeights& w);

// Streaming causal composition: push raw proxies one step at a time.
class CausalComposer {
 public:
  CausalComposer(CompositionWeights cw, CliWeights w, double epsilon);

  LoadPoint push(std::int64_t step, const ProxyVector& raw);

 private:
  CompositionWeights cw_;
  CliWeights w_;
  double epsilon_;
  std::array<ExpandingRobustStats, kProxyCount> windows_;
};

}  // namespace clt
