#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "clt/trace.hpp"

namespace clt {

// Upper clamp on the decoding-stability KL so downstream statistics stay finite.
inline constexpr double kKlMax = 50.0;

enum class Proxy : std::size_t {
  kEntropy = 0,
  kDispersion,
  kMiss,
  kStability,
  kConsolidation,
  kReuse,
};
inline constexpr std::size_t kProxyCount = 6;
inline constexpr std::array<std::string_view, kProxyCount> kProxyNames = {
    "entropy", "dispersion", "miss", "stability", "consolidation", "reuse"};

struct ProxyVector {
  double entropy = 0.0;
  double dispersion = 0.0;
  double miss = 0.0;
  double stability = 0.0;
  double consolidation = 1.0;
  double reuse = 1.0;

  double& operator[](Proxy p);
  double operator[](Proxy p) const;
  double& operator[](std::size_t i) { return (*this)[static_cast<Proxy>(i)]; }
  double operator[](std::size_t i) const { return (*this)[static_cast<Proxy>(i)]; }

  bool operator==(const ProxyVector&) const = default;
};

struct ReuseConfig {
  double theta = 0.1;  // attention-peak threshold, open interval (0, 1)

  void validate() const;
};

// Shannon entropy (nats) of one attention row; zero entries contribute 0.
double row_entropy(std::span<const double> row);

// Per-layer entropies from attention rows, falling back to digest scalars.
std::vector<double> layer_entropies(const StepRecord& step, const TraceMeta& meta);
double attention_entropy(const StepRecord& step, const TraceMeta& meta);

// Per-layer ||h^l - mean_l h|| / (||mean_l h|| + eps), falling back to digests.
std::vector<double> layer_dispersions(const StepRecord& step, const TraceMeta& meta);
double representation_dispersion(const StepRecord& step, const TraceMeta& meta);

double cache_miss(const StepRecord& step, const TraceMeta& meta);

// KL(p || q) in nats. Zero p entries contribute 0, q entries are floored at
// `epsilon`, and the result is clamped to [0, kKlMax].
double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon);

// KL(p_t || ref) with ref = ref_dist, else the previous step's token_dist.
// Without either reference the step is treated as stable (0).
double decoding_stability(const StepRecord& step, const StepRecord* prev, const TraceMeta& meta);

// Mean cosine between adjacent layers' temporal deltas h_t^l - h_{t-1}^l.
// Neutral (1) at the first step, for single-layer traces, and for digest
// traces that carry no consolidation scalar.
double consolidation(const StepRecord& step, const StepRecord* prev, const TraceMeta& meta);

// Fraction of attention peaks (max over layers > theta) that land on
// concept-active positions; neutral (1) without concept flags.
double concept_reuse(const StepRecord& step, const ReuseConfig& cfg, const TraceMeta& meta);

ProxyVector compute_step_proxies(const StepRecord& step, const StepRecord* prev,
                                 const TraceMeta& meta, const ReuseConfig& cfg);

// One ProxyVector per step. Errors carry the offending step index.
std::vector<ProxyVector> compute_proxies(const Trace& trace, const ReuseConfig& cfg = {});

// Converts a full-mode trace to digest mode: hidden states are replaced by
// per-layer entropy/dispersion and the consolidation scalar. Attention rows
// (and with them concept flags) are dropped unless `keep_attention`.
Trace make_digest(const Trace& full, bool keep_attention = true);

}  // namespace clt
