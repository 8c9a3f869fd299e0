#include "clt/proxies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clt/error.hpp"

namespace clt {
namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

double& ProxyVector::operator[](Proxy p) {
  switch (p) {
    case Proxy::kEntropy: return entropy;
    case Proxy::kDispersion: return dispersion;
    case Proxy::kMiss: return miss;
    case Proxy::kStability: return stability;
    case Proxy::kConsolidation: return consolidation;
    case Proxy::kReuse: return reuse;
  }
  return reuse;
}

double ProxyVector::operator[](Proxy p) const {
  return const_cast<ProxyVector&>(*this)[p];
}

void ReuseConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw ConfigError("reuse theta must lie in (0, 1), got " + std::to_string(theta));
  }
}

double row_entropy(std::span<const double> row) {
  double h = 0.0;
  for (double a : row) {
    if (a > 0.0) h -= a * std::log(a);
  }
  return h;
}

std::vector<double> layer_entropies(const StepRecord& step, const TraceMeta& /*meta*/) {
  if (!step.attention.empty()) {
    std::vector<double> out;
    out.reserve(step.attention.size());
    for (const auto& row : step.attention) out.push_back(row_entropy(row));
    return out;
  }
  if (step.digest) return step.digest->entropy;
  throw MissingField("attention rows and digest entropy both absent");
}

double attention_entropy(const StepRecord& step, const TraceMeta& meta) {
  return mean(layer_entropies(step, meta));
}

std::vector<double> layer_dispersions(const StepRecord& step, const TraceMeta& meta) {
  if (step.has_hidden()) {
    const std::size_t layers = step.hidden.size();
    const std::size_t dim = step.hidden.front().size();
    std::vector<double> centroid(dim, 0.0);
    for (const auto& h : step.hidden) {
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += h[i];
    }
    for (double& c : centroid) c /= static_cast<double>(layers);
    const double denom = norm2(centroid) + meta.epsilon;

    std::vector<double> out;
    out.reserve(layers);
    std::vector<double> diff(dim);
    for (const auto& h : step.hidden) {
      for (std::size_t i = 0; i < dim; ++i) diff[i] = h[i] - centroid[i];
      out.push_back(norm2(diff) / denom);
    }
    return out;
  }
  if (step.digest) return step.digest->dispersion;
  throw MissingField("hidden states and digest dispersion both absent");
}

double representation_dispersion(const StepRecord& step, const TraceMeta& meta) {
  return mean(layer_dispersions(step, meta));
}

double cache_miss(const StepRecord& step, const TraceMeta& meta) {
  const double hits = static_cast<double>(step.cache_hits);
  const double queries = static_cast<double>(step.cache_queries);
  return 1.0 - hits / (queries + meta.epsilon);
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon) {
  if (p.size() != q.size()) {
    throw LengthMismatch("distribution lengths differ: " + std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()));
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    kl += p[i] * std::log(p[i] / std::max(q[i], epsilon));
  }
  return std::clamp(kl, 0.0, kKlMax);
}

double decoding_stability(const StepRecord& step, const StepRecord* prev, const TraceMeta& meta) {
  if (step.ref_dist) return kl_divergence(step.token_dist, *step.ref_dist, meta.epsilon);
  if (prev == nullptr) return 0.0;
  return kl_divergence(step.token_dist, prev->token_dist, meta.epsilon);
}

double consolidation(const StepRecord& step, const StepRecord* prev, const TraceMeta& meta) {
  if (prev == nullptr || meta.num_layers < 2) return 1.0;
  if (step.has_hidden() && prev->has_hidden()) {
    const std::size_t layers = step.hidden.size();
    const std::size_t dim = step.hidden.front().size();
    std::vector<double> below(dim), above(dim);
    for (std::size_t i = 0; i < dim; ++i) below[i] = step.hidden[0][i] - prev->hidden[0][i];
    double sum = 0.0;
    for (std::size_t l = 1; l < layers; ++l) {
      for (std::size_t i = 0; i < dim; ++i) above[i] = step.hidden[l][i] - prev->hidden[l][i];
      sum += cosine(above, below);
      std::swap(below, above);
    }
    return sum / static_cast<double>(layers - 1);
  }
  if (step.digest && step.digest->consolidation) return *step.digest->consolidation;
  if (meta.mode == TraceMode::kDigest) return 1.0;
  throw MissingField("hidden states required for consolidation");
}

double concept_reuse(const StepRecord& step, const ReuseConfig& cfg, const TraceMeta& meta) {
  if (!step.concept_active || step.attention.empty()) return 1.0;
  const auto& flags = *step.concept_active;
  const std::size_t width = step.attention_width();
  if (flags.size() != width) {
    throw LengthMismatch("concept flags (" + std::to_string(flags.size()) +
                         ") vs attention width (" + std::to_string(width) + ")");
  }
  double peaks = 0.0, active = 0.0;
  for (std::size_t i = 0; i < width; ++i) {
    double peak = 0.0;
    for (const auto& row : step.attention) peak = std::max(peak, row[i]);
    if (peak > cfg.theta) {
      peaks += 1.0;
      if (flags[i]) active += 1.0;
    }
  }
  return active / (peaks + meta.epsilon);
}

ProxyVector compute_step_proxies(const StepRecord& step, const StepRecord* prev,
                                 const TraceMeta& meta, const ReuseConfig& cfg) {
  ProxyVector v;
  v.entropy = attention_entropy(step, meta);
  v.dispersion = representation_dispersion(step, meta);
  v.miss = cache_miss(step, meta);
  v.stability = decoding_stability(step, prev, meta);
  v.consolidation = consolidation(step, prev, meta);
  v.reuse = concept_reuse(step, cfg, meta);
  return v;
}

std::vector<ProxyVector> compute_proxies(const Trace& trace, const ReuseConfig& cfg) {
  cfg.validate();
  std::vector<ProxyVector> out;
  out.reserve(trace.size());
  const StepRecord* prev = nullptr;
  for (const auto& step : trace.steps) {
    const std::string where = "step " + std::to_string(step.step) + ": ";
    try {
      out.push_back(compute_step_proxies(step, prev, trace.meta, cfg));
    } catch (const MissingField& e) {
      throw MissingField(where + e.message());
    } catch (const LengthMismatch& e) {
      throw LengthMismatch(where + e.message());
    }
    prev = &step;
  }
  return out;
}

Trace make_digest(const Trace& full, bool keep_attention) {
  Trace out;
  out.meta = full.meta;
  out.meta.mode = TraceMode::kDigest;
  out.steps.reserve(full.steps.size());
  const StepRecord* prev = nullptr;
  for (const auto& step : full.steps) {
    StepRecord d = step;
    StepDigest digest;
    digest.entropy = layer_entropies(step, full.meta);
    digest.dispersion = layer_dispersions(step, full.meta);
    digest.consolidation = consolidation(step, prev, full.meta);
    d.digest = std::move(digest);
    d.hidden.clear();
    if (!keep_attention) {
      d.attention.clear();
      d.concept_active.reset();
    }
    out.steps.push_back(std::move(d));
    prev = &step;
  }
  return out;
}

}  // namespace clt
