#include "clt/synth.hpp"

#include <algorithm>
#include <cmath>

#include "clt/error.hpp"
#include "clt/proxies.hpp"
#include "clt/stats.hpp"

namespace clt {
namespace {

// Distribution helpers written out rather than taken from <random> so that
// generated traces (and the committed golden files) do not depend on the
// standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// Marsaglia-Tsang, with the shape < 1 boost.
double gamma_sample(std::mt19937_64& rng, double shape) {
  if (shape < 1.0) {
    const double u = uniform01(rng);
    return gamma_sample(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::mt19937_64 channel_engine(std::uint64_t seed, std::uint32_t channel) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    channel};
  return std::mt19937_64(seq);
}

void clamp_params(SynthParams& p) {
  p[SynthParam::kAttentionConcentration] = std::max(p[SynthParam::kAttentionConcentration], 1e-3);
  p[SynthParam::kWalkScale] = std::max(p[SynthParam::kWalkScale], 0.0);
  p[SynthParam::kMissProb] = std::clamp(p[SynthParam::kMissProb], 0.0, 1.0);
  p[SynthParam::kDistDrift] = std::clamp(p[SynthParam::kDistDrift], 0.0, 1.0);
  p[SynthParam::kConceptHitProb] = std::clamp(p[SynthParam::kConceptHitProb], 0.0, 1.0);
  p[SynthParam::kLayerAlignment] = std::clamp(p[SynthParam::kLayerAlignment], -1.0, 1.0);
}

PhaseSpec phase(PhaseName name, double concentration, double walk, double miss, double drift,
                double concept_hit, int duration, double alignment) {
  return {name, concentration, walk, miss, drift, concept_hit, duration, alignment};
}

}  // namespace

std::string_view to_string(PhaseName p) {
  switch (p) {
    case PhaseName::kPlanning: return "planning";
    case PhaseName::kSearch: return "search";
    case PhaseName::kConsolidation: return "consolidation";
  }
  return "?";
}

PhaseName parse_phase_name(std::string_view text) {
  if (text == "planning") return PhaseName::kPlanning;
  if (text == "search") return PhaseName::kSearch;
  if (text == "consolidation") return PhaseName::kConsolidation;
  throw ConfigError("unknown phase '" + std::string(text) + "'");
}

void PhaseSpec::validate() const {
  const std::string where = "phase " + std::string(to_string(name)) + ": ";
  if (!(attention_concentration > 0.0)) throw ConfigError(where + "attention_concentration > 0");
  if (!(walk_scale > 0.0)) throw ConfigError(where + "walk_scale > 0");
  auto unit = [&](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(where + field + " must lie in [0, 1]");
  };
  unit(miss_prob, "miss_prob");
  unit(dist_drift, "dist_drift");
  unit(concept_hit_prob, "concept_hit_prob");
  if (mean_duration < 1) throw ConfigError(where + "mean_duration >= 1");
  if (!(layer_alignment >= -1.0 && layer_alignment <= 1.0)) {
    throw ConfigError(where + "layer_alignment must lie in [-1, 1]");
  }
}

SynthParam parse_synth_param(std::string_view name) {
  for (std::size_t i = 0; i < kSynthParamCount; ++i) {
    if (kSynthParamNames[i] == name) return static_cast<SynthParam>(i);
  }
  throw UnknownParameter("'" + std::string(name) + "'");
}

SynthParams SynthParams::from_phase(const PhaseSpec& phase) {
  SynthParams p;
  p[SynthParam::kAttentionConcentration] = phase.attention_concentration;
  p[SynthParam::kWalkScale] = phase.walk_scale;
  p[SynthParam::kMissProb] = phase.miss_prob;
  p[SynthParam::kDistDrift] = phase.dist_drift;
  p[SynthParam::kConceptHitProb] = phase.concept_hit_prob;
  p[SynthParam::kLayerAlignment] = phase.layer_alignment;
  return p;
}

void Effect::validate() const {
  if (duration < 1) throw ConfigError("effect duration must be >= 1");
  for (const auto& [name, factor] : modifiers) {
    parse_synth_param(name);
    if (!(factor > 0.0) || !std::isfinite(factor)) {
      throw ConfigError("effect modifier for " + name + " must be positive");
    }
  }
}

void SynthConfig::validate() const {
  if (phases.empty()) throw ConfigError("synth config needs at least one phase");
  for (const auto& p : phases) p.validate();
  if (num_layers < 1 || hidden_dim < 1) throw ConfigError("num_layers and hidden_dim must be >= 1");
  if (context_init < 1 || context_growth < 0 || context_max < context_init) {
    throw ConfigError("context shape must satisfy 1 <= context_init <= context_max");
  }
  if (vocab < 2) throw ConfigError("vocab must be >= 2");
  if (!(token_concentration > 0.0)) throw ConfigError("token_concentration must be > 0");
  if (!(reversion > 0.0 && reversion < 1.0)) throw ConfigError("reversion must lie in (0, 1)");
  if (!(kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (steps < 1) throw ConfigError("steps must be >= 1");
}

SynthConfig SynthConfig::defaults() {
  SynthConfig c;
  c.phases = {
      phase(PhaseName::kPlanning, 1.0, 0.6, 0.03, 0.03, 0.15, 12, -0.5),
      phase(PhaseName::kSearch, 0.3, 0.6, 0.60, 0.50, 0.90, 6, 0.0),
      phase(PhaseName::kConsolidation, 0.1, 0.2, 0.04, 0.04, 0.50, 12, 0.9),
  };
  // Short contexts and peaked drift targets keep search-phase EL noisy enough
  // to cross 0.8 on most error steps.
  c.context_init = 8;
  c.context_max = 16;
  c.token_concentration = 0.1;
  c.kappa = 8.0;
  return c;
}

SynthConfig SynthConfig::uncoupled() {
  SynthConfig c = defaults();
  c.kappa = 0.0;
  return c;
}

SynthConfig SynthConfig::separated() {
  SynthConfig c = defaults();
  c.phases = {
      phase(PhaseName::kPlanning, 2.0, 0.8, 0.05, 0.02, 0.05, 30, -0.8),
      phase(PhaseName::kSearch, 0.3, 0.8, 0.80, 0.80, 0.95, 30, 0.0),
      phase(PhaseName::kConsolidation, 0.05, 0.1, 0.25, 0.10, 0.50, 30, 0.95),
  };
  c.context_init = 16;
  c.context_max = 32;
  c.token_concentration = 0.3;
  return c;
}

std::optional<SynthConfig> SynthConfig::preset(std::string_view name) {
  if (name == "default") return defaults();
  if (name == "uncoupled") return uncoupled();
  if (name == "separated") return separated();
  return std::nullopt;
}

Generator::Generator(SynthConfig config)
    : config_(std::move(config)),
      phase_rng_(channel_engine(config_.seed, 1)),
      attention_rng_(channel_engine(config_.seed, 2)),
      hidden_rng_(channel_engine(config_.seed, 3)),
      cache_rng_(channel_engine(config_.seed, 4)),
      dist_rng_(channel_engine(config_.seed, 5)),
      concept_rng_(channel_engine(config_.seed, 6)),
      error_rng_(channel_engine(config_.seed, 7)) {
  config_.validate();
  meta_.num_layers = config_.num_layers;
  meta_.hidden_dim = config_.hidden_dim;
  meta_.mode = TraceMode::kFull;
  meta_.epsilon = config_.epsilon;
  meta_.source = "synth seed=" + std::to_string(config_.seed) +
                 " kappa=" + std::to_string(config_.kappa);

  phase_index_ = static_cast<std::size_t>(uniform01(phase_rng_) *
                                          static_cast<double>(config_.phases.size()));
  phase_index_ = std::min(phase_index_, config_.phases.size() - 1);

  const auto dim = static_cast<std::size_t>(config_.hidden_dim);
  center_.resize(dim);
  for (double& c : center_) c = standard_normal(hidden_rng_);
  const double keep = 1.0 - config_.reversion;
  const double stationary = config_.phases[phase_index_].walk_scale / std::sqrt(1.0 - keep * keep);
  deviation_.assign(static_cast<std::size_t>(config_.num_layers), std::vector<double>(dim));
  for (auto& u : deviation_) {
    for (double& x : u) x = stationary * standard_normal(hidden_rng_);
  }
  token_dist_ = dirichlet(dist_rng_, 1.0, static_cast<std::size_t>(config_.vocab));
}

const PhaseSpec& Generator::spec_for(PhaseName phase) const {
  for (const auto& p : config_.phases) {
    if (p.name == phase) return p;
  }
  return config_.phases.front();
}

std::vector<double> Generator::dirichlet(std::mt19937_64& rng, double concentration,
                                         std::size_t n) {
  std::vector<double> out(n);
  double sum = 0.0;
  for (double& x : out) {
    x = gamma_sample(rng, concentration);
    sum += x;
  }
  if (!(sum > 0.0)) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  for (double& x : out) x /= sum;
  return out;
}

void Generator::advance_phase() {
  const double leave = uniform01(phase_rng_);
  const double pick = uniform01(phase_rng_);
  const auto& current = config_.phases[phase_index_];
  if (config_.phases.size() < 2 || leave >= 1.0 / current.mean_duration) return;
  const std::size_t others = config_.phases.size() - 1;
  auto offset = static_cast<std::size_t>(pick * static_cast<double>(others));
  offset = std::min(offset, others - 1);
  phase_index_ = (phase_index_ + 1 + offset) % config_.phases.size();
}

SynthParams Generator::effective_params(PhaseName phase) const {
  SynthParams p = SynthParams::from_phase(spec_for(phase));
  for (const auto& effect : active_) {
    for (const auto& [param, factor] : effect.modifiers) p[param] *= factor;
  }
  clamp_params(p);
  return p;
}

void Generator::apply_effect(const Effect& effect) {
  effect.validate();
  ActiveEffect active;
  active.remaining = effect.duration;
  for (const auto& [name, factor] : effect.modifiers) {
    active.modifiers.emplace_back(parse_synth_param(name), factor);
  }
  active_.push_back(std::move(active));
}

StepRecord Generator::next() {
  if (done()) throw ConfigError("generator exhausted");
  const std::int64_t t = next_step_;
  if (t > 0) advance_phase();
  const PhaseName phase = config_.phases[phase_index_].name;
  const SynthParams params = effective_params(phase);
  const auto layers = static_cast<std::size_t>(config_.num_layers);
  const auto dim = static_cast<std::size_t>(config_.hidden_dim);
  const auto width = static_cast<std::size_t>(
      std::min<std::int64_t>(config_.context_init + t * config_.context_growth,
                             config_.context_max));

  StepRecord s;
  s.step = t;

  s.attention.reserve(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    s.attention.push_back(
        dirichlet(attention_rng_, params[SynthParam::kAttentionConcentration], width));
  }

  // Layer deltas share a common direction with weight |alignment|; negative
  // alignment flips the shared direction on alternate layers.
  const double align = params[SynthParam::kLayerAlignment];
  const double shared_w = std::abs(align);
  const double own_w = std::sqrt(std::max(0.0, 1.0 - align * align));
  const double walk = params[SynthParam::kWalkScale];
  std::vector<double> shared(dim);
  for (double& z : shared) z = standard_normal(hidden_rng_);
  s.hidden.resize(layers, std::vector<double>(dim));
  for (std::size_t l = 0; l < layers; ++l) {
    const double sign = (align < 0.0 && (l % 2 == 1)) ? -1.0 : 1.0;
    auto& u = deviation_[l];
    for (std::size_t i = 0; i < dim; ++i) {
      const double noise = sign * shared_w * shared[i] + own_w * standard_normal(hidden_rng_);
      u[i] = (1.0 - config_.reversion) * u[i] + walk * noise;
      s.hidden[l][i] = center_[i] + u[i];
    }
  }

  s.cache_queries = static_cast<std::int64_t>(width);
  const double hit_prob = 1.0 - params[SynthParam::kMissProb];
  for (std::size_t q = 0; q < width; ++q) {
    if (uniform01(cache_rng_) < hit_prob) ++s.cache_hits;
  }

  const double drift = params[SynthParam::kDistDrift];
  const auto target = dirichlet(dist_rng_, config_.token_concentration, token_dist_.size());
  if (t > 0) {
    double sum = 0.0;
    for (std::size_t i = 0; i < token_dist_.size(); ++i) {
      token_dist_[i] = (1.0 - drift) * token_dist_[i] + drift * target[i];
      sum += token_dist_[i];
    }
    for (double& p : token_dist_) p /= sum;
  }
  s.token_dist = token_dist_;

  std::vector<bool> flags(width);
  for (std::size_t i = 0; i < width; ++i) {
    flags[i] = uniform01(concept_rng_) < params[SynthParam::kConceptHitProb];
  }
  s.concept_active = std::move(flags);

  const double miss = cache_miss(s, meta_);
  const double stab = decoding_stability(s, prev_ ? &*prev_ : nullptr, meta_);
  const double p_error = logistic(config_.kappa * (miss + stab) - config_.error_offset);
  s.error_event = uniform01(error_rng_) < p_error;

  for (auto& e : active_) --e.remaining;
  std::erase_if(active_, [](const ActiveEffect& e) { return e.remaining <= 0; });

  last_phase_ = phase;
  ++next_step_;
  prev_ = s;
  return s;
}

SynthOutput generate(const SynthConfig& config) {
  Generator gen(config);
  SynthOutput out;
  out.trace.meta = gen.meta();
  out.trace.steps.reserve(static_cast<std::size_t>(config.steps));
  out.phases.reserve(static_cast<std::size_t>(config.steps));
  while (!gen.done()) {
    out.trace.steps.push_back(gen.next());
    out.phases.push_back(gen.last_phase());
  }
  return out;
}

}  // namespace clt
