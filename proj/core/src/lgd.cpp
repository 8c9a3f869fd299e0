#include "clt/lgd.hpp"

#include <cstdio>
#include <sstream>

#include "clt/analytics.hpp"
#include "clt/error.hpp"
#include "clt/proxies.hpp"

namespace clt {
namespace {

double target_load(LoadComponent target, const Loads& clt) {
  switch (target) {
    case LoadComponent::kIntrinsic: return clt.il;
    case LoadComponent::kExtraneous: return clt.el;
    case LoadComponent::kGermane: return clt.gl;
    case LoadComponent::kCli: break;
  }
  throw ConfigError("intervention target must be IL, EL or GL");
}

RunMetrics metrics(std::span<const LoadPoint> points, const Trace& trace,
                   const InterventionHistory& history, double threshold) {
  RunMetrics m;
  m.steps = points.size();
  for (const auto& p : points) {
    m.cumulative_el += p.el;
    if (p.el > threshold) ++m.el_spikes;
  }
  for (const auto& s : trace.steps) m.errors += s.error_event.value_or(false) ? 1 : 0;
  m.interventions = history.events.size();
  return m;
}

double relative_drop(double before, double after) {
  if (before == 0.0) return after == 0.0 ? 0.0 : -1.0;
  return (before - after) / before;
}

}  // namespace

std::string_view to_string(Tier tier) { return tier == Tier::kWarn ? "warn" : "act"; }

Tier parse_tier(std::string_view text) {
  if (text == "warn") return Tier::kWarn;
  if (text == "act") return Tier::kAct;
  throw ConfigError("unknown tier '" + std::string(text) + "'");
}

void LgdConfig::validate() const {
  if (!(tau_warn >= 0.0 && tau_warn <= 1.0 && tau_act >= 0.0 && tau_act <= 1.0)) {
    throw ConfigError("thresholds must lie in [0, 1]");
  }
  if (!(tau_warn < tau_act)) throw ConfigError("tau_warn must be < tau_act");
  if (cooldown < 0) throw ConfigError("cooldown must be >= 0");
}

void Intervention::validate() const {
  if (id.empty()) throw ConfigError("intervention id must not be empty");
  if (target == LoadComponent::kCli) {
    throw ConfigError("intervention " + id + ": target must be IL, EL or GL");
  }
  effect.validate();
}

std::optional<std::int64_t> InterventionHistory::last_fired(std::string_view id) const {
  for (auto it = events.rbegin(); it != events.rend(); ++it) {
    if (it->intervention_id == id) return it->step;
  }
  return std::nullopt;
}

double score_intervention(const Intervention& intervention, const Loads& clt,
                          const InterventionHistory& history, std::int64_t step, int cooldown) {
  double score = target_load(intervention.target, clt);
  if (const auto last = history.last_fired(intervention.id);
      last && step - *last <= static_cast<std::int64_t>(cooldown)) {
    score -= kCooldownPenalty;
  }
  return score;
}

const Intervention& select_intervention(std::span<const Intervention> interventions, Tier tier,
                                        const Loads& clt, const InterventionHistory& history,
                                        std::int64_t step, int cooldown) {
  const Intervention* best = nullptr;
  double best_score = 0.0;
  for (const auto& candidate : interventions) {
    if (candidate.tier != tier) continue;
    const double score = score_intervention(candidate, clt, history, step, cooldown);
    if (best == nullptr || score > best_score) {
      best = &candidate;
      best_score = score;
    }
  }
  if (best == nullptr) {
    throw NoInterventionForTier("no " + std::string(to_string(tier)) + "-tier intervention");
  }
  return *best;
}

LgdController::LgdController(LgdConfig config, std::vector<Intervention> interventions)
    : config_(config), interventions_(std::move(interventions)) {
  config_.validate();
  for (const auto& i : interventions_) i.validate();
}

const Intervention* LgdController::observe(std::int64_t step, const Loads& clt, double cli) {
  std::optional<Tier> tier;
  if (cli > config_.tau_act) {
    tier = Tier::kAct;
  } else if (cli > config_.tau_warn) {
    tier = Tier::kWarn;
  }
  if (!tier) return nullptr;
  const Intervention& chosen =
      select_intervention(interventions_, *tier, clt, history_, step, config_.cooldown);
  history_.events.push_back({step, *tier, chosen.id, clt, cli});
  return &chosen;
}

std::optional<StepRecord> ReplaySource::next() {
  if (cursor_ >= trace_.steps.size()) return std::nullopt;
  return trace_.steps[cursor_++];
}

std::optional<StepRecord> SimulationSource::next() {
  if (generator_.done()) return std::nullopt;
  StepRecord s = generator_.next();
  phases_.push_back(generator_.last_phase());
  return s;
}

void SimulationSource::apply(const Intervention& intervention) {
  generator_.apply_effect(intervention.effect);
}

LgdRun run_lgd(StepSource& source, const LgdConfig& config, const CompositionWeights& cw,
               const CliWeights& w, std::vector<Intervention> interventions,
               const LgdRunOptions& options) {
  options.reuse.validate();
  LgdController controller(config, std::move(interventions));
  CausalComposer composer(cw, w, source.meta().epsilon);
  LgdRun run;
  run.trace.meta = source.meta();
  while (auto step = source.next()) {
    const StepRecord* prev = run.trace.steps.empty() ? nullptr : &run.trace.steps.back();
    const ProxyVector raw = compute_step_proxies(*step, prev, run.trace.meta, options.reuse);
    const LoadPoint point = composer.push(step->step, raw);
    if (options.interventions_enabled) {
      if (const Intervention* applied =
              controller.observe(point.step, {point.il, point.el, point.gl}, point.cli)) {
        source.apply(*applied);
      }
    }
    run.points.push_back(point);
    run.trace.steps.push_back(std::move(*step));
  }
  run.history = controller.history();
  return run;
}

double LgdComparison::cumulative_el_reduction() const {
  return relative_drop(baseline_metrics.cumulative_el, intervened_metrics.cumulative_el);
}

double LgdComparison::spike_reduction() const {
  return relative_drop(static_cast<double>(baseline_metrics.el_spikes),
                       static_cast<double>(intervened_metrics.el_spikes));
}

double LgdComparison::error_change() const {
  return -relative_drop(static_cast<double>(baseline_metrics.errors),
                        static_cast<double>(intervened_metrics.errors));
}

LgdComparison compare_lgd(const SynthConfig& synth, const LgdConfig& config,
                          const CompositionWeights& cw, const CliWeights& w,
                          const std::vector<Intervention>& interventions, double spike_threshold) {
  LgdComparison cmp;
  cmp.spike_threshold = spike_threshold;
  {
    SimulationSource source(synth);
    LgdRunOptions options;
    options.interventions_enabled = false;
    cmp.baseline = run_lgd(source, config, cw, w, interventions, options);
  }
  {
    SimulationSource source(synth);
    cmp.intervened = run_lgd(source, config, cw, w, interventions);
  }
  const double eps = synth.epsilon;
  std::vector<ProxyVector> base_raw, int_raw;
  for (const auto& p : cmp.baseline.points) base_raw.push_back(p.raw);
  for (const auto& p : cmp.intervened.points) int_raw.push_back(p.raw);
  cmp.reference = fit_norm_stats(base_raw);
  cmp.baseline_points = compose_points(base_raw, cmp.reference, cw, w, eps);
  cmp.intervened_points = compose_points(int_raw, cmp.reference, cw, w, eps);
  cmp.baseline_metrics =
      metrics(cmp.baseline_points, cmp.baseline.trace, cmp.baseline.history, spike_threshold);
  cmp.intervened_metrics = metrics(cmp.intervened_points, cmp.intervened.trace,
                                   cmp.intervened.history, spike_threshold);
  return cmp;
}

std::string format_comparison(const LgdComparison& cmp) {
  std::ostringstream os;
  char buf[200];
  const auto& b = cmp.baseline_metrics;
  const auto& i = cmp.intervened_metrics;
  os << "paired load-guided decoding comparison\n";
  os << "EL scored with baseline offline statistics; spike threshold " << cmp.spike_threshold
     << "\n";
  os << "metric            baseline      intervened    change\n";
  std::snprintf(buf, sizeof buf, "steps             %-12zu  %-12zu\n", b.steps, i.steps);
  os << buf;
  std::snprintf(buf, sizeof buf, "cumulative_el     %-12.6f  %-12.6f  %+.2f%%\n", b.cumulative_el,
                i.cumulative_el, -100.0 * cmp.cumulative_el_reduction());
  os << buf;
  std::snprintf(buf, sizeof buf, "el_spikes         %-12zu  %-12zu  %+.2f%%\n", b.el_spikes,
                i.el_spikes, -100.0 * cmp.spike_reduction());
  os << buf;
  std::snprintf(buf, sizeof buf, "errors            %-12zu  %-12zu  %+.2f%%\n", b.errors, i.errors,
                100.0 * cmp.error_change());
  os << buf;
  std::snprintf(buf, sizeof buf, "interventions     %-12zu  %-12zu\n", b.interventions,
                i.interventions);
  os << buf;
  return os.str();
}

std::vector<Intervention> default_interventions() {
  auto make = [](std::string id, LoadComponent target, Tier tier,
                 std::vector<std::pair<std::string, double>> mods, int duration) {
    return Intervention{std::move(id), target, tier, Effect{std::move(mods), duration}};
  };
  using LC = LoadComponent;
  return {
      make("planning-aid", LC::kIntrinsic, Tier::kWarn,
           {{"attention_concentration", 0.5}, {"walk_scale", 0.7}}, 4),
      make("efficiency-aid", LC::kExtraneous, Tier::kWarn,
           {{"dist_drift", 0.4}, {"miss_prob", 0.4}}, 6),
      make("consolidation-aid", LC::kGermane, Tier::kWarn, {{"concept_hit_prob", 1.5}}, 4),
      make("hierarchical-attention", LC::kIntrinsic, Tier::kAct,
           {{"attention_concentration", 0.3}, {"walk_scale", 0.5}}, 8),
      make("cache-stabilization", LC::kExtraneous, Tier::kAct,
           {{"dist_drift", 0.2}, {"miss_prob", 0.2}}, 10),
      make("structured-decoding", LC::kGermane, Tier::kAct, {{"concept_hit_prob", 2.0}}, 8),
  };
}

}  // namespace clt
