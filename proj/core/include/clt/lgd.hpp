#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clt/composition.hpp"
#include "clt/synth.hpp"
#include "clt/trace.hpp"

namespace clt {

enum class Tier { kWarn, kAct };

std::string_view to_string(Tier tier);
Tier parse_tier(std::string_view text);

struct LgdConfig {
  double tau_warn = 0.6;
  double tau_act = 0.8;
  int cooldown = 5;

  void validate() const;
};

struct Intervention {
  std::string id;
  LoadComponent target = LoadComponent::kExtraneous;  // IL, EL or GL
  Tier tier = Tier::kWarn;
  Effect effect;

  void validate() const;
};

struct InterventionEvent {
  std::int64_t step = 0;
  Tier tier = Tier::kWarn;
  std::string intervention_id;
  Loads clt;
  double cli = 0.0;
};

struct InterventionHistory {
  std::vector<InterventionEvent> events;

  // Step at which `id` last fired, if ever.
  std::optional<std::int64_t> last_fired(std::string_view id) const;
};

inline constexpr double kCooldownPenalty = 1.0;

// Target load minus kCooldownPenalty when the same intervention fired within
// the last `cooldown` steps.
double score_intervention(const Intervention& intervention, const Loads& clt,
                          const InterventionHistory& history, std::int64_t step, int cooldown);

// Argmax of score among interventions of `tier`; ties keep declaration order.
const Intervention& select_intervention(std::span<const Intervention> interventions, Tier tier,
                                        const Loads& clt, const InterventionHistory& history,
                                        std::int64_t step, int cooldown);

// Two-tier threshold control: act is checked before warn, at most one event
// per step.
class LgdController {
 public:
  LgdController(LgdConfig config, std::vector<Intervention> interventions);

  // Returns the intervention applied at this step, if any.
  const Intervention* observe(std::int64_t step, const Loads& clt, double cli);

  const InterventionHistory& history() const { return history_; }
  const LgdConfig& config() const { return config_; }

 private:
  LgdConfig config_;
  std::vector<Intervention> interventions_;
  InterventionHistory history_;
};

// A stream of decoding steps. Live sources react to applied interventions.
class StepSource {
 public:
  virtual ~StepSource() = default;
  virtual const TraceMeta& meta() const = 0;
  virtual std::optional<StepRecord> next() = 0;
  virtual void apply(const Intervention& intervention) = 0;
};

// Recorded trace: interventions are logged only.
class ReplaySource final : public StepSource {
 public:
  explicit ReplaySource(const Trace& trace) : trace_(trace) {}
  const TraceMeta& meta() const override { return trace_.meta; }
  std::optional<StepRecord> next() override;
  void apply(const Intervention&) override {}

 private:
  const Trace& trace_;
  std::size_t cursor_ = 0;
};

// Synthetic generator: interventions modify subsequent generation.
class SimulationSource final : public StepSource {
 public:
  explicit SimulationSource(SynthConfig config) : generator_(std::move(config)) {}
  const TraceMeta& meta() const override { return generator_.meta(); }
  std::optional<StepRecord> next() override;
  void apply(const Intervention& intervention) override;

  const std::vector<PhaseName>& phases() const { return phases_; }

 private:
  Generator generator_;
  std::vector<PhaseName> phases_;
};

struct LgdRun {
  Trace trace;                     // every step the controller observed
  std::vector<LoadPoint> points;   // causal load points the controller saw
  InterventionHistory history;
};

struct LgdRunOptions {
  bool interventions_enabled = true;
  ReuseConfig reuse;
};

LgdRun run_lgd(StepSource& source, const LgdConfig& config, const CompositionWeights& cw,
               const CliWeights& w, std::vector<Intervention> interventions,
               const LgdRunOptions& options = {});

struct RunMetrics {
  std::size_t steps = 0;
  std::size_t el_spikes = 0;
  double cumulative_el = 0.0;
  std::size_t errors = 0;
  std::size_t interventions = 0;
};

struct LgdComparison {
  LgdRun baseline;
  LgdRun intervened;
  // Both runs scored with offline statistics fitted on the baseline, so the
  // two EL series share one scale.
  NormStats reference;
  std::vector<LoadPoint> baseline_points;
  std::vector<LoadPoint> intervened_points;
  RunMetrics baseline_metrics;
  RunMetrics intervened_metrics;
  double spike_threshold = 0.8;

  double cumulative_el_reduction() const;  // fraction, positive = improvement
  double spike_reduction() const;
  double error_change() const;  // relative, positive = more errors
};

// Paired seeded simulations: interventions disabled vs enabled.
LgdComparison compare_lgd(const SynthConfig& synth, const LgdConfig& config,
                          const CompositionWeights& cw, const CliWeights& w,
                          const std::vector<Intervention>& interventions,
                          double spike_threshold = 0.8);

std::string format_comparison(const LgdComparison& cmp);

std::vector<Intervention> default_interventions();

}  // namespace clt
