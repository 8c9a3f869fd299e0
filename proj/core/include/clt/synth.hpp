#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clt/trace.hpp"

namespace clt {

enum class PhaseName { kPlanning = 0, kSearch = 1, kConsolidation = 2 };

std::string_view to_string(PhaseName p);
PhaseName parse_phase_name(std::string_view text);

struct PhaseSpec {
  PhaseName name = PhaseName::kPlanning;
  double attention_concentration = 1.0;  // Dirichlet concentration of attention rows
  double walk_scale = 0.5;               // hidden-state step size
  double miss_prob = 0.1;
  double dist_drift = 0.05;  // mixing weight pulling p_t away from p_{t-1}
  double concept_hit_prob = 0.5;
  int mean_duration = 10;        // geometric, in steps
  double layer_alignment = 0.0;  // correlation of adjacent-layer deltas, [-1, 1]

  void validate() const;
};

// Generator parameters that interventions may scale.
enum class SynthParam {
  kAttentionConcentration = 0,
  kWalkScale,
  kMissProb,
  kDistDrift,
  kConceptHitProb,
  kLayerAlignment,
};
inline constexpr std::size_t kSynthParamCount = 6;
inline constexpr std::array<std::string_view, kSynthParamCount> kSynthParamNames = {
    "attention_concentration", "walk_scale", "miss_prob", "dist_drift", "concept_hit_prob",
    "layer_alignment"};

// Throws UnknownParameter.
SynthParam parse_synth_param(std::string_view name);

struct SynthParams {
  std::array<double, kSynthParamCount> values{};

  double& operator[](SynthParam p) { return values[static_cast<std::size_t>(p)]; }
  double operator[](SynthParam p) const { return values[static_cast<std::size_t>(p)]; }
  static SynthParams from_phase(const PhaseSpec& phase);
  bool operator==(const SynthParams&) const = default;
};

// Multiplicative modifiers applied to generator parameters for `duration` steps.
struct Effect {
  std::vector<std::pair<std::string, double>> modifiers;
  int duration = 1;

  void validate() const;
  bool operator==(const Effect&) const = default;
};

struct SynthConfig {
  std::vector<PhaseSpec> phases;
  int num_layers = 4;
  int hidden_dim = 16;
  int context_init = 16;
  int context_growth = 1;
  int context_max = 32;
  int vocab = 32;
  double token_concentration = 0.3;  // Dirichlet concentration of drift targets
  double reversion = 0.2;            // pull of hidden deviations back to the layer mean
  double kappa = 0.0;                // error coupling to raw miss + stability
  double error_offset = 2.9444389791664403;  // ln 19: 5% base rate at kappa = 0
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 1;
  int steps = 200;

  void validate() const;

  // Strong EL-error coupling; the configuration the acceptance suite uses.
  static SynthConfig defaults();
  // defaults() with kappa = 0.
  static SynthConfig uncoupled();
  // Phases far apart in load space, for strategy clustering.
  static SynthConfig separated();
  static std::optional<SynthConfig> preset(std::string_view name);
};

struct SynthOutput {
  Trace trace;
  std::vector<PhaseName> phases;  // ground-truth phase per step
};

// Step-at-a-time generator. Every random channel (phase, attention, hidden,
// cache, token distribution, concept flags, errors) owns its own engine, so
// an intervention that changes one parameter never shifts the draws of the
// others: paired runs with the same seed stay aligned.
class Generator {
 public:
  explicit Generator(SynthConfig config);

  const TraceMeta& meta() const { return meta_; }
  const SynthConfig& config() const { return config_; }
  bool done() const { return next_step_ >= config_.steps; }
  std::int64_t next_step() const { return next_step_; }

  StepRecord next();
  PhaseName last_phase() const { return last_phase_; }

  // Scales parameters for the next effect.duration generated steps.
  void apply_effect(const Effect& effect);
  // Parameters the next step of `phase` would be generated with.
  SynthParams effective_params(PhaseName phase) const;
  std::size_t active_effects() const { return active_.size(); }

 private:
  struct ActiveEffect {
    std::vector<std::pair<SynthParam, double>> modifiers;
    int remaining = 0;
  };

  const PhaseSpec& spec_for(PhaseName phase) const;
  void advance_phase();
  std::vector<double> dirichlet(std::mt19937_64& rng, double concentration, std::size_t n);

  SynthConfig config_;
  TraceMeta meta_;
  std::int64_t next_step_ = 0;
  std::size_t phase_index_ = 0;
  PhaseName last_phase_ = PhaseName::kPlanning;
  std::vector<ActiveEffect> active_;

  std::mt19937_64 phase_rng_, attention_rng_, hidden_rng_, cache_rng_, dist_rng_, concept_rng_,
      error_rng_;
  std::vector<double> center_;
  std::vector<std::vector<double>> deviation_;
  std::vector<double> token_dist_;
  std::optional<StepRecord> prev_;
};

SynthOutput generate(const SynthConfig& config);

}  // namespace clt
