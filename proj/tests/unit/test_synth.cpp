#include <doctest.h>

#include <cmath>

#include "clt/composition.hpp"
#include "clt/error.hpp"
#include "clt/synth.hpp"
#include "clt/validate.hpp"
#include "oracle.hpp"

using namespace clt;

namespace {

struct PhaseMeans {
  std::array<double, 3> sum{};
  std::array<std::size_t, 3> count{};

  void add(PhaseName p, double v) {
    sum[static_cast<std::size_t>(p)] += v;
    ++count[static_cast<std::size_t>(p)];
  }
  double operator[](PhaseName p) const {
    const auto i = static_cast<std::size_t>(p);
    return sum[i] / static_cast<double>(count[i]);
  }
};

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("same seed gives the same trace, different seeds differ") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.steps = 150;
    const auto a = generate(cfg);
    const auto b = generate(cfg);
    CHECK(a.trace == b.trace);
    CHECK(a.phases == b.phases);
    cfg.seed = 2;
    CHECK_FALSE(generate(cfg).trace == a.trace);
  }

  TEST_CASE("generated traces are valid for every preset and shape") {
    for (const char* name : {"default", "uncoupled", "separated"}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SynthConfig cfg = *SynthConfig::preset(name);
        cfg.seed = seed;
        cfg.steps = 120;
        if (seed == 2) {
          cfg.num_layers = 1;
          cfg.hidden_dim = 3;
        }
        if (seed == 3) {
          cfg.context_init = 2;
          cfg.context_max = 100;
          cfg.context_growth = 3;
        }
        const auto out = generate(cfg);
        CHECK(out.trace.steps.size() == 120);
        CHECK(out.phases.size() == 120);
        const auto violations = validate_trace(out.trace);
        for (const auto& v : violations) INFO(v.to_string());
        CHECK(violations.empty());
      }
    }
  }

  TEST_CASE("config validation") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.phases.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SynthConfig::defaults();
    cfg.steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SynthConfig::defaults();
    cfg.kappa = -1.0;
    CHECK_THROWS_AS(Generator{cfg}, ConfigError);
    cfg = SynthConfig::defaults();
    cfg.phases[0].miss_prob = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_FALSE(SynthConfig::preset("nope").has_value());
  }

  TEST_CASE("uncoupled errors: base rate and zero EL correlation") {
    SynthConfig cfg = SynthConfig::uncoupled();
    cfg.seed = 5;
    cfg.steps = 20000;
    const auto out = generate(cfg);
    const auto points = compute_clt(out.trace, {}, {}, NormMode::kOffline);
    std::vector<double> el;
    std::vector<bool> labels;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      el.push_back(points[i].el);
      labels.push_back(*out.trace.steps[i].error_event);
      errors += labels.back();
    }
    const double rate = static_cast<double>(errors) / 20000.0;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
    CHECK(std::abs(oracle::pearson_binary(el, labels)) <= 0.03);
  }

  TEST_CASE("per-phase miss probability shows in the raw miss proxy") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.steps = 3000;
    cfg.seed = 9;
    for (auto& p : cfg.phases) {
      if (p.name == PhaseName::kSearch) p.miss_prob = 0.6;
      if (p.name == PhaseName::kPlanning) p.miss_prob = 0.1;
    }
    const auto out = generate(cfg);
    const auto points = compute_clt(out.trace, {}, {}, NormMode::kOffline);
    PhaseMeans miss;
    for (std::size_t i = 0; i < points.size(); ++i) miss.add(out.phases[i], points[i].raw.miss);
    CHECK(miss[PhaseName::kSearch] > miss[PhaseName::kPlanning]);
    CHECK(miss[PhaseName::kSearch] == doctest::Approx(0.6).epsilon(0.1));
    CHECK(miss[PhaseName::kPlanning] == doctest::Approx(0.1).epsilon(0.3));
  }

  TEST_CASE("phase-load ordering on the default config") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.steps = 5000;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      cfg.seed = seed;
      const auto out = generate(cfg);
      const auto points = compute_clt(out.trace, {}, {}, NormMode::kOffline);
      PhaseMeans el, gl;
      for (std::size_t i = 0; i < points.size(); ++i) {
        el.add(out.phases[i], points[i].el);
        gl.add(out.phases[i], points[i].gl);
      }
      CHECK(el[PhaseName::kSearch] > el[PhaseName::kPlanning]);
      CHECK(gl[PhaseName::kPlanning] > gl[PhaseName::kSearch]);
    }
  }

  TEST_CASE("effects scale parameters for their duration and then expire") {
    SynthConfig cfg = SynthConfig::defaults();
    for (auto& p : cfg.phases) p.miss_prob = 0.6;
    Generator g(cfg);
    const auto before = g.effective_params(PhaseName::kSearch);
    g.apply_effect({{{"miss_prob", 0.5}}, 3});
    CHECK(g.effective_params(PhaseName::kSearch)[SynthParam::kMissProb] == 0.3);
    for (int i = 0; i < 2; ++i) (void)g.next();
    CHECK(g.effective_params(PhaseName::kSearch)[SynthParam::kMissProb] == 0.3);
    (void)g.next();
    CHECK(g.active_effects() == 0);
    CHECK(g.effective_params(PhaseName::kSearch)[SynthParam::kMissProb] == 0.6);
    CHECK(g.effective_params(PhaseName::kSearch) == before);
  }

  TEST_CASE("effects clamp and compose multiplicatively") {
    SynthConfig cfg = SynthConfig::defaults();
    for (auto& p : cfg.phases) p.miss_prob = 0.6;
    Generator g(cfg);
    g.apply_effect({{{"miss_prob", 3.0}}, 2});
    CHECK(g.effective_params(PhaseName::kPlanning)[SynthParam::kMissProb] == 1.0);

    Generator h(cfg);
    const double walk = h.effective_params(PhaseName::kSearch)[SynthParam::kWalkScale];
    h.apply_effect({{{"walk_scale", 0.5}}, 4});
    h.apply_effect({{{"walk_scale", 0.3}, {"miss_prob", 0.5}}, 2});
    CHECK(h.effective_params(PhaseName::kSearch)[SynthParam::kWalkScale] ==
          doctest::Approx(walk * 0.5 * 0.3).epsilon(1e-15));
    CHECK(h.effective_params(PhaseName::kSearch)[SynthParam::kMissProb] == 0.3);
    (void)h.next();
    (void)h.next();
    CHECK(h.effective_params(PhaseName::kSearch)[SynthParam::kWalkScale] ==
          doctest::Approx(walk * 0.5).epsilon(1e-15));
    (void)h.next();
    (void)h.next();
    CHECK(h.effective_params(PhaseName::kSearch)[SynthParam::kWalkScale] == walk);
  }

  TEST_CASE("unknown parameters are rejected") {
    Generator g(SynthConfig::defaults());
    CHECK_THROWS_AS(g.apply_effect({{{"temperature", 0.5}}, 3}), UnknownParameter);
    CHECK_THROWS_AS((void)parse_synth_param("kappa"), UnknownParameter);
    CHECK(g.active_effects() == 0);
  }

  TEST_CASE("an effect changes only the channels it touches") {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.steps = 60;
    Generator a(cfg), b(cfg);
    std::vector<StepRecord> ra, rb;
    std::vector<PhaseName> pa, pb;
    b.apply_effect({{{"miss_prob", 0.1}}, 60});
    while (!a.done()) {
      ra.push_back(a.next());
      pa.push_back(a.last_phase());
      rb.push_back(b.next());
      pb.push_back(b.last_phase());
    }
    CHECK(pa == pb);
    std::size_t miss_diff = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(ra[i].attention == rb[i].attention);
      CHECK(ra[i].hidden == rb[i].hidden);
      miss_diff += ra[i].cache_hits != rb[i].cache_hits;
    }
    CHECK(miss_diff > 0);
  }
}
