#include <doctest.h>

#include <cmath>

#include "clt/error.hpp"
#include "clt/proxies.hpp"
#include "oracle.hpp"
#include "random_trace.hpp"

using namespace clt;

namespace {

TraceMeta meta_for(int layers, int dim, double eps = 1e-8) {
  TraceMeta m;
  m.num_layers = layers;
  m.hidden_dim = dim;
  m.epsilon = eps;
  return m;
}

StepRecord with_attention(std::vector<std::vector<double>> rows) {
  StepRecord s;
  s.attention = std::move(rows);
  return s;
}

StepRecord with_hidden(std::vector<std::vector<double>> h) {
  StepRecord s;
  s.hidden = std::move(h);
  return s;
}

}  // namespace

TEST_SUITE("proxies") {
  TEST_CASE("attention entropy examples") {
    const auto m1 = meta_for(1, 1);
    CHECK(attention_entropy(with_attention({{0.25, 0.25, 0.25, 0.25}}), m1) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(attention_entropy(with_attention({{0.0, 1.0, 0.0}}), m1) == 0.0);
    const auto two = with_attention({{0.5, 0.5}, {1.0, 0.0}});
    const double expected = oracle::entropy(two);
    CHECK(expected == doctest::Approx(0.346574).epsilon(1e-6));
    CHECK(attention_entropy(two, meta_for(2, 1)) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("entropy without attention or digest is a missing field") {
    StepRecord s;
    CHECK_THROWS_AS((void)attention_entropy(s, meta_for(1, 1)), MissingField);
  }

  TEST_CASE("representation dispersion examples") {
    const auto m = meta_for(2, 2);
    CHECK(representation_dispersion(with_hidden({{0.3, -1.0}, {0.3, -1.0}}), m) == 0.0);
    const auto a = with_hidden({{2.0, 0.0}, {0.0, 0.0}});
    CHECK(representation_dispersion(a, m) == doctest::Approx(oracle::dispersion(a, 1e-8)));
    CHECK(representation_dispersion(a, m) == doctest::Approx(1.0 / (1.0 + 1e-8)).epsilon(1e-14));
    const auto b = with_hidden({{1.0, 0.0}, {-1.0, 0.0}});
    CHECK(representation_dispersion(b, m) == doctest::Approx(1e8).epsilon(1e-12));
  }

  TEST_CASE("dispersion falls back to digest scalars") {
    StepRecord s;
    s.digest = StepDigest{{0.1, 0.2}, {1.0, 3.0}, std::nullopt};
    CHECK(representation_dispersion(s, meta_for(2, 2)) == doctest::Approx(2.0));
    CHECK(attention_entropy(s, meta_for(2, 2)) == doctest::Approx(0.15));
    StepRecord empty;
    CHECK_THROWS_AS((void)representation_dispersion(empty, meta_for(2, 2)), MissingField);
  }

  TEST_CASE("cache miss examples") {
    const auto m = meta_for(1, 1);
    StepRecord s;
    s.cache_hits = 10;
    s.cache_queries = 10;
    CHECK(std::abs(cache_miss(s, m)) < 1e-8);
    s.cache_hits = 0;
    s.cache_queries = 5;
    CHECK(cache_miss(s, m) == 1.0);
    s.cache_hits = 3;
    s.cache_queries = 4;
    CHECK(cache_miss(s, m) == doctest::Approx(oracle::miss(s, 1e-8)).epsilon(1e-14));
    CHECK(cache_miss(s, m) == doctest::Approx(0.25).epsilon(1e-8));
    s.cache_hits = 0;
    s.cache_queries = 0;
    CHECK(cache_miss(s, m) == 1.0);
  }

  TEST_CASE("KL divergence examples") {
    const std::vector<double> p{0.2, 0.3, 0.5};
    CHECK(kl_divergence(p, p, 1e-8) == 0.0);
    CHECK(kl_divergence(std::vector{1.0, 0.0}, std::vector{0.5, 0.5}, 1e-8) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const double floored = 0.5 * std::log(0.5) + 0.5 * std::log(0.5 / 1e-8);
    CHECK(floored == doctest::Approx(8.5).epsilon(0.01));
    CHECK(kl_divergence(std::vector{0.5, 0.5}, std::vector{1.0, 0.0}, 1e-8) ==
          doctest::Approx(floored).epsilon(1e-12));
    CHECK(kl_divergence(std::vector{1.0, 0.0}, std::vector{0.0, 1.0}, 1e-300) == kKlMax);
    CHECK_THROWS_AS((void)kl_divergence(std::vector{1.0}, std::vector{0.5, 0.5}, 1e-8),
                    LengthMismatch);
  }

  TEST_CASE("decoding stability reference selection") {
    const auto m = meta_for(1, 1);
    StepRecord prev, cur;
    prev.token_dist = {0.5, 0.5};
    cur.token_dist = {1.0, 0.0};
    CHECK(decoding_stability(cur, nullptr, m) == 0.0);
    CHECK(decoding_stability(cur, &prev, m) == doctest::Approx(std::log(2.0)));
    cur.ref_dist = std::vector{1.0, 0.0};
    CHECK(decoding_stability(cur, &prev, m) == 0.0);
    cur.ref_dist = std::vector{0.25, 0.25, 0.5};
    CHECK_THROWS_AS((void)decoding_stability(cur, &prev, m), LengthMismatch);
  }

  TEST_CASE("consolidation examples") {
    const auto m = meta_for(2, 2);
    const auto prev = with_hidden({{0.0, 0.0}, {5.0, 5.0}});
    CHECK(consolidation(with_hidden({{1.0, 2.0}, {6.0, 7.0}}), &prev, m) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(consolidation(with_hidden({{1.0, 0.0}, {5.0, 6.0}}), &prev, m) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(consolidation(with_hidden({{1.0, 0.0}, {4.0, 5.0}}), &prev, m) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    // Zero-norm delta contributes 0.
    CHECK(consolidation(with_hidden({{0.0, 0.0}, {6.0, 5.0}}), &prev, m) == 0.0);
    // Neutral at the first step and for one layer.
    CHECK(consolidation(with_hidden({{1.0, 0.0}, {4.0, 5.0}}), nullptr, m) == 1.0);
    const auto one_prev = with_hidden({{0.0, 0.0}});
    CHECK(consolidation(with_hidden({{1.0, 0.0}}), &one_prev, meta_for(1, 2)) == 1.0);
  }

  TEST_CASE("concept reuse examples") {
    const auto m = meta_for(1, 1);
    ReuseConfig cfg;
    auto s = with_attention({{0.3, 0.3, 0.05, 0.35}});
    CHECK(concept_reuse(s, cfg, m) == 1.0);  // no flags: neutral
    s.concept_active = std::vector{true, true, false, true};
    CHECK(concept_reuse(s, cfg, m) == doctest::Approx(1.0).epsilon(1e-8));
    s.concept_active = std::vector{false, false, true, false};
    CHECK(concept_reuse(s, cfg, m) == 0.0);

    auto four = with_attention({{0.2, 0.2, 0.2, 0.2, 0.05, 0.05, 0.05, 0.05}});
    four.concept_active = std::vector{true, false, true, false, true, true, true, true};
    CHECK(concept_reuse(four, cfg, m) == doctest::Approx(oracle::reuse(four, 0.1, 1e-8)));
    CHECK(concept_reuse(four, cfg, m) == doctest::Approx(0.5).epsilon(1e-8));

    four.concept_active = std::vector{true, false};
    CHECK_THROWS_AS((void)concept_reuse(four, cfg, m), LengthMismatch);
  }

  TEST_CASE("reuse uses the maximum over layers") {
    auto s = with_attention({{0.8, 0.1, 0.1}, {0.05, 0.05, 0.9}});
    s.concept_active = std::vector{false, false, true};
    CHECK(concept_reuse(s, {}, meta_for(2, 1)) == doctest::Approx(0.5).epsilon(1e-8));
  }

  TEST_CASE("reuse config range") {
    CHECK_THROWS((ReuseConfig{0.0}.validate()));
    CHECK_THROWS((ReuseConfig{1.0}.validate()));
    CHECK_NOTHROW((ReuseConfig{0.5}.validate()));
  }

  TEST_CASE("single-step trace boundary values") {
    auto t = testsupport::random_trace(2, {.steps = 1});
    t.steps[0].ref_dist.reset();
    const auto proxies = compute_proxies(t);
    REQUIRE(proxies.size() == 1);
    CHECK(proxies[0].stability == 0.0);
    CHECK(proxies[0].consolidation == 1.0);
  }

  TEST_CASE("randomized traces match the naive per-step oracle") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
      const auto t = testsupport::random_trace(seed, {.steps = 20});
      const auto proxies = compute_proxies(t);
      REQUIRE(proxies.size() == t.steps.size());
      for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        const StepRecord* prev = i ? &t.steps[i - 1] : nullptr;
        CHECK(proxies[i].entropy == doctest::Approx(oracle::entropy(s)).epsilon(1e-12));
        CHECK(proxies[i].dispersion == doctest::Approx(oracle::dispersion(s, 1e-8)).epsilon(1e-12));
        CHECK(proxies[i].miss == doctest::Approx(oracle::miss(s, 1e-8)).epsilon(1e-12));
        CHECK(proxies[i].stability ==
              doctest::Approx(oracle::stability(s, prev, 1e-8)).epsilon(1e-12));
        CHECK(proxies[i].consolidation ==
              doctest::Approx(oracle::consolidation(s, prev)).epsilon(1e-12));
        CHECK(proxies[i].reuse == doctest::Approx(oracle::reuse(s, 0.1, 1e-8)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("digest traces reproduce full-mode proxies") {
    const auto full = testsupport::random_trace(31, {.steps = 30});
    const auto a = compute_proxies(full);
    for (bool keep : {true, false}) {
      const auto b = compute_proxies(make_digest(full, keep));
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b[i].entropy == doctest::Approx(a[i].entropy).epsilon(1e-15));
        CHECK(b[i].dispersion == a[i].dispersion);
        CHECK(b[i].miss == a[i].miss);
        CHECK(b[i].stability == a[i].stability);
        CHECK(b[i].consolidation == a[i].consolidation);
        CHECK(b[i].reuse == (keep ? a[i].reuse : 1.0));
      }
    }
  }

  TEST_CASE("errors carry the step index") {
    auto t = testsupport::random_trace(8, {.steps = 5});
    t.steps[3].ref_dist = std::vector{1.0};
    try {
      (void)compute_proxies(t);
      FAIL("expected LengthMismatch");
    } catch (const LengthMismatch& e) {
      CHECK(std::string(e.what()).find("step 3") != std::string::npos);
    }
  }

  TEST_CASE("range properties over random traces") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
      const auto t = testsupport::random_trace(seed, {.steps = 15});
      const auto proxies = compute_proxies(t);
      for (std::size_t i = 0; i < proxies.size(); ++i) {
        const auto& p = proxies[i];
        const double width = static_cast<double>(t.steps[i].attention_width());
        CHECK(p.entropy >= 0.0);
        CHECK(p.entropy <= std::log(width) + 1e-12);
        CHECK(p.dispersion >= 0.0);
        CHECK(p.miss >= -1e-8);
        CHECK(p.miss <= 1.0);
        CHECK(p.stability >= 0.0);
        CHECK(p.stability <= kKlMax);
        CHECK(p.consolidation >= -1.0 - 1e-12);
        CHECK(p.consolidation <= 1.0 + 1e-12);
        CHECK(p.reuse >= 0.0);
        CHECK(p.reuse <= 1.0);
      }
    }
  }

  TEST_CASE("permuting positions leaves entropy and reuse unchanged") {
    testsupport::SplitMix rng(5);
    for (std::uint64_t seed = 300; seed < 320; ++seed) {
      const auto t = testsupport::random_trace(seed, {.steps = 1, .concept_prob = 1.0});
      auto s = t.steps[0];
      const auto before_h = attention_entropy(s, t.meta);
      const auto before_r = concept_reuse(s, {}, t.meta);
      const std::size_t n = s.attention_width();
      std::vector<std::size_t> perm(n);
      for (std::size_t i = 0; i < n; ++i) perm[i] = i;
      for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(perm[i], perm[static_cast<std::size_t>(rng.below(static_cast<int>(i) + 1))]);
      }
      auto permuted = s;
      for (std::size_t l = 0; l < s.attention.size(); ++l) {
        for (std::size_t i = 0; i < n; ++i) permuted.attention[l][i] = s.attention[l][perm[i]];
      }
      for (std::size_t i = 0; i < n; ++i) {
        (*permuted.concept_active)[i] = (*s.concept_active)[perm[i]];
      }
      CHECK(attention_entropy(permuted, t.meta) == doctest::Approx(before_h).epsilon(1e-12));
      CHECK(concept_reuse(permuted, {}, t.meta) == before_r);
    }
  }

  TEST_CASE("scaling hidden vectors leaves dispersion unchanged") {
    for (std::uint64_t seed = 400; seed < 420; ++seed) {
      const auto t = testsupport::random_trace(seed, {.steps = 1, .hidden_offset = 3.0});
      auto s = t.steps[0];
      const double before = representation_dispersion(s, t.meta);
      for (double c : {0.5, 2.0, 10.0}) {
        auto scaled = s;
        for (auto& h : scaled.hidden) {
          for (auto& v : h) v *= c;
        }
        CHECK(std::abs(representation_dispersion(scaled, t.meta) - before) < 1e-6);
      }
    }
  }

  TEST_CASE("KL is zero exactly for identical distributions") {
    testsupport::SplitMix rng(9);
    for (int i = 0; i < 50; ++i) {
      const auto p = testsupport::random_distribution(rng, 8, 0.2);
      const auto q = testsupport::random_distribution(rng, 8, 0.2);
      CHECK(kl_divergence(p, p, 1e-8) == doctest::Approx(0.0).epsilon(1e-15));
      CHECK(kl_divergence(p, q, 1e-8) >= 0.0);
    }
  }
}
