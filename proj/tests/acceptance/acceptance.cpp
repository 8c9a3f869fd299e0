// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "clt/analytics.hpp"
#include "clt/composition.hpp"
#include "clt/config_io.hpp"
#include "clt/csv.hpp"
#include "clt/fit.hpp"
#include "clt/lgd.hpp"
#include "clt/proxies.hpp"
#include "clt/stats.hpp"
#include "clt/synth.hpp"
#include "clt/trace_io.hpp"
#include "cltrace/app.hpp"
#include "oracle.hpp"
#include "random_trace.hpp"

using namespace clt;
namespace fs = std::filesystem;

namespace {

const fs::path kData = CLT_TEST_DATA_DIR;
const fs::path kConfigs = CLT_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cltrace::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "cltrace failed (%d): %s", code, err.str().c_str());
  return code;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "clt_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Naive coincidence: an error counts when some EL value in [t-window, t]
// exceeds the threshold.
struct NaiveCoincidence {
  std::size_t errors = 0;
  std::size_t hits = 0;
  void add(const std::vector<LoadPoint>& pts, const std::vector<bool>& labels, double threshold,
           int window) {
    for (std::size_t t = 0; t < pts.size(); ++t) {
      if (!labels[t]) continue;
      ++errors;
      const std::size_t lo = t >= static_cast<std::size_t>(window) ? t - window : 0;
      bool hit = false;
      for (std::size_t s = lo; s <= t; ++s) hit = hit || pts[s].el > threshold;
      hits += hit;
    }
  }
};

// CLI straight from the normalized proxies, without the library's composer.
std::vector<double> naive_cli(const std::vector<LoadPoint>& pts, const CompositionWeights& cw,
                              const CliWeights& w) {
  std::vector<double> out;
  for (const auto& p : pts) {
    const auto& n = p.normalized;
    const double il = cw.alpha.first * n.entropy + cw.alpha.second * n.dispersion;
    const double el = cw.beta.first * n.miss + cw.beta.second * n.stability;
    const double gl = cw.gamma.first * (1 - n.consolidation) + cw.gamma.second * (1 - n.reuse);
    out.push_back(w.intrinsic * il + w.extraneous * el + w.germane * gl);
  }
  return out;
}

std::vector<LabeledPoints> synth_sets(const SynthConfig& base, std::uint64_t first, int count) {
  std::vector<LabeledPoints> sets;
  for (int i = 0; i < count; ++i) {
    SynthConfig c = base;
    c.seed = first + static_cast<std::uint64_t>(i);
    c.steps = 200;
    const auto out = generate(c);
    sets.push_back({compute_clt(out.trace, {}, {}, NormMode::kOffline), out.trace.error_labels()});
  }
  return sets;
}

Outcome proxy_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t values = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto t = testsupport::random_trace(seed, {.steps = 50, .layers = 4, .dim = 16});
    const auto proxies = compute_proxies(t);
    const double eps = t.meta.epsilon;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      const StepRecord* prev = i ? &t.steps[i - 1] : nullptr;
      const std::array<double, kProxyCount> expected = {
          oracle::entropy(s),           oracle::dispersion(s, eps),
          oracle::miss(s, eps),         oracle::stability(s, prev, eps),
          oracle::consolidation(s, prev), oracle::reuse(s, 0.1, eps)};
      for (std::size_t k = 0; k < kProxyCount; ++k) {
        worst = std::max(worst, std::abs(proxies[i][k] - expected[k]));
        ++values;
      }
    }
  }
  const double secs = elapsed_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          fmt("%zu values, max |diff| %.3g (tol 1e-9), %.2fs (limit 10s)", values, worst, secs)};
}

Outcome normalization_contract() {
  testsupport::SplitMix rng(2024);
  double worst_median = 0.0, worst_iqr = 0.0, worst_default_iqr = 0.0;
  const double eps = 1e-12;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(static_cast<std::size_t>(5 + rng.below(500)));
    const double scale = std::pow(10.0, rng.uniform(-2, 2));
    const double shift = rng.uniform(-10, 10);
    for (auto& x : xs) x = shift + scale * (rng.chance(0.5) ? rng.normal() : rng.uniform(-1, 1));
    const RobustStats s = robust_stats(xs);
    if (!(s.iqr > 0.0)) continue;
    std::vector<double> z, z_default;
    for (double x : xs) {
      z.push_back(robust_z(x, s, eps));
      z_default.push_back(robust_z(x, s, kDefaultEpsilon));
    }
    worst_median = std::max(worst_median, std::abs(oracle::quantile(z, 0.5)));
    worst_iqr = std::max(
        worst_iqr, std::abs(oracle::quantile(z, 0.75) - oracle::quantile(z, 0.25) - 1.0));
    worst_default_iqr = std::max(
        worst_default_iqr,
        std::abs(oracle::quantile(z_default, 0.75) - oracle::quantile(z_default, 0.25) - 1.0));
  }
  // Constant series in both normalization modes.
  bool constant_ok = true;
  std::vector<ProxyVector> flat(40);
  for (auto& p : flat) {
    for (std::size_t k = 0; k < kProxyCount; ++k) p[k] = 0.37;
  }
  for (auto mode : {NormMode::kOffline, NormMode::kCausal}) {
    for (const auto& p : compose_points(flat, CompositionWeights{}, CliWeights{}, mode,
                                        kDefaultEpsilon)) {
      for (std::size_t k = 0; k < kProxyCount; ++k) constant_ok = constant_ok && p.normalized[k] == 0.5;
    }
  }
  return {worst_median <= 1e-9 && worst_iqr <= 1e-9 && constant_ok,
          fmt("epsilon 1e-12: max |median| %.3g, max |IQR-1| %.3g (tol 1e-9); constant -> 0.5: %s; "
              "at default epsilon 1e-8 max |IQR-1| is %.3g",
              worst_median, worst_iqr, constant_ok ? "yes" : "no", worst_default_iqr)};
}

Outcome coincidence() {
  const auto t0 = std::chrono::steady_clock::now();
  const SynthConfig base = read_synth_config(kConfigs / "synth_default.json");
  const auto sets = synth_sets(base, 1, 200);
  CoincidenceCount lib;
  NaiveCoincidence naive;
  for (const auto& s : sets) {
    lib += count_error_spike_coincidence(s.points, s.labels, 0.8, 3);
    naive.add(s.points, s.labels, 0.8, 3);
  }
  const double f = static_cast<double>(naive.hits) / static_cast<double>(naive.errors);
  const bool agree = lib.errors == naive.errors && lib.coincident == naive.hits;
  const double secs = elapsed_since(t0);
  return {agree && f >= 0.65 && f <= 0.90 && secs < 60.0,
          fmt("kappa %.1f, 200 traces x 200 steps: %zu/%zu errors coincide = %.4f (target "
              "[0.65, 0.90]), library count %s, %.2fs (limit 60s)",
              base.kappa, naive.hits, naive.errors, f, agree ? "agrees" : "DISAGREES", secs)};
}

Outcome correlation() {
  const auto t0 = std::chrono::steady_clock::now();
  const SynthConfig coupled = read_synth_config(kConfigs / "synth_default.json");
  const SynthConfig uncoupled = read_synth_config(kConfigs / "synth_uncoupled.json");

  const auto sets = synth_sets(coupled, 1, 200);
  const std::vector<LabeledPoints> train(sets.begin(), sets.begin() + 100);
  const std::vector<LabeledPoints> test(sets.begin() + 100, sets.end());
  const auto fit = fit_weights(train);
  std::vector<double> cli;
  std::vector<bool> labels;
  for (const auto& s : test) {
    const auto c = naive_cli(s.points, fit.cw, fit.w);
    cli.insert(cli.end(), c.begin(), c.end());
    labels.insert(labels.end(), s.labels.begin(), s.labels.end());
  }
  const double held_out = oracle::pearson_binary(cli, labels);

  const auto flat_sets = synth_sets(uncoupled, 1, 200);
  const std::vector<LabeledPoints> flat_train(flat_sets.begin(), flat_sets.begin() + 100);
  const auto flat_fit = fit_weights(flat_train);

  const double secs = elapsed_since(t0);
  return {held_out >= 0.6 && std::abs(flat_fit.correlation) < 0.1 && secs < 120.0,
          fmt("coupled: w=(%.2f, %.2f, %.2f) train r %.4f, held-out r %.4f (target >= 0.6); "
              "kappa 0: fitted r %.4f (target |r| < 0.1); %.2fs (limit 120s)",
              fit.w.intrinsic, fit.w.extraneous, fit.w.germane, fit.correlation, held_out,
              flat_fit.correlation, secs)};
}

struct LgdTotals {
  double el_base = 0, el_int = 0;
  std::size_t spikes_base = 0, spikes_int = 0, err_base = 0, err_int = 0;
};

LgdTotals lgd_totals_from_files(const fs::path& dir) {
  LgdTotals t;
  for (const auto& [file, el, spikes] :
       {std::tuple{"baseline_points.csv", &t.el_base, &t.spikes_base},
        std::tuple{"intervened_points.csv", &t.el_int, &t.spikes_int}}) {
    const auto csv = parse_csv(read_text_file(dir / file));
    const auto col = static_cast<std::size_t>(
        std::find(csv.header.begin(), csv.header.end(), "el") - csv.header.begin());
    for (const auto& row : csv.rows) {
      const double v = std::stod(row.at(col));
      *el += v;
      *spikes += v > 0.8;
    }
  }
  for (bool e : read_trace(dir / "baseline_trace.jsonl").error_labels()) t.err_base += e;
  for (bool e : read_trace(dir / "intervened_trace.jsonl").error_labels()) t.err_int += e;
  return t;
}

Outcome lgd_efficiency() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string per_seed;
  bool all = true;
  LgdTotals sum;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto dir = fresh_dir("lgd_" + std::to_string(seed));
    const int code = cli({"--out", dir.string(), "--seed", std::to_string(seed), "--weights",
                          (kConfigs / "weights_default.json").string(), "lgd", "--synth",
                          (kConfigs / "synth_default.json").string(), "--lgd",
                          (kConfigs / "lgd_default.json").string(), "--interventions",
                          (kConfigs / "interventions_default.json").string(), "--steps", "2000",
                          "--save-traces"});
    if (code != 0) return {false, fmt("cltrace lgd exited %d for seed %llu", code,
                                      static_cast<unsigned long long>(seed))};
    const auto t = lgd_totals_from_files(dir);
    const double el_red = (t.el_base - t.el_int) / t.el_base;
    const double spike_red = (static_cast<double>(t.spikes_base) - static_cast<double>(t.spikes_int)) /
                             static_cast<double>(t.spikes_base);
    const double err_change = (static_cast<double>(t.err_int) - static_cast<double>(t.err_base)) /
                              static_cast<double>(t.err_base);
    const bool ok = el_red >= 0.15 && spike_red >= 0.30 && err_change <= 0.05;
    all = all && ok;
    per_seed += fmt(" seed %llu: EL -%.1f%% spikes -%.1f%% errors %+.1f%%%s;",
                    static_cast<unsigned long long>(seed), 100 * el_red, 100 * spike_red,
                    100 * err_change, ok ? "" : " (miss)");
    sum.el_base += t.el_base;
    sum.el_int += t.el_int;
    sum.spikes_base += t.spikes_base;
    sum.spikes_int += t.spikes_int;
    sum.err_base += t.err_base;
    sum.err_int += t.err_int;
  }
  const double secs = elapsed_since(t0);
  return {all && secs < 60.0,
          fmt("every seed needs EL >= 15%%, spikes >= 30%%, errors <= +5%%;%s pooled EL %.1f -> "
              "%.1f, spikes %zu -> %zu, errors %zu -> %zu; %.2fs (limit 60s)",
              per_seed.c_str(), sum.el_base, sum.el_int, sum.spikes_base, sum.spikes_int,
              sum.err_base, sum.err_int, secs)};
}

Outcome clusters() {
  const SynthConfig base = read_synth_config(kConfigs / "synth_separated.json");
  double worst = 1.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig c = base;
    c.seed = seed;
    c.steps = 2000;
    const auto out = generate(c);
    const auto pts = compute_clt(out.trace, {}, {}, NormMode::kOffline);
    const auto m = cluster_strategies(pts, 3, 42);
    std::vector<int> truth;
    for (auto p : out.phases) truth.push_back(static_cast<int>(p));
    const double a = oracle::best_permutation_agreement(m.assignments, truth, 3);
    worst = std::min(worst, a);
    per_seed += fmt(" %.4f", a);
  }
  return {worst >= 0.85, fmt("k=3, k-means seed 42, 5 traces x 2000 steps, agreement per trace:%s "
                             "(min %.4f, target >= 0.85)",
                             per_seed.c_str(), worst)};
}

Outcome determinism_and_format() {
  std::vector<std::string> problems;
  // Identical seeds, two runs of every command.
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  for (const auto& dir : {a, b}) {
    cli({"--out", dir.string(), "--seed", "17", "synth", "--steps", "300"});
    cli({"--out", dir.string(), "--mode", "causal", "compute", (dir / "trace.jsonl").string()});
    cli({"--out", dir.string(), "--seed", "4", "analyze", (dir / "trace.jsonl").string()});
    cli({"--out", (dir / "fit").string(), "fit", (dir / "trace.jsonl").string()});
    cli({"--out", (dir / "lgd").string(), "--seed", "17", "lgd", "--steps", "300",
         "--save-traces"});
    cli({"--out", (dir / "plot").string(), "plot", "curves", (dir / "trace.jsonl").string()});
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    // Text reports start with the input path, which differs between runs.
    auto strip = [&](std::string s) {
      if (rel.extension() == ".txt" && s.rfind("trace ", 0) == 0) s = s.substr(s.find('\n') + 1);
      return s;
    };
    if (!fs::exists(b / rel) ||
        strip(read_text_file(entry.path())) != strip(read_text_file(b / rel))) {
      problems.push_back("differs: " + rel.string());
    }
    ++compared;
  }
  // Roundtrip identity on the fixtures.
  for (const char* f : {"full_example.jsonl", "digest_example.jsonl"}) {
    if (serialize_trace(read_trace(kData / f)) != read_text_file(kData / f)) {
      problems.push_back(std::string("roundtrip: ") + f);
    }
  }
  // Golden compute.
  const auto g = fresh_dir("golden");
  cli({"--out", g.string(), "compute", (kData / "full_example.jsonl").string()});
  for (const char* f : {"points.csv", "norm_stats.json"}) {
    if (read_text_file(g / f) != read_text_file(kData / "golden" / f)) {
      problems.push_back(std::string("golden: ") + f);
    }
  }
  std::string detail = fmt("%zu output files compared across two runs, 2 fixtures roundtripped, "
                           "golden compute checked",
                           compared);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty() && compared >= 10, detail};
}

Outcome threshold_conformance() {
  std::vector<std::string> problems;
  const std::vector<Intervention> set = default_interventions();

  // CLI 0.5, 0.7, 0.9 with tau 0.6 / 0.8: none, warn at 1, act at 2.
  {
    LgdController c({0.6, 0.8, 5}, set);
    const std::array<double, 3> cli_values{0.5, 0.7, 0.9};
    std::array<const Intervention*, 3> fired{};
    for (std::size_t t = 0; t < 3; ++t) {
      const double v = cli_values[t];
      fired[t] = c.observe(static_cast<std::int64_t>(t), {v, v, v}, v);
    }
    if (fired[0] != nullptr) problems.push_back("fired below tau_warn");
    if (!fired[1] || fired[1]->tier != Tier::kWarn) problems.push_back("no warn at step 1");
    if (!fired[2] || fired[2]->tier != Tier::kAct) problems.push_back("no act at step 2");
    if (c.history().events.size() != 2) problems.push_back("history size");
  }
  // Boundaries are strict and act wins over warn.
  {
    LgdController c({0.6, 0.8, 5}, set);
    if (c.observe(0, {0.6, 0.6, 0.6}, 0.6)) problems.push_back("fired at exactly tau_warn");
    const auto* at_act = c.observe(1, {0.8, 0.8, 0.8}, 0.8);
    if (!at_act || at_act->tier != Tier::kWarn) problems.push_back("tau_act must be strict");
    for (int t = 2; t < 12; ++t) {
      const auto* i = c.observe(t, {0.1, 0.95, 0.1}, 0.95);
      if (!i || i->tier != Tier::kAct) problems.push_back("act-before-warn");
    }
    std::int64_t last = -1;
    for (const auto& e : c.history().events) {
      if (e.step <= last) problems.push_back("more than one event per step");
      last = e.step;
    }
  }
  // Dominant-load selection and the cooldown penalty.
  {
    const auto& pick = select_intervention(set, Tier::kWarn, {0.9, 0.2, 0.1}, {}, 0, 5);
    if (pick.target != LoadComponent::kIntrinsic) problems.push_back("dominant IL selection");
    InterventionHistory h;
    h.events.push_back({8, Tier::kWarn, "efficiency-aid", {}, 0.7});
    const double s = score_intervention(set[1], {0.2, 0.9, 0.1}, h, 10, 5);
    if (std::abs(s - (-0.1)) > 1e-12) problems.push_back("cooldown score");
  }
  // Prefix causality on a replayed trace.
  {
    const auto t = read_trace(kData / "full_example.jsonl");
    ReplaySource full_src(t);
    const auto full = run_lgd(full_src, {0.5, 0.6, 2}, {}, {}, set);
    for (std::size_t k = 1; k <= t.steps.size(); ++k) {
      Trace prefix = t;
      prefix.steps.resize(k);
      ReplaySource src(prefix);
      const auto part = run_lgd(src, {0.5, 0.6, 2}, {}, {}, set);
      for (std::size_t i = 0; i < k; ++i) {
        if (!(part.points[i] == full.points[i])) {
          problems.push_back("prefix points differ at k=" + std::to_string(k));
          break;
        }
      }
      std::size_t expected = 0;
      for (const auto& e : full.history.events) expected += e.step < static_cast<std::int64_t>(k);
      if (part.history.events.size() != expected) {
        problems.push_back("prefix history differs at k=" + std::to_string(k));
      }
    }
    if (full.history.events.empty()) problems.push_back("replay produced no events to compare");
  }
  // Unreachable thresholds: empty history.
  {
    const auto t = read_trace(kData / "full_example.jsonl");
    ReplaySource src(t);
    if (!run_lgd(src, {0.99, 0.999, 5}, {}, {}, set).history.events.empty()) {
      problems.push_back("events with unreachable thresholds");
    }
  }
  std::string detail = "crossings, strict boundaries, act-before-warn, selection, cooldown, "
                       "prefix causality, empty history";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  report("proxy oracle equivalence", proxy_oracle);
  report("normalization contract", normalization_contract);
  report("error-spike coincidence", coincidence);
  report("CLI-error correlation", correlation);
  report("LGD efficiency", lgd_efficiency);
  report("strategy clusters", clusters);
  report("determinism and format", determinism_and_format);
  report("two-tier threshold conformance", threshold_conformance);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
