#include "cltrace/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "clt/analytics.hpp"
#include "clt/composition.hpp"
#include "clt/config_io.hpp"
#include "clt/csv.hpp"
#include "clt/error.hpp"
#include "clt/fit.hpp"
#include "clt/lgd.hpp"
#include "clt/proxies.hpp"
#include "clt/synth.hpp"
#include "clt/trace_io.hpp"
#include "clt/validate.hpp"
#include "clt/viz.hpp"

namespace cltrace {
namespace {

namespace fs = std::filesystem;
using clt::format_double;

struct Globals {
  std::optional<double> epsilon;
  std::optional<std::uint64_t> seed;
  std::string mode = "offline";
  std::string weights;
  std::string out = ".";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Env {
  const Globals& g;
  std::ostream& out;
  std::ostream& err;

  fs::path path(std::string_view name) const { return fs::path(g.out) / std::string(name); }

  void prepare_out() const {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw clt::IoFailure("cannot create output directory " + g.out + ": " + ec.message());
  }

  clt::NormMode mode() const {
    try {
      return clt::parse_norm_mode(g.mode);
    } catch (const clt::Error&) {
      throw UsageError("--mode must be offline or causal");
    }
  }

  clt::WeightsFile weights() const {
    if (g.weights.empty()) return {};
    return clt::read_weights(g.weights);
  }

  clt::Trace trace(const std::string& file) const {
    clt::Trace t = clt::read_trace(file, clt::TraceCheck::kSyntaxOnly);
    if (g.epsilon) t.meta.epsilon = *g.epsilon;
    clt::require_valid(t);
    return t;
  }
};

std::string points_csv(std::span<const clt::LoadPoint> points) {
  std::vector<std::string> header{"step"};
  for (auto name : clt::kProxyNames) header.emplace_back(name);
  for (auto name : clt::kProxyNames) header.push_back("n_" + std::string(name));
  for (auto name : {"il", "el", "gl", "cli"}) header.emplace_back(name);
  clt::CsvTable table(std::move(header));
  for (const auto& p : points) {
    std::vector<std::string> row{std::to_string(p.step)};
    for (std::size_t i = 0; i < clt::kProxyCount; ++i) row.push_back(format_double(p.raw[i]));
    for (std::size_t i = 0; i < clt::kProxyCount; ++i) {
      row.push_back(format_double(p.normalized[i]));
    }
    for (double v : {p.il, p.el, p.gl, p.cli}) row.push_back(format_double(v));
    table.add_row(std::move(row));
  }
  return table.str();
}

std::string history_csv(const clt::InterventionHistory& history) {
  clt::CsvTable table({"step", "tier", "intervention", "il", "el", "gl", "cli"});
  for (const auto& e : history.events) {
    table.add_row({std::to_string(e.step), std::string(clt::to_string(e.tier)), e.intervention_id,
                   format_double(e.clt.il), format_double(e.clt.el), format_double(e.clt.gl),
                   format_double(e.cli)});
  }
  return table.str();
}

std::vector<clt::ProxyVector> raw_of(std::span<const clt::LoadPoint> points) {
  std::vector<clt::ProxyVector> raw;
  raw.reserve(points.size());
  for (const auto& p : points) raw.push_back(p.raw);
  return raw;
}

int cmd_validate(const Env& env, const std::string& file) {
  clt::Trace t = clt::read_trace(file, clt::TraceCheck::kSyntaxOnly);
  if (env.g.epsilon) t.meta.epsilon = *env.g.epsilon;
  const auto reports = clt::validate_trace(t);
  if (reports.empty()) {
    env.out << file << ": ok (" << t.steps.size() << " steps, " << t.meta.num_layers
            << " layers, " << clt::to_string(t.meta.mode) << " mode)\n";
    return kExitOk;
  }
  for (const auto& r : reports) env.out << file << ": " << r.to_string() << '\n';
  env.out << reports.size() << " violation(s)\n";
  return kExitDomain;
}

int cmd_compute(const Env& env, const std::string& file, const clt::ReuseConfig& reuse) {
  const clt::Trace trace = env.trace(file);
  const auto wf = env.weights();
  const auto points = clt::compute_clt(trace, wf.cw, wf.w, env.mode(), reuse);
  const auto raw = raw_of(points);

  std::ostringstream summary;
  summary << "trace " << file << '\n'
          << "mode " << clt::to_string(env.mode()) << '\n'
          << clt::format_summary(clt::trace_summary(points));

  env.prepare_out();
  clt::write_text_file(env.path(files::kPoints), points_csv(points));
  clt::write_norm_stats(clt::fit_norm_stats(raw), env.path(files::kNormStats));
  clt::write_text_file(env.path(files::kSummary), summary.str());
  env.out << summary.str();
  return kExitOk;
}

int cmd_fit(const Env& env, const std::vector<std::string>& inputs, bool joint) {
  const auto wf = env.weights();
  std::vector<clt::LabeledPoints> data;
  std::size_t steps = 0;
  for (const auto& file : inputs) {
    const clt::Trace trace = env.trace(file);
    if (!trace.fully_labeled()) {
      throw clt::MissingField(file + ": every step needs an error_event label");
    }
    data.push_back({clt::compute_clt(trace, wf.cw, wf.w, env.mode()), trace.error_labels()});
    steps += trace.steps.size();
  }
  clt::FitOptions options;
  options.joint = joint;
  options.fixed = wf.cw;
  const auto fit = clt::fit_weights(data, options);

  std::ostringstream report;
  report << "traces " << inputs.size() << '\n'
         << "steps " << steps << '\n'
         << "search " << (joint ? "joint" : "cli-only") << '\n'
         << "w " << format_double(fit.w.intrinsic) << ' ' << format_double(fit.w.extraneous)
         << ' ' << format_double(fit.w.germane) << '\n'
         << "alpha " << format_double(fit.cw.alpha.first) << ' '
         << format_double(fit.cw.alpha.second) << '\n'
         << "beta " << format_double(fit.cw.beta.first) << ' '
         << format_double(fit.cw.beta.second) << '\n'
         << "gamma " << format_double(fit.cw.gamma.first) << ' '
         << format_double(fit.cw.gamma.second) << '\n'
         << "point_biserial " << format_double(fit.correlation) << '\n'
         << "grid_evaluated " << fit.evaluated << '\n'
         << "grid_skipped " << fit.skipped << '\n';

  env.prepare_out();
  clt::write_weights({fit.cw, fit.w, fit.correlation}, env.path(files::kWeights));
  clt::write_text_file(env.path(files::kFitReport), report.str());
  env.out << report.str();
  return kExitOk;
}

int cmd_analyze(const Env& env, const std::string& file, double threshold, int window, int k) {
  const clt::Trace trace = env.trace(file);
  const auto wf = env.weights();
  const auto points = clt::compute_clt(trace, wf.cw, wf.w, env.mode());

  std::ostringstream report;
  report << "trace " << file << '\n' << clt::format_summary(clt::trace_summary(points, threshold));

  clt::CsvTable spikes({"step", "component", "value"});
  std::vector<clt::SpikeEvent> all;
  for (auto c : {clt::LoadComponent::kIntrinsic, clt::LoadComponent::kExtraneous,
                 clt::LoadComponent::kGermane, clt::LoadComponent::kCli}) {
    auto s = clt::detect_spikes(points, c, threshold);
    all.insert(all.end(), s.begin(), s.end());
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& a, const auto& b) { return a.step < b.step; });
  for (const auto& s : all) {
    spikes.add_row({std::to_string(s.step), std::string(clt::to_string(s.component)),
                    format_double(s.value)});
  }

  const bool labeled = std::any_of(trace.steps.begin(), trace.steps.end(),
                                   [](const auto& s) { return s.error_event.has_value(); });
  if (labeled) {
    const auto labels = trace.error_labels();
    const auto cc = clt::count_error_spike_coincidence(points, labels, threshold, window);
    report << "errors " << cc.errors << '\n';
    if (auto f = cc.fraction()) {
      report << "error_spike_coincidence " << format_double(*f) << " (" << cc.coincident << '/'
             << cc.errors << ", window " << window << ")\n";
    } else {
      report << "error_spike_coincidence undefined (no errors)\n";
    }
    try {
      report << "cli_error_correlation " << format_double(clt::cli_error_correlation(points, labels))
             << '\n';
    } catch (const clt::Error& e) {
      report << "cli_error_correlation undefined (" << e.kind() << ")\n";
    }
  }

  std::optional<clt::CsvTable> clusters;
  if (k > 0) {
    const auto model = clt::cluster_strategies(points, k, env.g.seed.value_or(0));
    report << "clusters k=" << model.k << " seed=" << model.seed << " iterations "
           << model.iterations << " inertia " << format_double(model.inertia_history.back())
           << '\n';
    for (std::size_t c = 0; c < model.centroids.size(); ++c) {
      const auto& ct = model.centroids[c];
      const auto size = std::count(model.assignments.begin(), model.assignments.end(),
                                   static_cast<int>(c));
      report << "  cluster " << c << " size " << size << " centroid il="
             << format_double(ct[0]) << " el=" << format_double(ct[1])
             << " gl=" << format_double(ct[2]) << '\n';
    }
    clusters.emplace(std::vector<std::string>{"step", "cluster"});
    for (std::size_t i = 0; i < points.size(); ++i) {
      clusters->add_row({std::to_string(points[i].step), std::to_string(model.assignments[i])});
    }
  }

  env.prepare_out();
  clt::write_text_file(env.path(files::kAnalysis), report.str());
  clt::write_text_file(env.path(files::kSpikes), spikes.str());
  if (clusters) clt::write_text_file(env.path(files::kClusters), clusters->str());
  env.out << report.str();
  return kExitOk;
}

clt::SynthConfig load_synth(const Env& env, const std::string& config, const std::string& preset,
                            std::optional<int> steps) {
  clt::SynthConfig c;
  if (!config.empty()) {
    c = clt::read_synth_config(config);
  } else {
    auto p = clt::SynthConfig::preset(preset);
    if (!p) throw UsageError("unknown preset '" + preset + "'");
    c = *p;
  }
  if (env.g.seed) c.seed = *env.g.seed;
  if (env.g.epsilon) c.epsilon = *env.g.epsilon;
  if (steps) c.steps = *steps;
  c.validate();
  return c;
}

int cmd_synth(const Env& env, const clt::SynthConfig& config, const std::string& trace_mode,
              bool drop_attention) {
  auto output = clt::generate(config);
  if (clt::parse_trace_mode(trace_mode) == clt::TraceMode::kDigest) {
    output.trace = clt::make_digest(output.trace, !drop_attention);
  }
  clt::CsvTable phases({"step", "phase"});
  for (std::size_t t = 0; t < output.phases.size(); ++t) {
    phases.add_row({std::to_string(t), std::string(clt::to_string(output.phases[t]))});
  }
  env.prepare_out();
  clt::write_trace(output.trace, env.path(files::kTrace));
  clt::write_text_file(env.path(files::kPhases), phases.str());
  env.out << "wrote " << output.trace.steps.size() << " steps (seed " << config.seed << ") to "
          << env.path(files::kTrace).string() << '\n';
  return kExitOk;
}

int cmd_lgd(const Env& env, const clt::SynthConfig& synth, const std::string& lgd_file,
            const std::string& interventions_file, bool save_traces) {
  const clt::LgdConfig lgd = lgd_file.empty() ? clt::LgdConfig{} : clt::read_lgd_config(lgd_file);
  lgd.validate();
  const auto interventions = interventions_file.empty()
                                 ? clt::default_interventions()
                                 : clt::read_interventions(interventions_file);
  const auto wf = env.weights();
  const auto cmp = clt::compare_lgd(synth, lgd, wf.cw, wf.w, interventions);

  std::ostringstream report;
  report << "seed " << synth.seed << '\n'
         << "tau_warn " << format_double(lgd.tau_warn) << " tau_act "
         << format_double(lgd.tau_act) << " cooldown " << lgd.cooldown << '\n'
         << clt::format_comparison(cmp);

  env.prepare_out();
  clt::write_text_file(env.path(files::kBaselinePoints), points_csv(cmp.baseline_points));
  clt::write_text_file(env.path(files::kIntervenedPoints), points_csv(cmp.intervened_points));
  clt::write_text_file(env.path(files::kHistory), history_csv(cmp.intervened.history));
  clt::write_text_file(env.path(files::kComparison), report.str());
  if (save_traces) {
    clt::write_trace(cmp.baseline.trace, env.path(files::kBaselineTrace));
    clt::write_trace(cmp.intervened.trace, env.path(files::kIntervenedTrace));
  }
  env.out << report.str();
  return kExitOk;
}

struct PlotOptions {
  std::string figure;
  std::vector<std::string> inputs;
  std::string signal = "entropy";
  std::string component = "el";
  int clusters = 0;
  double threshold = 0.8;
};

int cmd_plot(const Env& env, const PlotOptions& o) {
  const auto wf = env.weights();
  const auto need_one = [&] {
    if (o.inputs.size() != 1) throw UsageError("plot " + o.figure + " takes exactly one trace");
    return env.trace(o.inputs.front());
  };
  const auto cluster_model = [&](std::span<const clt::LoadPoint> points) {
    return clt::cluster_strategies(points, o.clusters, env.g.seed.value_or(0));
  };

  clt::Figure fig;
  if (o.figure == "curves") {
    const auto trace = need_one();
    const auto points = clt::compute_clt(trace, wf.cw, wf.w, env.mode());
    const auto labels = trace.error_labels();
    clt::CurveAnnotations notes;
    notes.errors = &labels;
    notes.spike_threshold = o.threshold;
    fig = clt::render_load_curves(points, notes);
  } else if (o.figure == "simplex") {
    const auto trace = need_one();
    const auto points = clt::compute_clt(trace, wf.cw, wf.w, env.mode());
    if (o.clusters > 0) {
      const auto model = cluster_model(points);
      fig = clt::render_simplex(points, &model.assignments);
    } else {
      fig = clt::render_simplex(points);
    }
  } else if (o.figure == "heatmap") {
    fig = clt::render_heatmap(need_one(), clt::parse_layer_signal(o.signal));
  } else if (o.figure == "radar") {
    const auto trace = need_one();
    const auto points = clt::compute_clt(trace, wf.cw, wf.w, env.mode());
    fig = clt::render_radar(clt::trace_summary(points, o.threshold));
  } else if (o.figure == "parallel") {
    const auto trace = need_one();
    const auto points = clt::compute_clt(trace, wf.cw, wf.w, env.mode());
    if (o.clusters > 0) {
      const auto model = cluster_model(points);
      fig = clt::render_parallel_coords(points, &model);
    } else {
      fig = clt::render_parallel_coords(points);
    }
  } else if (o.figure == "bands") {
    std::vector<std::vector<clt::LoadPoint>> series;
    for (const auto& file : o.inputs) {
      series.push_back(clt::compute_clt(env.trace(file), wf.cw, wf.w, env.mode()));
    }
    fig = clt::render_bands(series, clt::parse_load_component(o.component));
  } else {
    throw UsageError("unknown figure '" + o.figure + "'");
  }

  env.prepare_out();
  const auto paths = clt::write_figure(fig, env.path(o.figure));
  env.out << "wrote " << paths.csv.string() << " and " << paths.svg.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cognitive load traces: compute, fit, analyze and steer per-step load signals",
               "cltrace"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--epsilon", g.epsilon, "Override the numerical epsilon")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for generators and clustering");
  app.add_option("--mode", g.mode, "Normalization mode")
      ->check(CLI::IsMember({"offline", "causal"}));
  app.add_option("--weights", g.weights, "Weights file produced by `fit`")
      ->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  Env env{g, out, err};
  std::function<int()> action;

  auto* validate = app.add_subcommand("validate", "Check a trace file against the format rules");
  std::string validate_file;
  validate->add_option("trace", validate_file)->required()->check(CLI::ExistingFile);
  validate->callback([&] { action = [&] { return cmd_validate(env, validate_file); }; });

  auto* compute = app.add_subcommand("compute", "Compute proxies and loads for one trace");
  std::string compute_file;
  clt::ReuseConfig reuse;
  compute->add_option("trace", compute_file)->required()->check(CLI::ExistingFile);
  compute->add_option("--reuse-theta", reuse.theta, "Attention peak threshold for reuse")
      ->capture_default_str();
  compute->callback([&] {
    action = [&] {
      reuse.validate();
      return cmd_compute(env, compute_file, reuse);
    };
  });

  auto* fit = app.add_subcommand("fit", "Fit CLI weights on labeled traces");
  std::vector<std::string> fit_files;
  bool joint = false;
  fit->add_option("traces", fit_files)->required()->check(CLI::ExistingFile);
  fit->add_flag("--joint", joint, "Also search alpha/beta/gamma");
  fit->callback([&] { action = [&] { return cmd_fit(env, fit_files, joint); }; });

  auto* analyze = app.add_subcommand("analyze", "Spikes, error coincidence and strategy clusters");
  std::string analyze_file;
  double threshold = clt::kDefaultSpikeThreshold;
  int window = clt::kDefaultCoincidenceWindow;
  int k = 3;
  analyze->add_option("trace", analyze_file)->required()->check(CLI::ExistingFile);
  analyze->add_option("--threshold", threshold, "Spike threshold")->capture_default_str();
  analyze->add_option("--window", window, "Coincidence window in steps")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  analyze->add_option("--clusters", k, "k for k-means, 0 disables")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  analyze->callback(
      [&] { action = [&] { return cmd_analyze(env, analyze_file, threshold, window, k); }; });

  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace");
  std::string synth_config;
  std::string preset = "default";
  std::optional<int> steps;
  std::string trace_mode = "full";
  bool drop_attention = false;
  synth->add_option("--config", synth_config, "Generator config file")
      ->check(CLI::ExistingFile);
  synth->add_option("--preset", preset, "default, uncoupled or separated")
      ->capture_default_str();
  synth->add_option("--steps", steps, "Number of steps")->check(CLI::PositiveNumber);
  synth->add_option("--trace-mode", trace_mode, "full or digest")
      ->check(CLI::IsMember({"full", "digest"}))
      ->capture_default_str();
  synth->add_flag("--drop-attention", drop_attention, "Digest mode: omit attention rows");
  synth->callback([&] {
    action = [&] {
      return cmd_synth(env, load_synth(env, synth_config, preset, steps), trace_mode,
                       drop_attention);
    };
  });

  auto* lgd = app.add_subcommand("lgd", "Paired load-guided decoding simulation");
  lgd->alias("lgd-simulate");
  std::string lgd_synth, lgd_config, lgd_interventions, lgd_preset = "default";
  std::optional<int> lgd_steps;
  bool save_traces = false;
  lgd->add_option("--synth", lgd_synth, "Generator config file")->check(CLI::ExistingFile);
  lgd->add_option("--preset", lgd_preset, "Generator preset when --synth is absent")
      ->capture_default_str();
  lgd->add_option("--lgd", lgd_config, "Threshold config file")->check(CLI::ExistingFile);
  lgd->add_option("--interventions", lgd_interventions, "Intervention set file")
      ->check(CLI::ExistingFile);
  lgd->add_option("--steps", lgd_steps, "Number of steps")->check(CLI::PositiveNumber);
  lgd->add_flag("--save-traces", save_traces, "Also write both simulated traces");
  lgd->callback([&] {
    action = [&] {
      return cmd_lgd(env, load_synth(env, lgd_synth, lgd_preset, lgd_steps), lgd_config,
                     lgd_interventions, save_traces);
    };
  });

  auto* plot = app.add_subcommand("plot", "Export a figure as CSV and SVG");
  PlotOptions po;
  plot->add_option("figure", po.figure, "curves, simplex, heatmap, radar, parallel or bands")
      ->required()
      ->check(CLI::IsMember({"curves", "simplex", "heatmap", "radar", "parallel", "bands"}));
  plot->add_option("traces", po.inputs)->required()->check(CLI::ExistingFile);
  plot->add_option("--signal", po.signal, "Heatmap signal: entropy or dispersion")
      ->check(CLI::IsMember({"entropy", "dispersion"}))
      ->capture_default_str();
  plot->add_option("--component", po.component, "Bands component: il, el, gl or cli")
      ->check(CLI::IsMember({"il", "el", "gl", "cli"}))
      ->capture_default_str();
  plot->add_option("--clusters", po.clusters, "Color simplex/parallel by k-means clusters")
      ->check(CLI::NonNegativeNumber);
  plot->add_option("--threshold", po.threshold, "Spike threshold")->capture_default_str();
  plot->callback([&] { action = [&] { return cmd_plot(env, po); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const clt::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace cltrace
