#include "clt/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "clt/error.hpp"

namespace clt {
namespace {

using Json = nlohmann::ordered_json;

Json load(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void store(const Json& j, const std::filesystem::path& path) {
  write_text_file(path, j.dump(2) + "\n");
}

template <typename T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
void maybe(const Json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

WeightPair pair_from(const Json& j, const char* key, const std::string& where) {
  const auto v = get<std::vector<double>>(j, key, where);
  if (v.size() != 2) throw ConfigError(where + ": '" + key + "' needs two entries");
  return {v[0], v[1]};
}

Json stats_json(const NormStats& stats) {
  Json j = Json::object();
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    j[std::string(kProxyNames[p])] = {{"median", stats.per_proxy[p].median},
                                      {"iqr", stats.per_proxy[p].iqr}};
  }
  return j;
}

NormStats stats_from(const Json& j, const std::string& where) {
  NormStats stats;
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    const std::string name(kProxyNames[p]);
    if (!j.contains(name)) throw ConfigError(where + ": missing proxy '" + name + "'");
    const auto& entry = j.at(name);
    stats.per_proxy[p].median = get<double>(entry, "median", where);
    stats.per_proxy[p].iqr = get<double>(entry, "iqr", where);
    if (stats.per_proxy[p].iqr < 0.0) throw ConfigError(where + ": negative iqr for " + name);
  }
  return stats;
}

Json phase_json(const PhaseSpec& p) {
  return {{"name", to_string(p.name)},
          {"attention_concentration", p.attention_concentration},
          {"walk_scale", p.walk_scale},
          {"miss_prob", p.miss_prob},
          {"dist_drift", p.dist_drift},
          {"concept_hit_prob", p.concept_hit_prob},
          {"mean_duration", p.mean_duration},
          {"layer_alignment", p.layer_alignment}};
}

PhaseSpec phase_from(const Json& j, const std::string& where) {
  PhaseSpec p;
  p.name = parse_phase_name(get<std::string>(j, "name", where));
  p.attention_concentration = get<double>(j, "attention_concentration", where);
  p.walk_scale = get<double>(j, "walk_scale", where);
  p.miss_prob = get<double>(j, "miss_prob", where);
  p.dist_drift = get<double>(j, "dist_drift", where);
  p.concept_hit_prob = get<double>(j, "concept_hit_prob", where);
  p.mean_duration = get<int>(j, "mean_duration", where);
  maybe(j, "layer_alignment", p.layer_alignment, where);
  return p;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoFailure("write failed: " + path.string());
}

WeightsFile read_weights(const std::filesystem::path& path) {
  const Json j = load(path);
  const std::string where = path.string();
  WeightsFile wf;
  wf.cw.alpha = pair_from(j, "alpha", where);
  wf.cw.beta = pair_from(j, "beta", where);
  wf.cw.gamma = pair_from(j, "gamma", where);
  const auto w = get<std::vector<double>>(j, "w", where);
  if (w.size() != 3) throw ConfigError(where + ": 'w' needs three entries");
  wf.w = {w[0], w[1], w[2]};
  if (j.contains("correlation")) wf.correlation = get<double>(j, "correlation", where);
  wf.cw.validate();
  wf.w.validate();
  return wf;
}

void write_weights(const WeightsFile& wf, const std::filesystem::path& path) {
  Json j;
  j["alpha"] = {wf.cw.alpha.first, wf.cw.alpha.second};
  j["beta"] = {wf.cw.beta.first, wf.cw.beta.second};
  j["gamma"] = {wf.cw.gamma.first, wf.cw.gamma.second};
  j["w"] = {wf.w.intrinsic, wf.w.extraneous, wf.w.germane};
  if (wf.correlation) j["correlation"] = *wf.correlation;
  store(j, path);
}

NormStats read_norm_stats(const std::filesystem::path& path) {
  return stats_from(load(path), path.string());
}

void write_norm_stats(const NormStats& stats, const std::filesystem::path& path) {
  store(stats_json(stats), path);
}

SynthConfig read_synth_config(const std::filesystem::path& path) {
  const Json j = load(path);
  const std::string where = path.string();
  std::string preset = "default";
  maybe(j, "preset", preset, where);
  auto base = SynthConfig::preset(preset);
  if (!base) throw ConfigError(where + ": unknown preset '" + preset + "'");
  SynthConfig c = *base;
  if (j.contains("phases")) {
    c.phases.clear();
    for (const auto& p : j.at("phases")) c.phases.push_back(phase_from(p, where));
  }
  maybe(j, "num_layers", c.num_layers, where);
  maybe(j, "hidden_dim", c.hidden_dim, where);
  maybe(j, "context_init", c.context_init, where);
  maybe(j, "context_growth", c.context_growth, where);
  maybe(j, "context_max", c.context_max, where);
  maybe(j, "vocab", c.vocab, where);
  maybe(j, "token_concentration", c.token_concentration, where);
  maybe(j, "reversion", c.reversion, where);
  maybe(j, "kappa", c.kappa, where);
  maybe(j, "error_offset", c.error_offset, where);
  maybe(j, "epsilon", c.epsilon, where);
  maybe(j, "seed", c.seed, where);
  maybe(j, "steps", c.steps, where);
  c.validate();
  return c;
}

void write_synth_config(const SynthConfig& c, const std::filesystem::path& path) {
  Json j;
  j["phases"] = Json::array();
  for (const auto& p : c.phases) j["phases"].push_back(phase_json(p));
  j["num_layers"] = c.num_layers;
  j["hidden_dim"] = c.hidden_dim;
  j["context_init"] = c.context_init;
  j["context_growth"] = c.context_growth;
  j["context_max"] = c.context_max;
  j["vocab"] = c.vocab;
  j["token_concentration"] = c.token_concentration;
  j["reversion"] = c.reversion;
  j["kappa"] = c.kappa;
  j["error_offset"] = c.error_offset;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  j["steps"] = c.steps;
  store(j, path);
}

LgdConfig read_lgd_config(const std::filesystem::path& path) {
  const Json j = load(path);
  const std::string where = path.string();
  LgdConfig c;
  maybe(j, "tau_warn", c.tau_warn, where);
  maybe(j, "tau_act", c.tau_act, where);
  maybe(j, "cooldown", c.cooldown, where);
  c.validate();
  return c;
}

void write_lgd_config(const LgdConfig& c, const std::filesystem::path& path) {
  store(Json{{"tau_warn", c.tau_warn}, {"tau_act", c.tau_act}, {"cooldown", c.cooldown}}, path);
}

std::vector<Intervention> read_interventions(const std::filesystem::path& path) {
  const Json j = load(path);
  const std::string where = path.string();
  if (!j.contains("interventions") || !j.at("interventions").is_array()) {
    throw ConfigError(where + ": expected an 'interventions' array");
  }
  std::vector<Intervention> out;
  for (const auto& e : j.at("interventions")) {
    Intervention i;
    i.id = get<std::string>(e, "id", where);
    i.target = parse_load_component(get<std::string>(e, "target", where));
    i.tier = parse_tier(get<std::string>(e, "tier", where));
    if (!e.contains("effect")) throw ConfigError(where + ": intervention " + i.id + " has no effect");
    const auto& eff = e.at("effect");
    i.effect.duration = get<int>(eff, "duration", where);
    if (eff.contains("modifiers")) {
      for (auto it = eff.at("modifiers").begin(); it != eff.at("modifiers").end(); ++it) {
        if (!it.value().is_number()) {
          throw ConfigError(where + ": modifier " + it.key() + " must be a number");
        }
        i.effect.modifiers.emplace_back(it.key(), it.value().get<double>());
      }
    }
    i.validate();
    out.push_back(std::move(i));
  }
  return out;
}

void write_interventions(const std::vector<Intervention>& interventions,
                         const std::filesystem::path& path) {
  Json list = Json::array();
  for (const auto& i : interventions) {
    Json mods = Json::object();
    for (const auto& [name, factor] : i.effect.modifiers) mods[name] = factor;
    list.push_back({{"id", i.id},
                    {"target", to_string(i.target)},
                    {"tier", to_string(i.tier)},
                    {"effect", {{"modifiers", mods}, {"duration", i.effect.duration}}}});
  }
  store(Json{{"interventions", list}}, path);
}

}  // namespace clt
