#include "clt/trace_io.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "clt/error.hpp"
#include "clt/validate.hpp"

namespace clt {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

class LineReader {
 public:
  LineReader(std::string_view origin, std::size_t line) : origin_(origin), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw MalformedRecord(std::string(origin_) + ":" + std::to_string(line_) + ": field '" +
                          field + "': " + what);
  }

  const Json& require(const Json& obj, const char* key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(key, "missing");
    return *it;
  }

  double number(const Json& v, const std::string& field) const {
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const Json& v, const std::string& field) const {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const Json& v, const std::string& field) const {
    if (!v.is_boolean()) fail(field, "expected a boolean");
    return v.get<bool>();
  }

  std::vector<double> vector(const Json& v, const std::string& field) const {
    if (!v.is_array()) fail(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(number(x, field));
    return out;
  }

  std::vector<std::vector<double>> matrix(const Json& v, const std::string& field) const {
    if (!v.is_array()) fail(field, "expected an array of arrays");
    std::vector<std::vector<double>> out;
    out.reserve(v.size());
    for (const auto& row : v) out.push_back(vector(row, field));
    return out;
  }

 private:
  std::string_view origin_;
  std::size_t line_;
};

Json parse_line(const std::string& text, const LineReader& reader) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    reader.fail("<record>", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) reader.fail("<record>", "expected a JSON object");
  return j;
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> known,
                         const LineReader& reader) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) reader.fail(it.key(), "unknown field");
  }
}

TraceMeta parse_meta(const Json& j, const LineReader& r) {
  reject_unknown_keys(j, {"format", "version", "num_layers", "hidden_dim", "mode", "epsilon",
                          "source"},
                      r);
  const auto& format = r.require(j, "format");
  if (!format.is_string() || format.get<std::string>() != kTraceFormatName) {
    r.fail("format", "expected \"clt-trace\"");
  }
  const auto version = r.integer(r.require(j, "version"), "version");
  if (version != kTraceFormatVersion) {
    throw UnsupportedVersion("trace format version " + std::to_string(version) +
                             " (supported: " + std::to_string(kTraceFormatVersion) + ")");
  }
  TraceMeta meta;
  meta.num_layers = static_cast<int>(r.integer(r.require(j, "num_layers"), "num_layers"));
  meta.hidden_dim = static_cast<int>(r.integer(r.require(j, "hidden_dim"), "hidden_dim"));
  const auto& mode = r.require(j, "mode");
  if (!mode.is_string()) r.fail("mode", "expected a string");
  auto parsed = parse_trace_mode(mode.get<std::string>());
  if (!parsed) r.fail("mode", "expected \"full\" or \"digest\"");
  meta.mode = *parsed;
  if (j.contains("epsilon")) meta.epsilon = r.number(j["epsilon"], "epsilon");
  if (j.contains("source")) {
    if (!j["source"].is_string()) r.fail("source", "expected a string");
    meta.source = j["source"].get<std::string>();
  }
  return meta;
}

StepRecord parse_step(const Json& j, const LineReader& r) {
  reject_unknown_keys(j, {"step", "attention", "hidden", "cache_hits", "cache_queries",
                          "token_dist", "ref_dist", "concept_active", "error_event", "digest"},
                      r);
  StepRecord s;
  s.step = r.integer(r.require(j, "step"), "step");
  if (j.contains("attention")) s.attention = r.matrix(j["attention"], "attention");
  if (j.contains("hidden")) s.hidden = r.matrix(j["hidden"], "hidden");
  s.cache_hits = r.integer(r.require(j, "cache_hits"), "cache_hits");
  s.cache_queries = r.integer(r.require(j, "cache_queries"), "cache_queries");
  s.token_dist = r.vector(r.require(j, "token_dist"), "token_dist");
  if (j.contains("ref_dist")) s.ref_dist = r.vector(j["ref_dist"], "ref_dist");
  if (j.contains("concept_active")) {
    const auto& flags = j["concept_active"];
    if (!flags.is_array()) r.fail("concept_active", "expected an array of booleans");
    std::vector<bool> out;
    out.reserve(flags.size());
    for (const auto& f : flags) out.push_back(r.boolean(f, "concept_active"));
    s.concept_active = std::move(out);
  }
  if (j.contains("error_event")) s.error_event = r.boolean(j["error_event"], "error_event");
  if (j.contains("digest")) {
    const auto& d = j["digest"];
    if (!d.is_object()) r.fail("digest", "expected an object");
    reject_unknown_keys(d, {"entropy", "dispersion", "consolidation"}, r);
    StepDigest digest;
    digest.entropy = r.vector(r.require(d, "entropy"), "digest.entropy");
    digest.dispersion = r.vector(r.require(d, "dispersion"), "digest.dispersion");
    if (d.contains("consolidation")) {
      digest.consolidation = r.number(d["consolidation"], "digest.consolidation");
    }
    s.digest = std::move(digest);
  }
  return s;
}

OrderedJson meta_json(const TraceMeta& meta) {
  OrderedJson j;
  j["format"] = kTraceFormatName;
  j["version"] = kTraceFormatVersion;
  j["num_layers"] = meta.num_layers;
  j["hidden_dim"] = meta.hidden_dim;
  j["mode"] = to_string(meta.mode);
  j["epsilon"] = meta.epsilon;
  j["source"] = meta.source;
  return j;
}

OrderedJson step_json(const StepRecord& s) {
  OrderedJson j;
  j["step"] = s.step;
  if (!s.attention.empty()) j["attention"] = s.attention;
  if (!s.hidden.empty()) j["hidden"] = s.hidden;
  j["cache_hits"] = s.cache_hits;
  j["cache_queries"] = s.cache_queries;
  j["token_dist"] = s.token_dist;
  if (s.ref_dist) j["ref_dist"] = *s.ref_dist;
  if (s.concept_active) {
    OrderedJson flags = OrderedJson::array();
    for (bool b : *s.concept_active) flags.push_back(b);
    j["concept_active"] = std::move(flags);
  }
  if (s.error_event) j["error_event"] = *s.error_event;
  if (s.digest) {
    OrderedJson d;
    d["entropy"] = s.digest->entropy;
    d["dispersion"] = s.digest->dispersion;
    if (s.digest->consolidation) d["consolidation"] = *s.digest->consolidation;
    j["digest"] = std::move(d);
  }
  return j;
}

}  // namespace

Trace parse_trace(std::istream& in, std::string_view origin, TraceCheck check) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LineReader reader(origin, line_no);
    const Json j = parse_line(line, reader);
    if (!have_meta) {
      trace.meta = parse_meta(j, reader);
      have_meta = true;
    } else {
      trace.steps.push_back(parse_step(j, reader));
    }
  }
  if (!have_meta) {
    throw MalformedRecord(std::string(origin) + ": missing meta line");
  }
  if (check == TraceCheck::kValidate) require_valid(trace);
  return trace;
}

Trace read_trace(const std::filesystem::path& path, TraceCheck check) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  return parse_trace(in, path.string(), check);
}

std::string serialize_trace(const Trace& trace) {
  std::string out = meta_json(trace.meta).dump();
  out += '\n';
  for (const auto& s : trace.steps) {
    out += step_json(s).dump();
    out += '\n';
  }
  return out;
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  require_valid(trace);
  const std::string text = serialize_trace(trace);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoFailure("write failed: " + path.string());
}

}  // namespace clt
