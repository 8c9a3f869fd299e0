#include "clt/validate.hpp"

#include <cmath>
#include <sstream>

#include "clt/error.hpp"

namespace clt {
namespace {

class Reporter {
 public:
  Reporter(std::vector<ViolationReport>& out, std::optional<std::int64_t> step)
      : out_(out), step_(step) {}

  void add(std::string field, std::string rule, std::string detail = {}) {
    out_.push_back({step_, std::move(field), std::move(rule), std::move(detail)});
  }

 private:
  std::vector<ViolationReport>& out_;
  std::optional<std::int64_t> step_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_distribution(Reporter& rep, const std::string& field,
                        const std::vector<double>& dist) {
  if (dist.empty()) {
    rep.add(field, "non-empty");
    return;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist[i];
    if (!std::isfinite(p)) {
      rep.add(field, "finite", "entry " + std::to_string(i));
      return;
    }
    if (p < 0.0) {
      rep.add(field, "non-negative", "entry " + std::to_string(i) + " = " + fmt(p));
      return;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    rep.add(field, "sums to 1 within 1e-6", "sum = " + fmt(sum));
  }
}

void check_attention(Reporter& rep, const StepRecord& s, const TraceMeta& meta) {
  if (s.attention.empty()) {
    if (meta.mode == TraceMode::kFull) rep.add("attention", "present in full mode");
    return;
  }
  if (s.attention.size() != static_cast<std::size_t>(meta.num_layers)) {
    rep.add("attention", "one row per layer",
            std::to_string(s.attention.size()) + " rows for " +
                std::to_string(meta.num_layers) + " layers");
  }
  const std::size_t width = s.attention.front().size();
  for (std::size_t l = 0; l < s.attention.size(); ++l) {
    const std::string field = "attention[" + std::to_string(l) + "]";
    if (s.attention[l].size() != width) {
      rep.add(field, "row length shared across layers",
              std::to_string(s.attention[l].size()) + " != " + std::to_string(width));
      continue;
    }
    check_distribution(rep, field, s.attention[l]);
  }
}

void check_hidden(Reporter& rep, const StepRecord& s, const TraceMeta& meta) {
  if (s.hidden.empty()) {
    if (meta.mode == TraceMode::kFull) rep.add("hidden", "present in full mode");
    return;
  }
  if (s.hidden.size() != static_cast<std::size_t>(meta.num_layers)) {
    rep.add("hidden", "one vector per layer",
            std::to_string(s.hidden.size()) + " vectors for " +
                std::to_string(meta.num_layers) + " layers");
  }
  for (std::size_t l = 0; l < s.hidden.size(); ++l) {
    const std::string field = "hidden[" + std::to_string(l) + "]";
    if (s.hidden[l].size() != static_cast<std::size_t>(meta.hidden_dim)) {
      rep.add(field, "length == hidden_dim",
              std::to_string(s.hidden[l].size()) + " != " + std::to_string(meta.hidden_dim));
      continue;
    }
    for (double v : s.hidden[l]) {
      if (!std::isfinite(v)) {
        rep.add(field, "finite");
        break;
      }
    }
  }
}

void check_digest(Reporter& rep, const StepRecord& s, const TraceMeta& meta) {
  if (!s.digest) {
    if (meta.mode == TraceMode::kDigest) rep.add("digest", "present in digest mode");
    return;
  }
  const auto check_layers = [&](const std::string& field, const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(meta.num_layers)) {
      rep.add(field, "one value per layer",
              std::to_string(values.size()) + " values for " +
                  std::to_string(meta.num_layers) + " layers");
      return;
    }
    for (double v : values) {
      if (!std::isfinite(v) || v < 0.0) {
        rep.add(field, "finite and non-negative", fmt(v));
        return;
      }
    }
  };
  check_layers("digest.entropy", s.digest->entropy);
  check_layers("digest.dispersion", s.digest->dispersion);
  if (s.digest->consolidation) {
    const double c = *s.digest->consolidation;
    if (!std::isfinite(c) || c < -1.0 - 1e-12 || c > 1.0 + 1e-12) {
      rep.add("digest.consolidation", "in [-1, 1]", fmt(c));
    }
  }
}

}  // namespace

std::string ViolationReport::to_string() const {
  std::string out;
  if (step) out += "step " + std::to_string(*step) + ": ";
  out += field + " violates '" + rule + "'";
  if (!detail.empty()) out += " (" + detail + ")";
  return out;
}

std::vector<ViolationReport> validate_meta(const TraceMeta& meta) {
  std::vector<ViolationReport> out;
  Reporter rep(out, std::nullopt);
  if (meta.num_layers < 1) rep.add("num_layers", "num_layers >= 1");
  if (meta.hidden_dim < 1) rep.add("hidden_dim", "hidden_dim >= 1");
  if (!(meta.epsilon > 0.0) || !std::isfinite(meta.epsilon)) {
    rep.add("epsilon", "epsilon > 0", fmt(meta.epsilon));
  }
  return out;
}

std::vector<ViolationReport> validate_step(const StepRecord& s, const TraceMeta& meta,
                                           std::int64_t expected_index) {
  std::vector<ViolationReport> out;
  Reporter rep(out, s.step);
  if (s.step != expected_index) {
    rep.add("step", "indices consecutive from 0",
            "expected " + std::to_string(expected_index));
  }
  check_attention(rep, s, meta);
  check_hidden(rep, s, meta);
  if (s.cache_hits < 0) rep.add("cache_hits", "non-negative");
  if (s.cache_queries < 0) rep.add("cache_queries", "non-negative");
  if (s.cache_hits > s.cache_queries) {
    rep.add("cache_hits", "cache_hits <= cache_queries",
            std::to_string(s.cache_hits) + " > " + std::to_string(s.cache_queries));
  }
  check_distribution(rep, "token_dist", s.token_dist);
  if (s.ref_dist) {
    check_distribution(rep, "ref_dist", *s.ref_dist);
    if (s.ref_dist->size() != s.token_dist.size()) {
      rep.add("ref_dist", "length == token_dist length");
    }
  }
  if (s.concept_active) {
    if (s.attention.empty()) {
      rep.add("concept_active", "requires attention rows");
    } else if (s.concept_active->size() != s.attention_width()) {
      rep.add("concept_active", "length == attention width",
              std::to_string(s.concept_active->size()) + " != " +
                  std::to_string(s.attention_width()));
    }
  }
  check_digest(rep, s, meta);
  return out;
}

std::vector<ViolationReport> validate_trace(const Trace& trace) {
  std::vector<ViolationReport> out = validate_meta(trace.meta);
  if (trace.steps.empty()) {
    out.push_back({std::nullopt, "steps", "length T >= 1", {}});
    return out;
  }
  // Step-level checks need a sane layer count to be meaningful.
  if (!out.empty()) return out;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    auto reports = validate_step(trace.steps[t], trace.meta, static_cast<std::int64_t>(t));
    out.insert(out.end(), std::make_move_iterator(reports.begin()),
               std::make_move_iterator(reports.end()));
  }
  return out;
}

void require_valid(const Trace& trace) {
  const auto reports = validate_trace(trace);
  if (!reports.empty()) throw InvariantViolation(reports.front().to_string());
}

}  // namespace clt
