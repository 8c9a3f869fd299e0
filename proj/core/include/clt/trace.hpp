#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clt {

inline constexpr double kDefaultEpsilon = 1e-8;

enum class TraceMode { kFull, kDigest };

std::string_view to_string(TraceMode mode);
std::optional<TraceMode> parse_trace_mode(std::string_view text);

struct TraceMeta {
  int num_layers = 1;
  int hidden_dim = 1;
  std::string source;
  TraceMode mode = TraceMode::kFull;
  double epsilon = kDefaultEpsilon;

  bool operator==(const TraceMeta&) const = default;
};

// Per-layer scalars precomputed by a producer that does not ship hidden
// states. `consolidation` is the step-level adjacent-layer alignment; when a
// digest omits it the proxy falls back to its neutral value.
struct StepDigest {
  std::vector<double> entropy;
  std::vector<double> dispersion;
  std::optional<double> consolidation;

  bool operator==(const StepDigest&) const = default;
};

struct StepRecord {
  std::int64_t step = 0;
  // attention[l][i]: probability that layer l attends to position i. All
  // layers share one row length within a step; the length may grow per step.
  std::vector<std::vector<double>> attention;
  // hidden[l]: layer l's hidden vector (full mode only).
  std::vector<std::vector<double>> hidden;
  std::int64_t cache_hits = 0;
  std::int64_t cache_queries = 0;
  std::vector<double> token_dist;
  std::optional<std::vector<double>> ref_dist;
  std::optional<std::vector<bool>> concept_active;
  std::optional<bool> error_event;
  std::optional<StepDigest> digest;

  std::size_t attention_width() const {
    return attention.empty() ? 0 : attention.front().size();
  }
  bool has_hidden() const { return !hidden.empty(); }

  bool operator==(const StepRecord&) const = default;
};

struct Trace {
  TraceMeta meta;
  std::vector<StepRecord> steps;

  std::size_t size() const { return steps.size(); }

  // True when every step carries an error_event label.
  bool fully_labeled() const;
  // error_event per step, missing labels read as false.
  std::vector<bool> error_labels() const;

  bool operator==(const Trace&) const = default;
};

}  // namespace clt
