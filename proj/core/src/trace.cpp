#include "clt/trace.hpp"

#include <algorithm>

namespace clt {

std::string_view to_string(TraceMode mode) {
  return mode == TraceMode::kFull ? "full" : "digest";
}

std::optional<TraceMode> parse_trace_mode(std::string_view text) {
  if (text == "full") return TraceMode::kFull;
  if (text == "digest") return TraceMode::kDigest;
  return std::nullopt;
}

bool Trace::fully_labeled() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](const StepRecord& s) { return s.error_event.has_value(); });
}

std::vector<bool> Trace::error_labels() const {
  std::vector<bool> labels;
  labels.reserve(steps.size());
  for (const auto& s : steps) labels.push_back(s.error_event.value_or(false));
  return labels;
}

}  // namespace clt
