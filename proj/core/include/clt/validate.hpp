#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clt/trace.hpp"

namespace clt {

inline constexpr double kProbabilitySumTolerance = 1e-6;

struct ViolationReport {
  std::optional<std::int64_t> step;  // empty for meta-level violations
  std::string field;
  std::string rule;
  std::string detail;

  std::string to_string() const;
};

// Checks every trace invariant. Never throws; an empty result means valid.
std::vector<ViolationReport> validate_trace(const Trace& trace);

// Checks a single step against `meta`. `expected_index` is the index the
// step must carry to keep the sequence consecutive.
std::vector<ViolationReport> validate_step(const StepRecord& step, const TraceMeta& meta,
                                           std::int64_t expected_index);

std::vector<ViolationReport> validate_meta(const TraceMeta& meta);

// Throws InvariantViolation naming the first report, if any.
void require_valid(const Trace& trace);

}  // namespace clt
