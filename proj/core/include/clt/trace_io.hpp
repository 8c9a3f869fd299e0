#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "clt/trace.hpp"

namespace clt {

// Canonical trace file: newline-delimited JSON. Line 1 is the meta object,
// each following line one StepRecord. See docs/trace_format.md.
inline constexpr std::string_view kTraceFormatName = "clt-trace";
inline constexpr int kTraceFormatVersion = 1;

enum class TraceCheck { kValidate, kSyntaxOnly };

// Parses and (by default) validates. Throws MalformedRecord,
// UnsupportedVersion or InvariantViolation; IoFailure when the file cannot be
// opened. kSyntaxOnly skips the invariant checks so callers can collect every
// violation with validate_trace.
Trace read_trace(const std::filesystem::path& path, TraceCheck check = TraceCheck::kValidate);
Trace parse_trace(std::istream& in, std::string_view origin = "<stream>",
                  TraceCheck check = TraceCheck::kValidate);

// Validates, then writes. Output is byte-identical for equal traces.
void write_trace(const Trace& trace, const std::filesystem::path& path);

// Serialization without validation; used by tooling that needs to emit
// deliberately broken fixtures.
std::string serialize_trace(const Trace& trace);

}  // namespace clt
