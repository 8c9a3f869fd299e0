#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cltrace {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// Fixed output names, relative to --out.
namespace files {
inline constexpr std::string_view kPoints = "points.csv";
inline constexpr std::string_view kNormStats = "norm_stats.json";
inline constexpr std::string_view kSummary = "summary.txt";
inline constexpr std::string_view kWeights = "weights.json";
inline constexpr std::string_view kFitReport = "fit_report.txt";
inline constexpr std::string_view kAnalysis = "analysis.txt";
inline constexpr std::string_view kSpikes = "spikes.csv";
inline constexpr std::string_view kClusters = "clusters.csv";
inline constexpr std::string_view kTrace = "trace.jsonl";
inline constexpr std::string_view kPhases = "phases.csv";
inline constexpr std::string_view kBaselinePoints = "baseline_points.csv";
inline constexpr std::string_view kIntervenedPoints = "intervened_points.csv";
inline constexpr std::string_view kBaselineTrace = "baseline_trace.jsonl";
inline constexpr std::string_view kIntervenedTrace = "intervened_trace.jsonl";
inline constexpr std::string_view kHistory = "history.csv";
inline constexpr std::string_view kComparison = "comparison.txt";
}  // namespace files

// Runs the command line `args` (without the program name). Returns the
// process exit code: 0 success, 1 domain error, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cltrace
