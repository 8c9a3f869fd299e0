#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clt/analytics.hpp"
#include "clt/composition.hpp"
#include "clt/lgd.hpp"
#include "clt/trace.hpp"

namespace clt {

// Every figure is a CSV table plus an SVG rendering of the same values.
struct Figure {
  std::string csv;
  std::string svg;
};

struct ExportPaths {
  std::filesystem::path csv;
  std::filesystem::path svg;
};

// Writes <stem>.csv and <stem>.svg.
ExportPaths write_figure(const Figure& figure, const std::filesystem::path& stem);

// Reference triangle: IL = (0, 0), EL = (1, 0), GL = (0.5, sqrt(3)/2).
inline constexpr double kSimplexApexY = 0.86602540378443864676;
inline constexpr std::array<std::pair<double, double>, 3> kSimplexVertices = {
    {{0.0, 0.0}, {1.0, 0.0}, {0.5, kSimplexApexY}}};

struct SimplexPoint {
  std::int64_t step = 0;
  double x = 0.0;
  double y = 0.0;
};

// Barycentric projection of (il, el, gl); a zero sum maps to the centroid.
std::pair<double, double> simplex_project(double il, double el, double gl);

struct CurveAnnotations {
  const std::vector<bool>* errors = nullptr;
  const InterventionHistory* history = nullptr;
  double spike_threshold = 0.8;
};

// Throws RangeError if any load value lies outside [0, 1].
Figure render_load_curves(std::span<const LoadPoint> points, const CurveAnnotations& notes = {});

// `labels` (cluster or phase ids) colors the points when given.
Figure render_simplex(std::span<const LoadPoint> points, const std::vector<int>* labels = nullptr);

enum class LayerSignal { kEntropy, kDispersion };
LayerSignal parse_layer_signal(std::string_view text);

// matrix[l][t] of the per-layer raw signal.
std::vector<std::vector<double>> layer_time_matrix(const Trace& trace, LayerSignal signal);
Figure render_heatmap(const Trace& trace, LayerSignal signal);

// Axis order is fixed: entropy, dispersion, miss, stability, consolidation,
// reuse (clockwise from the top), each the mean normalized proxy.
Figure render_radar(const TraceSummary& summary);

Figure render_parallel_coords(std::span<const LoadPoint> points,
                              const ClusterModel* clusters = nullptr);

struct BandRow {
  double position = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr std::size_t kBandGridPoints = 100;

// Linear interpolation of `series` onto `grid` evenly spaced relative positions.
std::vector<double> resample(std::span<const double> series, std::size_t grid);

// mean +- 1.96 * sd / sqrt(n) per grid position. Throws TooFewTraces.
std::vector<BandRow> compute_bands(std::span<const std::vector<LoadPoint>> traces,
                                   LoadComponent component,
                                   std::size_t grid = kBandGridPoints);
Figure render_bands(std::span<const std::vector<LoadPoint>> traces, LoadComponent component);

}  // namespace clt
