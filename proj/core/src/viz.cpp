#include "clt/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "clt/config_io.hpp"
#include "clt/csv.hpp"
#include "clt/error.hpp"
#include "clt/proxies.hpp"
#include "clt/svg.hpp"

namespace clt {
namespace {

constexpr std::array<std::string_view, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
constexpr std::string_view kIlColor = "#1f77b4";
constexpr std::string_view kElColor = "#d62728";
constexpr std::string_view kGlColor = "#2ca02c";
constexpr std::string_view kCliColor = "#000000";

std::string_view palette(int label) {
  if (label < 0) return "#7f7f7f";
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

void require_unit(double v, std::int64_t step, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw RangeError(std::string(what) + " at step " + std::to_string(step) + " = " +
                     format_double(v) + " lies outside [0, 1]");
  }
}

void require_unit_points(std::span<const LoadPoint> points) {
  for (const auto& p : points) {
    require_unit(p.il, p.step, "il");
    require_unit(p.el, p.step, "el");
    require_unit(p.gl, p.step, "gl");
    require_unit(p.cli, p.step, "cli");
  }
}

// Maps data into a plot rectangle [left, left + width] x [top, top + height].
struct Frame {
  double left = 50.0, top = 20.0, width = 720.0, height = 240.0;
  double x_span = 1.0;

  double x(double index) const { return left + (x_span > 0.0 ? index / x_span : 0.5) * width; }
  double y(double value) const { return top + (1.0 - value) * height; }
};

void draw_value_axes(SvgDocument& svg, const Frame& f) {
  svg.rect(f.left, f.top, f.width, f.height, "none", "stroke=\"#999999\"");
  for (double v : {0.0, 0.5, 1.0}) {
    svg.text(f.left - 6.0, f.y(v) + 4.0, format_double(v), 10.0, "end");
  }
}

std::string hex_color(double t) {
  // Linear ramp from pale yellow to dark blue.
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255.0 + t * (8.0 - 255.0)));
  const int g = static_cast<int>(std::lround(255.0 + t * (48.0 - 255.0)));
  const int b = static_cast<int>(std::lround(204.0 + t * (107.0 - 204.0)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

ExportPaths write_figure(const Figure& figure, const std::filesystem::path& stem) {
  ExportPaths paths{stem, stem};
  paths.csv += ".csv";
  paths.svg += ".svg";
  write_text_file(paths.csv, figure.csv);
  write_text_file(paths.svg, figure.svg);
  return paths;
}

std::pair<double, double> simplex_project(double il, double el, double gl) {
  const double sum = il + el + gl;
  if (!(sum >= 1e-12)) return {0.5, kSimplexApexY / 3.0};
  const double b_il = il / sum, b_el = el / sum, b_gl = gl / sum;
  const auto& v = kSimplexVertices;
  return {b_il * v[0].first + b_el * v[1].first + b_gl * v[2].first,
          b_il * v[0].second + b_el * v[1].second + b_gl * v[2].second};
}

Figure render_load_curves(std::span<const LoadPoint> points, const CurveAnnotations& notes) {
  require_unit_points(points);
  if (notes.errors && notes.errors->size() != points.size()) {
    throw LengthMismatch("error labels do not match point count");
  }
  std::map<std::int64_t, std::string> fired;
  if (notes.history) {
    for (const auto& e : notes.history->events) fired[e.step] = e.intervention_id;
  }

  CsvTable table({"step", "il", "el", "gl", "cli", "error", "intervention"});
  for (std::size_t t = 0; t < points.size(); ++t) {
    const auto& p = points[t];
    const auto it = fired.find(p.step);
    table.add_row({std::to_string(p.step), format_double(p.il), format_double(p.el),
                   format_double(p.gl), format_double(p.cli),
                   notes.errors ? ((*notes.errors)[t] ? "1" : "0") : "",
                   it == fired.end() ? "" : it->second});
  }

  Frame f;
  f.x_span = points.size() > 1 ? static_cast<double>(points.size() - 1) : 0.0;
  SvgDocument svg(820.0, 300.0);
  svg.rect(0.0, 0.0, 820.0, 300.0, "#ffffff");
  draw_value_axes(svg, f);
  svg.line(f.left, f.y(notes.spike_threshold), f.left + f.width, f.y(notes.spike_threshold),
           "#d62728", 0.8, "stroke-dasharray=\"4 3\" class=\"spike-threshold\"");
  if (notes.errors) {
    for (std::size_t t = 0; t < points.size(); ++t) {
      if ((*notes.errors)[t]) {
        const double x = f.x(static_cast<double>(t));
        svg.line(x, f.top, x, f.top + f.height, "#ff7f0e", 0.8, "class=\"error-step\"");
      }
    }
  }
  const std::array<std::pair<LoadComponent, std::string_view>, 4> series = {
      {{LoadComponent::kIntrinsic, kIlColor},
       {LoadComponent::kExtraneous, kElColor},
       {LoadComponent::kGermane, kGlColor},
       {LoadComponent::kCli, kCliColor}}};
  for (const auto& [component, color] : series) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(points.size());
    for (std::size_t t = 0; t < points.size(); ++t) {
      pts.emplace_back(f.x(static_cast<double>(t)), f.y(points[t].component(component)));
    }
    svg.polyline(pts, color, component == LoadComponent::kCli ? 1.6 : 1.0,
                 "class=\"series-" + std::string(to_string(component)) + "\"");
  }
  for (std::size_t t = 0; t < points.size(); ++t) {
    if (points[t].el > notes.spike_threshold) {
      svg.circle(f.x(static_cast<double>(t)), f.y(points[t].el), 2.5, std::string(kElColor),
                 "class=\"spike\"");
    }
  }
  for (const auto& [step, id] : fired) {
    for (std::size_t t = 0; t < points.size(); ++t) {
      if (points[t].step != step) continue;
      const double x = f.x(static_cast<double>(t));
      svg.polygon({{x - 3.0, f.top - 8.0}, {x + 3.0, f.top - 8.0}, {x, f.top - 2.0}}, "#9467bd",
                  "none", "class=\"intervention\"");
    }
  }
  double lx = f.left;
  for (const auto& [component, color] : series) {
    svg.line(lx, 288.0, lx + 16.0, 288.0, color, 2.0);
    svg.text(lx + 20.0, 292.0, to_string(component), 11.0);
    lx += 70.0;
  }
  svg.text(f.left + f.width, 292.0, "step", 11.0, "end");
  return {table.str(), svg.str()};
}

Figure render_simplex(std::span<const LoadPoint> points, const std::vector<int>* labels) {
  if (labels && labels->size() != points.size()) {
    throw LengthMismatch("labels do not match point count");
  }
  CsvTable table({"step", "il", "el", "gl", "x", "y", "label"});
  const double scale = 400.0, ox = 50.0, oy = 420.0;
  auto to_svg = [&](double x, double y) { return std::make_pair(ox + scale * x, oy - scale * y); };

  SvgDocument svg(500.0, 460.0);
  svg.rect(0.0, 0.0, 500.0, 460.0, "#ffffff");
  std::vector<std::pair<double, double>> tri;
  for (const auto& v : kSimplexVertices) tri.push_back(to_svg(v.first, v.second));
  svg.polygon(tri, "none", "#333333", "class=\"simplex\"");
  const auto [cx, cy] = to_svg(0.5, kSimplexApexY / 3.0);
  svg.circle(cx, cy, 2.0, "#999999", "class=\"centroid\"");
  svg.text(tri[0].first - 5.0, tri[0].second + 16.0, "IL", 13.0, "middle");
  svg.text(tri[1].first + 5.0, tri[1].second + 16.0, "EL", 13.0, "middle");
  svg.text(tri[2].first, tri[2].second - 8.0, "GL", 13.0, "middle");

  for (std::size_t t = 0; t < points.size(); ++t) {
    const auto& p = points[t];
    const auto [x, y] = simplex_project(p.il, p.el, p.gl);
    const int label = labels ? (*labels)[t] : -1;
    table.add_row({std::to_string(p.step), format_double(p.il), format_double(p.el),
                   format_double(p.gl), format_double(x), format_double(y),
                   labels ? std::to_string(label) : ""});
    const auto [sx, sy] = to_svg(x, y);
    svg.circle(sx, sy, 2.0, palette(label), "fill-opacity=\"0.6\"");
  }
  return {table.str(), svg.str()};
}

LayerSignal parse_layer_signal(std::string_view text) {
  if (text == "entropy") return LayerSignal::kEntropy;
  if (text == "dispersion") return LayerSignal::kDispersion;
  throw ConfigError("unknown layer signal '" + std::string(text) + "'");
}

std::vector<std::vector<double>> layer_time_matrix(const Trace& trace, LayerSignal signal) {
  const auto layers = static_cast<std::size_t>(trace.meta.num_layers);
  std::vector<std::vector<double>> matrix(layers, std::vector<double>(trace.size()));
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& step = trace.steps[t];
    std::vector<double> column;
    try {
      column = signal == LayerSignal::kEntropy ? layer_entropies(step, trace.meta)
                                               : layer_dispersions(step, trace.meta);
    } catch (const MissingField& e) {
      throw MissingField("step " + std::to_string(step.step) + ": " + e.message());
    }
    if (column.size() != layers) {
      throw MissingField("step " + std::to_string(step.step) + ": per-layer signal incomplete");
    }
    for (std::size_t l = 0; l < layers; ++l) matrix[l][t] = column[l];
  }
  return matrix;
}

Figure render_heatmap(const Trace& trace, LayerSignal signal) {
  const auto matrix = layer_time_matrix(trace, signal);
  std::vector<std::string> header{"layer"};
  for (const auto& s : trace.steps) header.push_back(std::to_string(s.step));
  CsvTable table(std::move(header));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < matrix.size(); ++l) {
    std::vector<std::string> row{std::to_string(l)};
    for (double v : matrix[l]) {
      row.push_back(format_double(v));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    table.add_row(std::move(row));
  }

  const double cell_w = std::max(1.0, 720.0 / static_cast<double>(std::max<std::size_t>(trace.size(), 1)));
  const double cell_h = 24.0;
  const double width = 60.0 + cell_w * static_cast<double>(trace.size()) + 20.0;
  const double height = 30.0 + cell_h * static_cast<double>(matrix.size()) + 40.0;
  SvgDocument svg(width, height);
  svg.rect(0.0, 0.0, width, height, "#ffffff");
  for (std::size_t l = 0; l < matrix.size(); ++l) {
    const double y = 20.0 + cell_h * static_cast<double>(l);
    svg.text(54.0, y + cell_h / 2.0 + 4.0, "L" + std::to_string(l), 10.0, "end");
    for (std::size_t t = 0; t < matrix[l].size(); ++t) {
      const double frac = hi > lo ? (matrix[l][t] - lo) / (hi - lo) : 0.0;
      svg.rect(60.0 + cell_w * static_cast<double>(t), y, cell_w, cell_h, hex_color(frac));
    }
  }
  const double legend_y = 20.0 + cell_h * static_cast<double>(matrix.size()) + 24.0;
  const std::string name = signal == LayerSignal::kEntropy ? "entropy" : "dispersion";
  std::string legend = name + " min=" + format_double(lo) + " max=" + format_double(hi);
  if (lo == hi) legend += " (constant)";
  svg.text(60.0, legend_y, legend, 11.0);
  return {table.str(), svg.str()};
}

Figure render_radar(const TraceSummary& summary) {
  CsvTable table({"axis", "value"});
  for (std::size_t p = 0; p < kProxyCount; ++p) {
    table.add_row({std::string(kProxyNames[p]), format_double(summary.normalized_means[p])});
  }
  const double cx = 200.0, cy = 200.0, radius = 150.0;
  const double pi = std::acos(-1.0);
  auto at = [&](std::size_t axis, double value) {
    const double angle = -pi / 2.0 + 2.0 * pi * static_cast<double>(axis) / kProxyCount;
    return std::make_pair(cx + radius * value * std::cos(angle),
                          cy + radius * value * std::sin(angle));
  };
  SvgDocument svg(400.0, 400.0);
  svg.rect(0.0, 0.0, 400.0, 400.0, "#ffffff");
  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t a = 0; a < kProxyCount; ++a) pts.push_back(at(a, ring));
    svg.polygon(pts, "none", "#dddddd", "class=\"grid\"");
  }
  std::vector<std::pair<double, double>> profile;
  for (std::size_t a = 0; a < kProxyCount; ++a) {
    const auto [x, y] = at(a, 1.0);
    svg.line(cx, cy, x, y, "#bbbbbb", 0.8);
    const auto [lx, ly] = at(a, 1.12);
    svg.text(lx, ly + 4.0, kProxyNames[a], 11.0, "middle");
    profile.push_back(at(a, summary.normalized_means[a]));
  }
  svg.polygon(profile, "#1f77b4", "#1f77b4", "fill-opacity=\"0.3\" class=\"profile\"");
  return {table.str(), svg.str()};
}

Figure render_parallel_coords(std::span<const LoadPoint> points, const ClusterModel* clusters) {
  require_unit_points(points);
  if (clusters && clusters->assignments.size() != points.size()) {
    throw LengthMismatch("cluster assignments do not match point count");
  }
  CsvTable table({"step", "il", "el", "gl", "cli", "cluster"});
  const std::array<LoadComponent, 4> axes = {LoadComponent::kIntrinsic, LoadComponent::kExtraneous,
                                             LoadComponent::kGermane, LoadComponent::kCli};
  const double left = 60.0, gap = 200.0, top = 30.0, height = 300.0;
  SvgDocument svg(left * 2.0 + gap * 3.0, top + height + 40.0);
  svg.rect(0.0, 0.0, left * 2.0 + gap * 3.0, top + height + 40.0, "#ffffff");
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const double x = left + gap * static_cast<double>(a);
    svg.line(x, top, x, top + height, "#333333", 1.0);
    svg.text(x, top + height + 20.0, to_string(axes[a]), 12.0, "middle");
  }
  for (std::size_t t = 0; t < points.size(); ++t) {
    const auto& p = points[t];
    const int label = clusters ? clusters->assignments[t] : -1;
    table.add_row({std::to_string(p.step), format_double(p.il), format_double(p.el),
                   format_double(p.gl), format_double(p.cli),
                   clusters ? std::to_string(label) : ""});
    std::vector<std::pair<double, double>> line;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      line.emplace_back(left + gap * static_cast<double>(a),
                        top + (1.0 - p.component(axes[a])) * height);
    }
    const std::string cls =
        clusters ? "class=\"cluster-" + std::to_string(label) + "\"" : "class=\"cluster-none\"";
    svg.polyline(line, palette(label), 0.8, cls + " stroke-opacity=\"0.5\"");
  }
  return {table.str(), svg.str()};
}

std::vector<double> resample(std::span<const double> series, std::size_t grid) {
  std::vector<double> out(grid);
  if (series.empty() || grid == 0) return out;
  if (series.size() == 1) {
    std::fill(out.begin(), out.end(), series.front());
    return out;
  }
  const double last = static_cast<double>(series.size() - 1);
  for (std::size_t j = 0; j < grid; ++j) {
    const double pos = grid > 1 ? static_cast<double>(j) / static_cast<double>(grid - 1) : 0.0;
    const double h = pos * last;
    const auto lo = std::min(static_cast<std::size_t>(std::floor(h)), series.size() - 1);
    const std::size_t hi = std::min(lo + 1, series.size() - 1);
    const double frac = h - static_cast<double>(lo);
    out[j] = frac == 0.0 ? series[lo] : series[lo] + frac * (series[hi] - series[lo]);
  }
  return out;
}

std::vector<BandRow> compute_bands(std::span<const std::vector<LoadPoint>> traces,
                                   LoadComponent component, std::size_t grid) {
  if (traces.size() < 2) {
    throw TooFewTraces(std::to_string(traces.size()) + " traces; bands need at least 2");
  }
  std::vector<std::vector<double>> resampled;
  for (const auto& points : traces) {
    if (points.empty()) throw TooFewPoints("empty trace in band input");
    std::vector<double> series;
    series.reserve(points.size());
    for (const auto& p : points) series.push_back(p.component(component));
    resampled.push_back(resample(series, grid));
  }
  const double n = static_cast<double>(traces.size());
  std::vector<BandRow> rows(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    // Welford keeps the mean exact when every trace agrees.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < resampled.size(); ++k) {
      const double v = resampled[k][j];
      const double delta = v - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (v - mean);
    }
    const double sd = std::sqrt(std::max(0.0, m2 / (n - 1.0)));
    const double half = 1.96 * sd / std::sqrt(n);
    rows[j] = {grid > 1 ? static_cast<double>(j) / static_cast<double>(grid - 1) : 0.0, mean,
               mean - half, mean + half};
  }
  return rows;
}

Figure render_bands(std::span<const std::vector<LoadPoint>> traces, LoadComponent component) {
  const auto rows = compute_bands(traces, component);
  CsvTable table({"position", "mean", "lo", "hi"});
  for (const auto& r : rows) {
    table.add_row({format_double(r.position), format_double(r.mean), format_double(r.lo),
                   format_double(r.hi)});
  }
  Frame f;
  f.x_span = 1.0;
  SvgDocument svg(820.0, 300.0);
  svg.rect(0.0, 0.0, 820.0, 300.0, "#ffffff");
  draw_value_axes(svg, f);
  std::vector<std::pair<double, double>> band, mean_line;
  for (const auto& r : rows) {
    band.emplace_back(f.x(r.position), f.y(std::clamp(r.hi, 0.0, 1.0)));
    mean_line.emplace_back(f.x(r.position), f.y(r.mean));
  }
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    band.emplace_back(f.x(it->position), f.y(std::clamp(it->lo, 0.0, 1.0)));
  }
  svg.polygon(band, "#1f77b4", "none", "fill-opacity=\"0.25\" class=\"band\"");
  svg.polyline(mean_line, "#1f77b4", 1.5, "class=\"mean\"");
  svg.text(f.left, 292.0,
           std::string(to_string(component)) + " mean and 95% band over " +
               std::to_string(traces.size()) + " traces",
           11.0);
  svg.text(f.left + f.width, 292.0, "relative position", 11.0, "end");
  return {table.str(), svg.str()};
}

}  // namespace clt
