#include "clt/svg.hpp"

#include <cmath>
#include <cstdio>

namespace clt {

std::string svg_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string svg_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

std::string points_attr(const std::vector<std::pair<double, double>>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) s += ' ';
    s += svg_number(pts[i].first) + "," + svg_number(pts[i].second);
  }
  return s;
}

std::string with_extra(std::string_view extra) {
  return extra.empty() ? std::string() : " " + std::string(extra);
}

}  // namespace

SvgDocument::SvgDocument(double width, double height) : width_(width), height_(height) {}

void SvgDocument::rect(double x, double y, double w, double h, std::string_view fill,
                       std::string_view extra) {
  body_ += "<rect x=\"" + svg_number(x) + "\" y=\"" + svg_number(y) + "\" width=\"" +
           svg_number(w) + "\" height=\"" + svg_number(h) + "\" fill=\"" + std::string(fill) +
           "\"" + with_extra(extra) + "/>\n";
}

void SvgDocument::line(double x1, double y1, double x2, double y2, std::string_view stroke,
                       double stroke_width, std::string_view extra) {
  body_ += "<line x1=\"" + svg_number(x1) + "\" y1=\"" + svg_number(y1) + "\" x2=\"" +
           svg_number(x2) + "\" y2=\"" + svg_number(y2) + "\" stroke=\"" + std::string(stroke) +
           "\" stroke-width=\"" + svg_number(stroke_width) + "\"" + with_extra(extra) + "/>\n";
}

void SvgDocument::polyline(const std::vector<std::pair<double, double>>& pts,
                           std::string_view stroke, double stroke_width, std::string_view extra) {
  body_ += "<polyline points=\"" + points_attr(pts) + "\" fill=\"none\" stroke=\"" +
           std::string(stroke) + "\" stroke-width=\"" + svg_number(stroke_width) + "\"" +
           with_extra(extra) + "/>\n";
}

void SvgDocument::polygon(const std::vector<std::pair<double, double>>& pts,
                          std::string_view fill, std::string_view stroke,
                          std::string_view extra) {
  body_ += "<polygon points=\"" + points_attr(pts) + "\" fill=\"" + std::string(fill) +
           "\" stroke=\"" + std::string(stroke) + "\"" + with_extra(extra) + "/>\n";
}

void SvgDocument::circle(double cx, double cy, double r, std::string_view fill,
                         std::string_view extra) {
  body_ += "<circle cx=\"" + svg_number(cx) + "\" cy=\"" + svg_number(cy) + "\" r=\"" +
           svg_number(r) + "\" fill=\"" + std::string(fill) + "\"" + with_extra(extra) + "/>\n";
}

void SvgDocument::text(double x, double y, std::string_view content, double size,
                       std::string_view anchor) {
  body_ += "<text x=\"" + svg_number(x) + "\" y=\"" + svg_number(y) + "\" font-size=\"" +
           svg_number(size) + "\" font-family=\"sans-serif\" text-anchor=\"" +
           std::string(anchor) + "\">" + svg_escape(content) + "</text>\n";
}

void SvgDocument::raw(std::string_view element) {
  body_ += element;
  body_ += '\n';
}

std::string SvgDocument::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         svg_number(width_) + "\" height=\"" + svg_number(height_) + "\" viewBox=\"0 0 " +
         svg_number(width_) + " " + svg_number(height_) + "\">\n";
  out += body_;
  out += "</svg>\n";
  return out;
}

}  // namespace clt
