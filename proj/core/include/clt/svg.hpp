#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clt {

// Builder for static, self-contained SVG 1.1 documents. Coordinates are
// printed with three decimals so output is byte-stable.
class SvgDocument {
 public:
  SvgDocument(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill,
            std::string_view extra = {});
  void line(double x1, double y1, double x2, double y2, std::string_view stroke,
            double stroke_width = 1.0, std::string_view extra = {});
  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke,
                double stroke_width = 1.0, std::string_view extra = {});
  void polygon(const std::vector<std::pair<double, double>>& pts, std::string_view fill,
               std::string_view stroke, std::string_view extra = {});
  void circle(double cx, double cy, double r, std::string_view fill, std::string_view extra = {});
  void text(double x, double y, std::string_view content, double size = 12.0,
            std::string_view anchor = "start");
  void raw(std::string_view element);

  std::string str() const;

 private:
  double width_;
  double height_;
  std::string body_;
};

std::string svg_number(double v);
std::string svg_escape(std::string_view text);

}  // namespace clt
