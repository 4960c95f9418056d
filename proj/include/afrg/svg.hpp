#pragma once

#include <string>
#include <vector>

namespace afrg {

// Minimal SVG chart canvas: fixed margins, linear axes, data-space drawing.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title);

  void set_axes(double x_min, double x_max, double y_min, double y_max, std::string x_label,
                std::string y_label);

  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color, double stroke_width = 1.5,
                const std::string& dash = "");
  void scatter(const std::vector<double>& x, const std::vector<double>& y,
               const std::string& color, double radius = 2.0);
  void line(double x0, double y0, double x1, double y1, const std::string& color,
            double stroke_width = 1.0, const std::string& dash = "");
  void cell(double x0, double x1, double y0, double y1, const std::string& color);
  void bar(double x_center, double width, double height, const std::string& color);
  void label(double x, double y, const std::string& text, const std::string& color = "#333",
             int font_size = 11);
  void legend(const std::vector<std::pair<std::string, std::string>>& entries);

  void write(const std::string& path) const;

  // Grey-blue-yellow ramp for heatmaps, v in [0, 1].
  static std::string heat_color(double v);

 private:
  double px(double x) const;
  double py(double y) const;

  int width_, height_;
  std::string title_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1;
  std::string x_label_, y_label_;
  std::string body_;
};

}  // namespace afrg
