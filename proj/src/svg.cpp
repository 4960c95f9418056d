#include "afrg/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "afrg/errors.hpp"

namespace afrg {

namespace {
constexpr int kMarginLeft = 62, kMarginRight = 16, kMarginTop = 30, kMarginBottom = 46;

std::string fmt(double v) {
  char buf[32];
  if (v == 0.0)
    std::snprintf(buf, sizeof buf, "0");
  else if (std::abs(v) >= 0.01 && std::abs(v) < 10000)
    std::snprintf(buf, sizeof buf, "%.4g", v);
  else
    std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double nice_step(double range, int target_ticks) {
  const double raw = range / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (raw <= mult * mag) return mult * mag;
  return 10.0 * mag;
}

}  // namespace

SvgPlot::SvgPlot(int width, int height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {}

void SvgPlot::set_axes(double x_min, double x_max, double y_min, double y_max,
                       std::string x_label, std::string y_label) {
  if (!(x_max > x_min)) x_max = x_min + 1;
  if (!(y_max > y_min)) y_max = y_min + 1;
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
  x_label_ = std::move(x_label);
  y_label_ = std::move(y_label);
}

double SvgPlot::px(double x) const {
  return kMarginLeft + (x - x_min_) / (x_max_ - x_min_) * (width_ - kMarginLeft - kMarginRight);
}

double SvgPlot::py(double y) const {
  return height_ - kMarginBottom -
         (y - y_min_) / (y_max_ - y_min_) * (height_ - kMarginTop - kMarginBottom);
}

void SvgPlot::polyline(const std::vector<double>& x, const std::vector<double>& y,
                       const std::string& color, double stroke_width, const std::string& dash) {
  if (x.empty() || x.size() != y.size()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
           fmt(stroke_width) + "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
  body_ += " points=\"";
  for (size_t i = 0; i < x.size(); ++i)
    body_ += fmt(px(x[i])) + "," + fmt(py(y[i])) + " ";
  body_ += "\"/>\n";
}

void SvgPlot::scatter(const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& color, double radius) {
  for (size_t i = 0; i < x.size() && i < y.size(); ++i)
    body_ += "<circle cx=\"" + fmt(px(x[i])) + "\" cy=\"" + fmt(py(y[i])) + "\" r=\"" +
             fmt(radius) + "\" fill=\"" + color + "\" fill-opacity=\"0.6\"/>\n";
}

void SvgPlot::line(double x0, double y0, double x1, double y1, const std::string& color,
                   double stroke_width, const std::string& dash) {
  body_ += "<line x1=\"" + fmt(px(x0)) + "\" y1=\"" + fmt(py(y0)) + "\" x2=\"" + fmt(px(x1)) +
           "\" y2=\"" + fmt(py(y1)) + "\" stroke=\"" + color + "\" stroke-width=\"" +
           fmt(stroke_width) + "\"";
  if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
  body_ += "/>\n";
}

void SvgPlot::cell(double x0, double x1, double y0, double y1, const std::string& color) {
  const double left = px(x0), top = py(y1);
  body_ += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" +
           fmt(px(x1) - left + 0.5) + "\" height=\"" + fmt(py(y0) - top + 0.5) + "\" fill=\"" +
           color + "\"/>\n";
}

void SvgPlot::bar(double x_center, double width, double height, const std::string& color) {
  const double left = px(x_center - width / 2);
  const double top = py(height);
  body_ += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" +
           fmt(px(x_center + width / 2) - left) + "\" height=\"" + fmt(py(0) - top) +
           "\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>\n";
}

void SvgPlot::label(double x, double y, const std::string& text, const std::string& color,
                    int font_size) {
  body_ += "<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(py(y)) + "\" font-size=\"" +
           std::to_string(font_size) + "\" fill=\"" + color + "\">" + text + "</text>\n";
}

void SvgPlot::legend(const std::vector<std::pair<std::string, std::string>>& entries) {
  double y = kMarginTop + 6;
  for (const auto& [text, color] : entries) {
    body_ += "<rect x=\"" + fmt(width_ - kMarginRight - 150.0) + "\" y=\"" + fmt(y - 8) +
             "\" width=\"12\" height=\"8\" fill=\"" + color + "\"/>\n";
    body_ += "<text x=\"" + fmt(width_ - kMarginRight - 133.0) + "\" y=\"" + fmt(y) +
             "\" font-size=\"11\" fill=\"#333\">" + text + "</text>\n";
    y += 16;
  }
}

std::string SvgPlot::heat_color(double v) {
  v = std::clamp(v, 0.0, 1.0);
  // Dark blue -> cyan -> yellow.
  const int r = static_cast<int>(255 * std::clamp(2.0 * v - 1.0, 0.0, 1.0));
  const int g = static_cast<int>(255 * std::clamp(1.6 * v, 0.0, 1.0) * (0.4 + 0.6 * v));
  const int b = static_cast<int>(255 * std::clamp(1.0 - 1.2 * v, 0.1, 1.0));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

void SvgPlot::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write SVG: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width_ / 2 << "\" y=\"18\" font-size=\"13\" text-anchor=\"middle\" "
      << "fill=\"#111\">" << title_ << "</text>\n";

  // Frame.
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
      << width_ - kMarginLeft - kMarginRight << "\" height=\""
      << height_ - kMarginTop - kMarginBottom << "\" fill=\"none\" stroke=\"#999\"/>\n";

  // Ticks.
  const double xstep = nice_step(x_max_ - x_min_, 6);
  for (double x = std::ceil(x_min_ / xstep) * xstep; x <= x_max_ + 1e-12; x += xstep) {
    out << "<line x1=\"" << px(x) << "\" y1=\"" << height_ - kMarginBottom << "\" x2=\"" << px(x)
        << "\" y2=\"" << height_ - kMarginBottom + 4 << "\" stroke=\"#666\"/>\n";
    out << "<text x=\"" << px(x) << "\" y=\"" << height_ - kMarginBottom + 16
        << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333\">" << fmt(x) << "</text>\n";
  }
  const double ystep = nice_step(y_max_ - y_min_, 5);
  for (double y = std::ceil(y_min_ / ystep) * ystep; y <= y_max_ + 1e-12; y += ystep) {
    out << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << py(y) << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << py(y) << "\" stroke=\"#666\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << py(y) + 3
        << "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333\">" << fmt(y) << "</text>\n";
  }
  out << "<text x=\"" << (kMarginLeft + width_ - kMarginRight) / 2 << "\" y=\"" << height_ - 8
      << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#111\">" << x_label_ << "</text>\n";
  out << "<text x=\"14\" y=\"" << (kMarginTop + height_ - kMarginBottom) / 2
      << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 14 "
      << (kMarginTop + height_ - kMarginBottom) / 2 << ")\">" << y_label_ << "</text>\n";

  out << body_;
  out << "</svg>\n";
}

}  // namespace afrg
