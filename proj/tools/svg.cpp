// SPDX-License-Identifier: Apache-2.0

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace alpc::svg {

namespace {

constexpr double kWidth = 720.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 690.0, kTop = 30.0, kBottom = 420.0;

const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_chart(const std::string& path, const std::vector<Series>& series,
                 const ChartSpec& spec) {
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  bool any = false;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double vx = s.x[i];
      if (spec.log_x && vx <= 0.0) continue;
      if (spec.log_x) vx = std::log10(vx);
      if (!any) {
        min_x = max_x = vx;
        min_y = max_y = s.y[i];
        any = true;
      } else {
        min_x = std::min(min_x, vx);
        max_x = std::max(max_x, vx);
        min_y = std::min(min_y, s.y[i]);
        max_y = std::max(max_y, s.y[i]);
      }
    }
  }
  if (spec.hline) {
    min_y = std::min(min_y, *spec.hline);
    max_y = std::max(max_y, *spec.hline);
  }
  if (!any) {
    min_x = 0.0;
    max_x = 1.0;
  }
  if (max_x - min_x < 1e-12) max_x = min_x + 1.0;
  if (max_y - min_y < 1e-12) max_y = min_y + 1.0;

  auto px = [&](double vx) {
    if (spec.log_x) vx = std::log10(std::max(vx, 1e-300));
    return kLeft + (vx - min_x) / (max_x - min_x) * (kRight - kLeft);
  };
  auto py = [&](double vy) {
    return kBottom - (vy - min_y) / (max_y - min_y) * (kBottom - kTop);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
      << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double fx = min_x + (max_x - min_x) * t / 5.0;
    const double gx = kLeft + (kRight - kLeft) * t / 5.0;
    const double shown = spec.log_x ? std::pow(10.0, fx) : fx;
    out << "<line x1=\"" << gx << "\" y1=\"" << kBottom << "\" x2=\"" << gx
        << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << gx << "\" y=\"" << kBottom + 20
        << "\" font-size=\"11\" text-anchor=\"middle\">" << num(shown) << "</text>\n";
    const double fy = min_y + (max_y - min_y) * t / 5.0;
    const double gy = kBottom - (kBottom - kTop) * t / 5.0;
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << gy << "\" x2=\"" << kLeft
        << "\" y2=\"" << gy << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << gy + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 10
      << "\" font-size=\"13\" text-anchor=\"middle\">" << spec.x_label
      << (spec.log_x ? " (log scale)" : "") << "</text>\n";
  out << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (kTop + kBottom) / 2 << ")\">" << spec.y_label << "</text>\n";

  if (spec.hline) {
    const double gy = py(*spec.hline);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << gy << "\" x2=\"" << kRight
        << "\" y2=\"" << gy
        << "\" stroke=\"#555\" stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kRight - 4 << "\" y=\"" << gy - 5
        << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#555\">" << spec.hline_label
        << "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof(kColors) / sizeof(kColors[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (spec.log_x && series[s].x[i] <= 0.0) continue;
      out << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << kRight - 150 << "\" y1=\"" << ly << "\" x2=\"" << kRight - 130
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kRight - 125 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
        << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace alpc::svg
