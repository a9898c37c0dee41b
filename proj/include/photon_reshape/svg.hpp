#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photon_reshape/io.hpp"

namespace photon_reshape {

/// Minimal SVG emitters for quick visual checks; no plotting dependency.
namespace svg {

inline std::string rgb(double t) {
  // dark blue -> cyan -> yellow ramp
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(255.0 * std::clamp(2.0 * t - 1.0, 0.0, 1.0));
  const int g = static_cast<int>(255.0 * std::clamp(2.0 * t - 0.25, 0.0, 1.0));
  const int b = static_cast<int>(255.0 * std::clamp(1.2 - 1.5 * t, 0.0, 1.0));
  return "rgb(" + std::to_string(r) + "," + std::to_string(g) + "," +
         std::to_string(b) + ")";
}

/// Heatmap of a matrix, downsampled to at most max_cells per side.
inline void heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                    const std::string& title, int max_cells = 256) {
  const int rows = static_cast<int>(values.rows());
  const int cols = static_cast<int>(values.cols());
  const int step_r = std::max(1, rows / max_cells);
  const int step_c = std::max(1, cols / max_cells);
  const int nr = (rows + step_r - 1) / step_r;
  const int nc = (cols + step_c - 1) / step_c;
  const double vmax = std::max(values.maxCoeff(), 1e-300);

  const int cell = 3;
  const int margin = 24;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(nc * cell + 2 * margin) + "\" height=\"" +
         std::to_string(nr * cell + 2 * margin) + "\">\n";
  out += "<text x=\"" + std::to_string(margin) + "\" y=\"16\" font-size=\"12\">" +
         title + "</text>\n";
  for (int bi = 0; bi < nr; ++bi) {
    for (int bj = 0; bj < nc; ++bj) {
      double acc = 0.0;
      int count = 0;
      for (int i = bi * step_r; i < std::min(rows, (bi + 1) * step_r); ++i)
        for (int j = bj * step_c; j < std::min(cols, (bj + 1) * step_c); ++j) {
          acc += values(i, j);
          ++count;
        }
      const double t = (count > 0) ? acc / (count * vmax) : 0.0;
      // row 0 at the bottom: frequency axes read upward
      const int y = margin + (nr - 1 - bi) * cell;
      const int x = margin + bj * cell;
      out += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"3\" height=\"3\" fill=\"" + rgb(t) + "\"/>\n";
    }
  }
  out += "</svg>\n";
  write_text_file(path, out);
}

/// Polyline plot of one or more series sharing an x axis.
inline void lines(const std::filesystem::path& path, const Eigen::ArrayXd& x,
                  const std::vector<std::pair<std::string, Eigen::ArrayXd>>& series,
                  const std::string& title) {
  const int width = 640, height = 360, margin = 40;
  double ymin = 1e300, ymax = -1e300;
  for (const auto& [name, y] : series) {
    ymin = std::min(ymin, y.minCoeff());
    ymax = std::max(ymax, y.maxCoeff());
  }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double xmin = x.minCoeff(), xmax = x.maxCoeff();

  auto px = [&](double v) {
    return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin);
  };
  auto py = [&](double v) {
    return height - margin - (v - ymin) / (ymax - ymin) * (height - 2 * margin);
  };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  out += "<text x=\"40\" y=\"20\" font-size=\"12\">" + title + "</text>\n";
  out += "<rect x=\"" + std::to_string(margin) + "\" y=\"" + std::to_string(margin) +
         "\" width=\"" + std::to_string(width - 2 * margin) + "\" height=\"" +
         std::to_string(height - 2 * margin) +
         "\" fill=\"none\" stroke=\"#999\"/>\n";
  int idx = 0;
  for (const auto& [name, y] : series) {
    std::string pts;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      pts += format_double(px(x[i])) + "," + format_double(py(y[i])) + " ";
    const char* color = colors[idx % 4];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    out += "<text x=\"" + std::to_string(width - margin - 150) + "\" y=\"" +
           std::to_string(margin + 16 + 14 * idx) + "\" font-size=\"11\" fill=\"" +
           color + "\">" + name + "</text>\n";
    ++idx;
  }
  out += "</svg>\n";
  write_text_file(path, out);
}

}  // namespace svg
}  // namespace photon_reshape
