// Copyright 2026 The LSI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsi::app {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string svg_scatter(const Eigen::MatrixXd& points, const std::vector<int>* labels, const std::string& title) {
  if (points.cols() != 2) throw std::invalid_argument("svg_scatter expects n x 2 points");
  const double size = 480.0, margin = 48.0;
  double lo_x = -1.0, hi_x = 1.0, lo_y = -1.0, hi_y = 1.0;
  if (points.rows() > 0) {
    lo_x = points.col(0).minCoeff();
    hi_x = points.col(0).maxCoeff();
    lo_y = points.col(1).minCoeff();
    hi_y = points.col(1).maxCoeff();
  }
  // Square, padded extent so both axes share a scale.
  const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
  const double half = 0.55 * std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  lo_x = cx - half;
  hi_x = cx + half;
  lo_y = cy - half;
  hi_y = cy + half;
  const double span = size - 2.0 * margin;
  auto px = [&](double x) { return margin + (x - lo_x) / (hi_x - lo_x) * span; };
  auto py = [&](double y) { return size - margin - (y - lo_y) / (hi_y - lo_y) * span; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << " " << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << escape(title) << "</text>\n";
  // axes with end ticks
  os << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << size - margin << "\" x2=\"" << size - margin << "\" y2=\""
     << size - margin << "\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << size - margin
     << "\"/>\n</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#444\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = lo_x + (hi_x - lo_x) * k / 4.0;
    const double fy = lo_y + (hi_y - lo_y) * k / 4.0;
    os << "<text x=\"" << num(px(fx)) << "\" y=\"" << size - margin + 14 << "\" text-anchor=\"middle\">" << num(fx)
       << "</text>\n";
    os << "<text x=\"" << margin - 4 << "\" y=\"" << num(py(fy) + 3) << "\" text-anchor=\"end\">" << num(fy)
       << "</text>\n";
  }
  os << "</g>\n<g fill-opacity=\"0.6\">\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int l = labels && static_cast<std::size_t>(i) < labels->size() ? (*labels)[static_cast<std::size_t>(i)] : 0;
    const char* colour = kPalette[static_cast<std::size_t>(std::max(l, 0)) % 10];
    os << "<circle cx=\"" << num(px(points(i, 0))) << "\" cy=\"" << num(py(points(i, 1))) << "\" r=\"1.6\" fill=\""
       << colour << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void write_svg_scatter(const std::filesystem::path& path, const Eigen::MatrixXd& points,
                       const std::vector<int>* labels, const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg_scatter(points, labels, title);
}

}  // namespace lsi::app
