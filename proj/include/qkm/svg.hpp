#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qkm/coreset.hpp"
#include "qkm/dataset.hpp"
#include "qkm/errors.hpp"

namespace qkm {

// Static SVG renderers. Output is metadata-free so identical inputs yield
// byte-identical files.

namespace detail {

struct Frame {
  double x0, x1, y0, y1;        // data bounds
  double width, height, margin;  // pixel geometry

  double px(double x) const {
    double range = x1 - x0;
    double t = range > 0.0 ? (x - x0) / range : 0.5;
    return margin + t * (width - 2.0 * margin);
  }
  double py(double y) const {
    double range = y1 - y0;
    double t = range > 0.0 ? (y - y0) / range : 0.5;
    return height - margin - t * (height - 2.0 * margin);  // y grows upward
  }
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline void open_svg(std::ostringstream& out, double w, double h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h
      << "\">\n<rect width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";
}

inline std::string star_points(double cx, double cy, double r) {
  std::ostringstream pts;
  for (int i = 0; i < 10; ++i) {
    double radius = i % 2 ? r * 0.42 : r;
    double angle = -1.57079632679 + i * 0.62831853071;  // -pi/2 + i*pi/5
    if (i) pts << ' ';
    pts << num(cx + radius * std::cos(angle)) << ','
        << num(cy + radius * std::sin(angle));
  }
  return pts.str();
}

}  // namespace detail

// Scatter of the first two coordinates: small circles for data (colored by
// reference label when present), one star marker per coreset point.
inline std::string render_coreset_scatter(const Dataset& data,
                                          const Coreset& cs) {
  if (data.d < 1) throw std::invalid_argument("need at least one dimension");
  auto coord = [&](std::span<const double> row, std::size_t j) {
    return j < row.size() ? row[j] : 0.0;
  };
  detail::Frame f{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(),
                  640.0, 480.0, 32.0};
  for (std::size_t i = 0; i < data.n; ++i) {
    f.x0 = std::min(f.x0, coord(data.row(i), 0));
    f.x1 = std::max(f.x1, coord(data.row(i), 0));
    f.y0 = std::min(f.y0, coord(data.row(i), 1));
    f.y1 = std::max(f.y1, coord(data.row(i), 1));
  }
  std::ostringstream out;
  detail::open_svg(out, f.width, f.height);
  bool labeled = data.reference_labels.size() == data.n;
  for (std::size_t i = 0; i < data.n; ++i) {
    const char* fill =
        labeled && data.reference_labels[i] == 0 ? "#4477cc" : "#bbbbbb";
    out << "<circle cx=\"" << detail::num(f.px(coord(data.row(i), 0)))
        << "\" cy=\"" << detail::num(f.py(coord(data.row(i), 1)))
        << "\" r=\"2\" fill=\"" << fill << "\"/>\n";
  }
  for (const WeightedPoint& p : cs.points) {
    std::span<const double> pos(p.position.data(), p.position.size());
    out << "<polygon class=\"star\" points=\""
        << detail::star_points(f.px(coord(pos, 0)), f.py(coord(pos, 1)), 9.0)
        << "\" fill=\"#dd3311\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

struct TableRow {
  std::string config_id;
  double lambda = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

// One bar (plus std whisker) per table row.
inline std::string render_accuracy_bars(const std::vector<TableRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no rows");
  double width = std::max<double>(160.0, 60.0 + 90.0 * rows.size());
  double height = 360.0, base = height - 60.0, top = 30.0;
  std::ostringstream out;
  detail::open_svg(out, width, height);
  out << "<line x1=\"40\" y1=\"" << base << "\" x2=\"" << width - 20
      << "\" y2=\"" << base << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double cx = 60.0 + 90.0 * i + 30.0;
    double acc = std::clamp(rows[i].mean_accuracy, 0.0, 1.0);
    double h = acc * (base - top);
    out << "<rect class=\"bar\" x=\"" << detail::num(cx - 24) << "\" y=\""
        << detail::num(base - h) << "\" width=\"48\" height=\""
        << detail::num(h) << "\" fill=\"#6699dd\" stroke=\"black\"/>\n";
    double whisker = rows[i].std_accuracy * (base - top);
    if (whisker > 0.0) {
      double yt = base - std::min(h + whisker, base - top);
      double yb = base - std::max(h - whisker, 0.0);
      out << "<line x1=\"" << detail::num(cx) << "\" y1=\"" << detail::num(yt)
          << "\" x2=\"" << detail::num(cx) << "\" y2=\"" << detail::num(yb)
          << "\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << detail::num(cx) << "\" y=\"" << height - 40
        << "\" font-size=\"11\" text-anchor=\"middle\">" << rows[i].config_id
        << "</text>\n";
    out << "<text x=\"" << detail::num(cx) << "\" y=\""
        << detail::num(base - h - 6) << "\" font-size=\"11\" "
        << "text-anchor=\"middle\">" << detail::num(rows[i].mean_accuracy)
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

// Accuracy as a function of the noise parameter: sorted polyline plus points.
inline std::string render_noise_curve(std::vector<TableRow> rows) {
  if (rows.empty()) throw std::invalid_argument("no rows");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TableRow& a, const TableRow& b) {
                     return a.lambda < b.lambda;
                   });
  detail::Frame f{rows.front().lambda, rows.back().lambda, 0.4, 1.0,
                  520.0, 360.0, 48.0};
  if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
  std::ostringstream out;
  detail::open_svg(out, f.width, f.height);
  out << "<line x1=\"" << f.margin << "\" y1=\"" << f.height - f.margin
      << "\" x2=\"" << f.width - f.margin << "\" y2=\""
      << f.height - f.margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << f.margin << "\" y1=\"" << f.margin << "\" x2=\""
      << f.margin << "\" y2=\"" << f.height - f.margin
      << "\" stroke=\"black\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#cc5511\" stroke-width=\"2\" "
         "points=\"";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out << ' ';
    out << detail::num(f.px(rows[i].lambda)) << ','
        << detail::num(f.py(std::clamp(rows[i].mean_accuracy, f.y0, f.y1)));
  }
  out << "\"/>\n";
  for (const TableRow& r : rows) {
    out << "<circle cx=\"" << detail::num(f.px(r.lambda)) << "\" cy=\""
        << detail::num(f.py(std::clamp(r.mean_accuracy, f.y0, f.y1)))
        << "\" r=\"4\" fill=\"#cc5511\"/>\n"
        << "<text x=\"" << detail::num(f.px(r.lambda)) << "\" y=\""
        << f.height - f.margin + 16 << "\" font-size=\"11\" "
        << "text-anchor=\"middle\">" << detail::num(r.lambda) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace qkm
