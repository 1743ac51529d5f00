#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkm/errors.hpp"
#include "qkm/rng.hpp"

namespace qkm {

// n points in d dimensions, row-major; labels are optional bookkeeping for
// synthetic data (0 = minority cluster).
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> points;          // n * d
  std::vector<int> reference_labels;   // empty, or size n with values {0,1}
  std::string name;

  double at(std::size_t i, std::size_t j) const { return points[i * d + j]; }
  std::span<const double> row(std::size_t i) const {
    return {points.data() + i * d, d};
  }
};

struct DatasetStats {
  std::vector<double> mean;
  std::vector<double> dim_min;
  std::vector<double> dim_max;
  std::vector<double> dim_range;  // dim_max - dim_min
};

// Two isotropic Gaussian clusters with an uneven size ratio a:b; the minority
// cluster sits at the origin with label 0, the majority at
// (center_separation, 0, ..., 0) with label 1.
struct BlobSpec {
  std::size_t n_total = 750;
  std::size_t ratio_a = 1;
  std::size_t ratio_b = 2;
  std::size_t dims = 2;
  double cluster_std = 1.0;
  double center_separation = 6.0;
  std::uint64_t seed = 0;
};

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

inline Dataset generate_uneven_blobs(const BlobSpec& spec) {
  if (spec.n_total < 2) throw ConstructionError("blob n_total must be >= 2");
  if (spec.ratio_a < 1 || spec.ratio_b < 1)
    throw ConstructionError("blob ratio parts must be >= 1");
  if (spec.dims < 1) throw ConstructionError("blob dims must be >= 1");
  if (!(spec.cluster_std > 0.0))
    throw ConstructionError("blob cluster_std must be positive");
  if (!(spec.center_separation > 0.0))
    throw ConstructionError("blob center_separation must be positive");

  std::size_t lo = std::min(spec.ratio_a, spec.ratio_b);
  std::size_t minority_n = static_cast<std::size_t>(std::llround(
      static_cast<double>(spec.n_total) * static_cast<double>(lo) /
      static_cast<double>(spec.ratio_a + spec.ratio_b)));
  std::size_t majority_n = spec.n_total - minority_n;  // remainder to majority

  Dataset out;
  out.n = spec.n_total;
  out.d = spec.dims;
  out.points.resize(out.n * out.d);
  out.reference_labels.resize(out.n);
  out.name = "uneven-" + std::to_string(spec.ratio_a) + ":" +
             std::to_string(spec.ratio_b) + "-n" + std::to_string(spec.n_total);

  Rng rng(spec.seed);
  std::size_t row = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    std::size_t count = c == 0 ? minority_n : majority_n;
    double cx = c == 0 ? 0.0 : spec.center_separation;
    for (std::size_t i = 0; i < count; ++i, ++row) {
      out.reference_labels[row] = static_cast<int>(c);
      for (std::size_t j = 0; j < out.d; ++j) {
        double center = j == 0 ? cx : 0.0;
        out.points[row * out.d + j] = center + spec.cluster_std * normal01(rng);
      }
    }
  }
  return out;
}

inline DatasetStats compute_stats(const Dataset& data) {
  if (data.n < 1) throw ConstructionError("stats need at least one point");
  DatasetStats s;
  s.mean.assign(data.d, 0.0);
  s.dim_min.assign(data.d, std::numeric_limits<double>::infinity());
  s.dim_max.assign(data.d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.d; ++j) {
      double v = data.at(i, j);
      s.mean[j] += v;
      s.dim_min[j] = std::min(s.dim_min[j], v);
      s.dim_max[j] = std::max(s.dim_max[j], v);
    }
  }
  s.dim_range.resize(data.d);
  for (std::size_t j = 0; j < data.d; ++j) {
    s.mean[j] /= static_cast<double>(data.n);
    s.dim_range[j] = s.dim_max[j] - s.dim_min[j];
  }
  return s;
}

// Per-feature min-max scaling to [0,1]; constant features map to 0.
inline void minmax_normalize(Dataset& data) {
  DatasetStats s = compute_stats(data);
  for (std::size_t i = 0; i < data.n; ++i)
    for (std::size_t j = 0; j < data.d; ++j) {
      double& v = data.points[i * data.d + j];
      v = s.dim_range[j] > 0.0 ? (v - s.dim_min[j]) / s.dim_range[j] : 0.0;
    }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_cell(std::string_view cell, std::size_t row,
                         std::size_t col) {
  cell = trim(cell);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ParseError("cell '" + std::string(cell) + "' is not numeric", row,
                     col);
  if (!std::isfinite(v))
    throw ParseError("cell '" + std::string(cell) + "' is not finite", row,
                     col);
  return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// Shortest round-trip decimal rendering.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace detail

// Comma-separated numeric ingest; feature_columns selects 0-based columns
// (empty = all), has_header skips one physical line. Row/column numbers in
// errors are 1-based over the physical file.
inline Dataset load_csv(const std::string& path,
                        const std::vector<std::size_t>& feature_columns = {},
                        bool has_header = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
  Dataset out;
  out.name = path;
  std::string line;
  std::size_t physical_row = 0;
  std::size_t width = 0;  // columns in the file, fixed by the first data row
  while (std::getline(in, line)) {
    ++physical_row;
    if (has_header && physical_row == 1) continue;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_fields(line);
    if (width == 0) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw ParseError("ragged row: expected " + std::to_string(width) +
                           " columns, found " + std::to_string(fields.size()),
                       physical_row, std::min(fields.size(), width) + 1);
    }
    const std::vector<std::size_t>* cols = &feature_columns;
    std::vector<std::size_t> all;
    if (cols->empty()) {
      all.resize(width);
      for (std::size_t j = 0; j < width; ++j) all[j] = j;
      cols = &all;
    }
    if (out.d == 0) out.d = cols->size();
    for (std::size_t c : *cols) {
      if (c >= width)
        throw ParseError("selected column " + std::to_string(c) +
                             " out of range (file has " +
                             std::to_string(width) + " columns)",
                         physical_row, width + 1);
      out.points.push_back(detail::parse_cell(fields[c], physical_row, c + 1));
    }
    ++out.n;
  }
  if (out.n == 0) throw ParseError("no data rows in '" + path + "'", 0, 0);
  return out;
}

// Same dialect as load_csv; optional trailing integer label column.
inline void save_csv(const Dataset& data, const std::string& path,
                     bool with_labels = false) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'", 0, 0);
  bool labels = with_labels && data.reference_labels.size() == data.n;
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t j = 0; j < data.d; ++j) {
      if (j) out << ',';
      out << detail::format_double(data.at(i, j));
    }
    if (labels) out << ',' << data.reference_labels[i];
    out << '\n';
  }
  if (!out) throw ParseError("write failed for '" + path + "'", 0, 0);
}

}  // namespace qkm
