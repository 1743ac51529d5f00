#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qkm/dataset.hpp"
#include "qkm/errors.hpp"
#include "qkm/rng.hpp"

namespace qkm {

struct WeightedPoint {
  std::vector<double> position;
  double weight = 0.0;
  std::size_t source_index = 0;
};

struct Coreset {
  std::vector<WeightedPoint> points;
  std::string method;  // contour | lightweight | d2_bfl_style | d2_oneshot_style | uniform
  double construct_seconds = 0.0;

  std::size_t size() const { return points.size(); }
  std::size_t dims() const { return points.empty() ? 0 : points[0].position.size(); }
};

// Nested axis-aligned boxes around the data mean; region r is the smallest
// shell whose per-dimension half-width radii*(r+1) contains the point.
struct RegionAssignment {
  std::vector<double> center;        // data mean
  std::vector<double> region_radii;  // per-dimension half-width of one shell
  std::vector<std::size_t> region_of;
  std::size_t k = 0;
};

struct RegionPlan {
  std::size_t threshold = 0;
  std::vector<std::size_t> counts;  // coreset points planned per region
};

inline RegionAssignment sort_data_in_regions(const Dataset& data,
                                             std::size_t k) {
  if (k < 1) throw ConstructionError("region count must be >= 1");
  if (data.n < 1) throw ConstructionError("need at least one point");
  DatasetStats stats = compute_stats(data);
  RegionAssignment out;
  out.k = k;
  out.center = stats.mean;
  out.region_radii.resize(data.d);
  for (std::size_t j = 0; j < data.d; ++j)
    out.region_radii[j] = stats.dim_range[j] / static_cast<double>(k) / 2.0;
  out.region_of.resize(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    std::size_t region = k - 1;  // fallback: outside every box
    for (std::size_t r = 0; r < k; ++r) {
      bool inside = true;
      for (std::size_t j = 0; j < data.d; ++j) {
        double half = out.region_radii[j] * static_cast<double>(r + 1);
        if (std::abs(data.at(i, j) - out.center[j]) > half) {
          inside = false;
          break;
        }
      }
      if (inside) {
        region = r;
        break;
      }
    }
    out.region_of[i] = region;
  }
  return out;
}

// Round-robin allotment of m coreset points over eligible regions, one per
// region per round, outermost region first. A region is eligible when it
// holds at least max(floor(n/(k*m)), 1) data points, and never receives more
// coreset points than it has data points.
inline RegionPlan plan_region_counts(const RegionAssignment& regions,
                                     std::size_t m) {
  if (m < 1) throw ConstructionError("coreset size must be >= 1");
  std::size_t n = regions.region_of.size();
  std::size_t k = regions.k;
  std::vector<std::size_t> data_count(k, 0);
  for (std::size_t r : regions.region_of) ++data_count[r];

  RegionPlan plan;
  plan.threshold = n / (k * m);
  plan.counts.assign(k, 0);
  std::size_t floor_count = std::max<std::size_t>(plan.threshold, 1);

  std::vector<std::size_t> eligible;  // outermost first
  for (std::size_t r = k; r-- > 0;)
    if (data_count[r] >= floor_count) eligible.push_back(r);
  if (eligible.empty()) throw ConstructionError("no eligible region");

  std::size_t assigned = 0;
  while (assigned < m) {
    std::size_t before = assigned;
    for (std::size_t r : eligible) {
      if (assigned == m) break;
      if (plan.counts[r] < data_count[r]) {
        ++plan.counts[r];
        ++assigned;
      }
    }
    if (assigned == before)
      throw InternalError("region capacity exhausted before m points planned");
  }
  return plan;
}

// Index of the first coreset point: nearest point to the mean inside the
// innermost region that was planned any points; ties to the lowest index.
inline std::size_t first_contour_point(const Dataset& data,
                                       const RegionAssignment& regions,
                                       const RegionPlan& plan) {
  std::size_t target = regions.k;
  for (std::size_t r = 0; r < regions.k; ++r)
    if (plan.counts[r] > 0) {
      target = r;
      break;
    }
  if (target == regions.k) throw ConstructionError("empty region plan");
  std::size_t best = data.n;
  double best_d2 = std::numeric_limits<double>::infinity();
  std::span<const double> center(regions.center.data(), data.d);
  for (std::size_t i = 0; i < data.n; ++i) {
    if (regions.region_of[i] != target) continue;
    double d2 = squared_distance(data.row(i), center);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if (best == data.n) throw InternalError("planned region has no data points");
  return best;
}

// Sampling distribution mixing a uniform floor with distance-to-mean mass:
// q(x) = 1/(2n) + ||x - mean||^2 / (2 * sum ||x' - mean||^2).
inline std::vector<double> lightweight_distribution(const Dataset& data) {
  if (data.n < 2) throw ConstructionError("need at least two points");
  DatasetStats stats = compute_stats(data);
  std::span<const double> mean(stats.mean.data(), data.d);
  std::vector<double> d2(data.n);
  double total = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    d2[i] = squared_distance(data.row(i), mean);
    total += d2[i];
  }
  std::vector<double> q(data.n);
  double inv_n = 1.0 / static_cast<double>(data.n);
  for (std::size_t i = 0; i < data.n; ++i)
    q[i] = total > 0.0 ? 0.5 * inv_n + 0.5 * d2[i] / total : inv_n;
  return q;
}

inline double lightweight_weight(double q_x, std::size_t m) {
  if (!(q_x > 0.0)) throw ConstructionError("sampling probability must be > 0");
  return 1.0 / (static_cast<double>(m) * q_x);
}

namespace detail {

inline WeightedPoint make_point(const Dataset& data, std::size_t i,
                                double weight) {
  WeightedPoint p;
  p.position.assign(data.row(i).begin(), data.row(i).end());
  p.weight = weight;
  p.source_index = i;
  return p;
}

inline double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace detail

// Deterministic construction: threshold-gated region plan, first point nearest
// the mean, then farthest-point plotting inside each planned region from the
// innermost outward. Entering a region restarts the reference set at the last
// plotted point, so each region is spread relative to where the trace left
// off rather than against every earlier point.
inline Coreset build_contour_coreset(const Dataset& data, std::size_t k,
                                     std::size_t m) {
  if (m < 2) throw ConstructionError("coreset size must be >= 2");
  if (m > data.n)
    throw ConstructionError("coreset size exceeds dataset size");
  double t0 = detail::now_seconds();

  RegionAssignment regions = sort_data_in_regions(data, k);
  RegionPlan plan = plan_region_counts(regions, m);
  std::size_t first = first_contour_point(data, regions, plan);

  std::vector<std::size_t> chosen;
  chosen.reserve(m);
  chosen.push_back(first);
  std::vector<char> taken(data.n, 0);
  taken[first] = 1;

  for (std::size_t r = 0; r < regions.k; ++r) {
    std::size_t want = plan.counts[r];
    if (want == 0) continue;
    std::vector<std::size_t> reference{chosen.back()};
    std::size_t have = regions.region_of[first] == r ? 1 : 0;
    for (; have < want; ++have) {
      std::size_t best = data.n;
      double best_d2 = -1.0;
      for (std::size_t i = 0; i < data.n; ++i) {
        if (taken[i] || regions.region_of[i] != r) continue;
        double d2 = std::numeric_limits<double>::infinity();
        for (std::size_t ref : reference)
          d2 = std::min(d2, squared_distance(data.row(i), data.row(ref)));
        if (d2 > best_d2) {
          best_d2 = d2;
          best = i;
        }
      }
      if (best == data.n)
        throw InternalError("region ran out of points during plotting");
      taken[best] = 1;
      chosen.push_back(best);
      reference.push_back(best);
    }
  }

  std::vector<double> q = lightweight_distribution(data);
  Coreset cs;
  cs.method = "contour";
  cs.points.reserve(m);
  for (std::size_t i : chosen)
    cs.points.push_back(detail::make_point(data, i, lightweight_weight(q[i], m)));
  cs.construct_seconds = detail::now_seconds() - t0;
  return cs;
}

// m independent draws from the lightweight distribution (with replacement),
// importance weights 1/(m*q).
inline Coreset build_lightweight_coreset(const Dataset& data, std::size_t m,
                                         std::uint64_t seed) {
  if (m < 2) throw ConstructionError("coreset size must be >= 2");
  if (m > data.n)
    throw ConstructionError("coreset size exceeds dataset size");
  double t0 = detail::now_seconds();
  std::vector<double> q = lightweight_distribution(data);
  Rng rng(seed);
  Coreset cs;
  cs.method = "lightweight";
  cs.points.reserve(m);
  for (std::size_t draw = 0; draw < m; ++draw) {
    std::size_t i = sample_discrete(rng, q, 1.0);
    cs.points.push_back(detail::make_point(data, i, lightweight_weight(q[i], m)));
  }
  cs.construct_seconds = detail::now_seconds() - t0;
  return cs;
}

// Sensitivity-style importance sampling: seeded k-means++ picks m provisional
// centers, the sensitivity proxy mixes normalized D^2 mass with a uniform
// floor, and m points are drawn from it with weights 1/(m*s). The variant
// string only tags the method field.
inline Coreset build_d2_coreset(const Dataset& data, std::size_t m,
                                std::uint64_t seed,
                                const std::string& variant = "d2_bfl_style") {
  if (m < 2) throw ConstructionError("coreset size must be >= 2");
  if (m > data.n)
    throw ConstructionError("coreset size exceeds dataset size");
  double t0 = detail::now_seconds();
  Rng rng(seed);

  std::vector<double> d2(data.n, std::numeric_limits<double>::infinity());
  std::size_t center = uniform_index(rng, data.n);
  for (std::size_t c = 0;;) {
    for (std::size_t i = 0; i < data.n; ++i)
      d2[i] = std::min(d2[i], squared_distance(data.row(i), data.row(center)));
    if (++c == m) break;
    double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    center = total > 0.0 ? sample_discrete(rng, d2, total)
                         : uniform_index(rng, data.n);
  }

  double total = std::accumulate(d2.begin(), d2.end(), 0.0);
  double inv_n = 1.0 / static_cast<double>(data.n);
  std::vector<double> s(data.n);
  for (std::size_t i = 0; i < data.n; ++i)
    s[i] = total > 0.0 ? 0.5 * d2[i] / total + 0.5 * inv_n : inv_n;

  Coreset cs;
  cs.method = variant;
  cs.points.reserve(m);
  for (std::size_t draw = 0; draw < m; ++draw) {
    std::size_t i = sample_discrete(rng, s, 1.0);
    cs.points.push_back(detail::make_point(
        data, i, 1.0 / (static_cast<double>(m) * s[i])));
  }
  cs.construct_seconds = detail::now_seconds() - t0;
  return cs;
}

// Uniform sampling without replacement; every weight is n/m.
inline Coreset build_uniform_coreset(const Dataset& data, std::size_t m,
                                     std::uint64_t seed) {
  if (m < 2) throw ConstructionError("coreset size must be >= 2");
  if (m > data.n)
    throw ConstructionError("coreset size exceeds dataset size");
  double t0 = detail::now_seconds();
  Rng rng(seed);
  std::vector<std::size_t> idx(data.n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t j = i + uniform_index(rng, data.n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  double w = static_cast<double>(data.n) / static_cast<double>(m);
  Coreset cs;
  cs.method = "uniform";
  cs.points.reserve(m);
  for (std::size_t i : idx) cs.points.push_back(detail::make_point(data, i, w));
  cs.construct_seconds = detail::now_seconds() - t0;
  return cs;
}

// Empirical quality: relative disagreement between the coreset's weighted
// quantization error and the full dataset's, over random 2-center queries
// drawn from the data bounding box.
struct RelativeErrorSummary {
  double mean = 0.0;
  double max = 0.0;
  std::size_t used_trials = 0;
  std::size_t skipped_trials = 0;
};

inline RelativeErrorSummary coreset_relative_error(const Dataset& data,
                                                   const Coreset& cs,
                                                   std::size_t trials,
                                                   std::uint64_t seed) {
  if (trials < 1) throw ConstructionError("need at least one trial");
  DatasetStats stats = compute_stats(data);
  Rng rng(seed);
  RelativeErrorSummary out;
  std::vector<double> q0(data.d), q1(data.d);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t j = 0; j < data.d; ++j) {
      q0[j] = uniform_in(rng, stats.dim_min[j], stats.dim_max[j]);
      q1[j] = uniform_in(rng, stats.dim_min[j], stats.dim_max[j]);
    }
    std::span<const double> a(q0.data(), data.d), b(q1.data(), data.d);
    double phi_data = 0.0;
    for (std::size_t i = 0; i < data.n; ++i)
      phi_data += std::min(squared_distance(data.row(i), a),
                           squared_distance(data.row(i), b));
    double phi_cs = 0.0;
    for (const WeightedPoint& p : cs.points) {
      std::span<const double> x(p.position.data(), p.position.size());
      phi_cs += p.weight *
                std::min(squared_distance(x, a), squared_distance(x, b));
    }
    if (phi_data == 0.0) {
      ++out.skipped_trials;
      continue;
    }
    double rel = std::abs(phi_data - phi_cs) / phi_data;
    out.mean += rel;
    out.max = std::max(out.max, rel);
    ++out.used_trials;
  }
  if (out.used_trials > 0) out.mean /= static_cast<double>(out.used_trials);
  return out;
}

}  // namespace qkm
