#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qkm/coreset.hpp"
#include "qkm/dataset.hpp"
#include "qkm/errors.hpp"
#include "qkm/hamiltonian.hpp"
#include "qkm/optimize.hpp"
#include "qkm/quantum.hpp"
#include "qkm/rng.hpp"

namespace qkm {

struct CentroidPair {
  std::vector<double> mu_minus;  // bit 0 side
  std::vector<double> mu_plus;   // bit 1 side
};

struct LloydResult {
  std::vector<int> labels;
  CentroidPair centroids;
  double quantization_error = 0.0;
};

namespace detail {

// One seeded Lloyd run on weighted points (weights may be all 1). Seeding is
// k-means++-style: first center drawn by weight mass, second by weight times
// squared distance to the first.
inline LloydResult lloyd_once(const std::vector<double>& pts, std::size_t n,
                              std::size_t d, const std::vector<double>& w,
                              Rng& rng) {
  auto row = [&](std::size_t i) {
    return std::span<const double>(pts.data() + i * d, d);
  };
  double w_total = 0.0;
  for (double v : w) w_total += v;

  std::size_t c0 = sample_discrete(rng, w, w_total);
  std::vector<double> d2(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = w[i] * squared_distance(row(i), row(c0));
    total += d2[i];
  }
  std::size_t c1 = total > 0.0 ? sample_discrete(rng, d2, total)
                               : uniform_index(rng, n);

  std::vector<double> centers(2 * d);
  for (std::size_t j = 0; j < d; ++j) {
    centers[j] = pts[c0 * d + j];
    centers[d + j] = pts[c1 * d + j];
  }
  std::vector<int> labels(n, 0), prev(n, -1);
  for (int iter = 0; iter < 300; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double da = squared_distance(row(i), {centers.data(), d});
      double db = squared_distance(row(i), {centers.data() + d, d});
      labels[i] = da <= db ? 0 : 1;
    }
    if (labels == prev) break;
    prev = labels;
    double wa = 0.0, wb = 0.0;
    std::vector<double> sa(d, 0.0), sb(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double& wc = labels[i] == 0 ? wa : wb;
      std::vector<double>& sc = labels[i] == 0 ? sa : sb;
      wc += w[i];
      for (std::size_t j = 0; j < d; ++j) sc[j] += w[i] * pts[i * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      if (wa > 0.0) centers[j] = sa[j] / wa;
      if (wb > 0.0) centers[d + j] = sb[j] / wb;
    }
  }
  LloydResult out;
  out.labels = std::move(labels);
  out.centroids.mu_minus.assign(centers.begin(), centers.begin() + d);
  out.centroids.mu_plus.assign(centers.begin() + d, centers.end());
  for (std::size_t i = 0; i < n; ++i) {
    double da = squared_distance(row(i), {centers.data(), d});
    double db = squared_distance(row(i), {centers.data() + d, d});
    out.quantization_error += w[i] * std::min(da, db);
  }
  return out;
}

inline LloydResult lloyd_weighted(const std::vector<double>& pts, std::size_t n,
                                  std::size_t d, const std::vector<double>& w,
                                  std::size_t restarts, std::uint64_t seed) {
  if (n < 2) throw ConstructionError("need at least two points");
  if (restarts < 1) throw ConstructionError("need at least one restart");
  LloydResult best;
  bool have = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(seed + r);  // nested: best-of-k contains every best-of-(k-1) run
    LloydResult cur = lloyd_once(pts, n, d, w, rng);
    if (!have || cur.quantization_error < best.quantization_error) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

}  // namespace detail

// Classical 2-means on the full dataset: best of `restarts` seeded Lloyd runs
// by quantization error.
inline LloydResult lloyd_2means(const Dataset& data, std::size_t restarts,
                                std::uint64_t seed) {
  std::vector<double> w(data.n, 1.0);
  return detail::lloyd_weighted(data.points, data.n, data.d, w, restarts, seed);
}

// Weighted Lloyd over coreset points.
inline LloydResult lloyd_2means(const Coreset& cs, std::size_t restarts,
                                std::uint64_t seed) {
  std::size_t n = cs.size(), d = cs.dims();
  std::vector<double> pts(n * d), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = cs.points[i].weight;
    for (std::size_t j = 0; j < d; ++j) pts[i * d + j] = cs.points[i].position[j];
  }
  return detail::lloyd_weighted(pts, n, d, w, restarts, seed);
}

inline CentroidPair partition_to_centroids(const Coreset& cs,
                                           const PartitionBits& p) {
  std::size_t m = cs.size();
  if (p.size() != m)
    throw std::invalid_argument("partition length does not match coreset size");
  std::size_t d = cs.dims();
  double w_minus = 0.0, w_plus = 0.0;
  CentroidPair c;
  c.mu_minus.assign(d, 0.0);
  c.mu_plus.assign(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const WeightedPoint& pt = cs.points[i];
    double& w = p.bits[i] ? w_plus : w_minus;
    std::vector<double>& mu = p.bits[i] ? c.mu_plus : c.mu_minus;
    w += pt.weight;
    for (std::size_t j = 0; j < d; ++j) mu[j] += pt.weight * pt.position[j];
  }
  if (w_minus == 0.0 || w_plus == 0.0)
    throw DegeneratePartitionError("partition leaves one cluster empty");
  for (std::size_t j = 0; j < d; ++j) {
    c.mu_minus[j] /= w_minus;
    c.mu_plus[j] /= w_plus;
  }
  return c;
}

// Nearest-centroid labels over the full dataset; exact ties go to label 0.
inline std::vector<int> assign_labels(const Dataset& data,
                                      const CentroidPair& c) {
  if (c.mu_minus.size() != data.d)
    throw std::invalid_argument("centroid/data dimension mismatch");
  std::vector<int> labels(data.n);
  std::span<const double> a(c.mu_minus.data(), data.d);
  std::span<const double> b(c.mu_plus.data(), data.d);
  for (std::size_t i = 0; i < data.n; ++i)
    labels[i] =
        squared_distance(data.row(i), a) <= squared_distance(data.row(i), b)
            ? 0
            : 1;
  return labels;
}

// Agreement fraction maximized over the two cluster-label permutations;
// always in [0.5, 1].
inline double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("label vectors must have equal nonzero length");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i] != 0) == (b[i] != 0)) ++same;
  double frac = static_cast<double>(same) / static_cast<double>(a.size());
  return std::max(frac, 1.0 - frac);
}

enum class Solver { vqe, qaoa, brute_force, classical_on_coreset };

inline Solver parse_solver(const std::string& s) {
  if (s == "vqe") return Solver::vqe;
  if (s == "qaoa") return Solver::qaoa;
  if (s == "brute_force") return Solver::brute_force;
  if (s == "classical_on_coreset") return Solver::classical_on_coreset;
  throw std::invalid_argument("unknown solver '" + s + "'");
}

inline std::string solver_name(Solver s) {
  switch (s) {
    case Solver::vqe: return "vqe";
    case Solver::qaoa: return "qaoa";
    case Solver::brute_force: return "brute_force";
    default: return "classical_on_coreset";
  }
}

enum class CoresetMethod { contour, lightweight, d2_bfl_style, d2_oneshot_style, uniform };

inline CoresetMethod parse_coreset_method(const std::string& s) {
  if (s == "contour") return CoresetMethod::contour;
  if (s == "lightweight") return CoresetMethod::lightweight;
  if (s == "d2_bfl_style") return CoresetMethod::d2_bfl_style;
  if (s == "d2_oneshot_style") return CoresetMethod::d2_oneshot_style;
  if (s == "uniform") return CoresetMethod::uniform;
  throw std::invalid_argument("unknown coreset method '" + s + "'");
}

inline std::string coreset_method_name(CoresetMethod m) {
  switch (m) {
    case CoresetMethod::contour: return "contour";
    case CoresetMethod::lightweight: return "lightweight";
    case CoresetMethod::d2_bfl_style: return "d2_bfl_style";
    case CoresetMethod::d2_oneshot_style: return "d2_oneshot_style";
    default: return "uniform";
  }
}

struct ExperimentConfig {
  // dataset source: blob when set, otherwise a CSV path
  std::optional<BlobSpec> blob = BlobSpec{};
  std::string csv_path;
  std::vector<std::size_t> csv_columns;
  bool csv_has_header = false;
  bool normalize = false;

  CoresetMethod method = CoresetMethod::contour;
  std::size_t regions = 3;
  std::size_t m = 5;
  TaylorOrder order = TaylorOrder::first;
  Solver solver = Solver::vqe;
  std::size_t ansatz_reps = 2;
  Entanglement entanglement = Entanglement::linear;
  std::size_t qaoa_layers = 5;
  double lambda = 0.0;
  std::size_t shots = 0;  // 0 = exact distribution
  OptimizerSpec optimizer{};
  std::size_t ground_truth_restarts = 10;
  std::size_t repeats = 10;
  std::uint64_t master_seed = 12345;
  std::string name = "run";
};

struct RepeatRecord {
  std::uint64_t repeat_seed = 0;
  bool failed = false;
  double accuracy = 0.0;
  double solver_energy = 0.0;
  double ground_energy = 0.0;
  double ground_gap = 0.0;
  std::uint32_t partition = 0;  // basis index of the solver's partition
  double coreset_seconds = 0.0;
  double solve_seconds = 0.0;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<RepeatRecord> records;
  std::size_t failures = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_ground_gap = 0.0;
  double mean_coreset_seconds = 0.0;
  double mean_solve_seconds = 0.0;
};

namespace detail {

inline Coreset build_coreset_for(const Dataset& data,
                                 const ExperimentConfig& cfg,
                                 std::uint64_t seed) {
  switch (cfg.method) {
    case CoresetMethod::contour:
      return build_contour_coreset(data, cfg.regions, cfg.m);
    case CoresetMethod::lightweight:
      return build_lightweight_coreset(data, cfg.m, seed);
    case CoresetMethod::d2_bfl_style:
      return build_d2_coreset(data, cfg.m, seed, "d2_bfl_style");
    case CoresetMethod::d2_oneshot_style:
      return build_d2_coreset(data, cfg.m, seed, "d2_oneshot_style");
    default:
      return build_uniform_coreset(data, cfg.m, seed);
  }
}

struct SolveOutcome {
  PartitionBits partition;
  double solver_energy = 0.0;
  double ground_energy = 0.0;
  bool has_energy = false;
};

inline SolveOutcome solve_variational(const ExperimentConfig& cfg,
                                      const Coreset& cs, const ZPolynomial& h,
                                      std::uint64_t solver_seed,
                                      std::uint64_t shot_seed) {
  std::vector<double> diag = diagonal(h);
  NoiseSpec noise{cfg.lambda};
  bool qaoa = cfg.solver == Solver::qaoa;
  std::size_t m = cs.size();

  AnsatzSpec ansatz{m, cfg.ansatz_reps, cfg.entanglement};
  std::size_t dim = qaoa ? 2 * cfg.qaoa_layers : param_count(ansatz);

  auto state_for = [&](const std::vector<double>& params) {
    if (!qaoa) return prepare_ansatz_state(ansatz, params);
    std::vector<double> gammas(params.begin(),
                               params.begin() + cfg.qaoa_layers);
    std::vector<double> betas(params.begin() + cfg.qaoa_layers, params.end());
    return prepare_qaoa_state(h, gammas, betas);
  };
  Objective objective = [&](const std::vector<double>& params) {
    ProbDist probs = measure_probs(state_for(params));
    return expectation(apply_depolarizing(probs, noise), diag);
  };

  OptimizerSpec opt = cfg.optimizer;
  opt.seed = solver_seed;
  OptResult res = minimize(objective, dim, opt);

  ProbDist final_probs =
      apply_depolarizing(measure_probs(state_for(res.best_params)), noise);
  SolveOutcome out;
  if (cfg.shots > 0)
    out.partition =
        most_probable(sample_counts(final_probs, cfg.shots, shot_seed), m);
  else
    out.partition = most_probable(final_probs);
  out.solver_energy = res.best_value;
  out.ground_energy = brute_force_ground(h).energy;
  out.has_energy = true;
  return out;
}

}  // namespace detail

// Steps: dataset -> coreset -> Hamiltonian -> solver -> partition ->
// centroids -> full-data labels -> accuracy against full-data Lloyd labels.
// Repeat r draws its dataset from seed master_seed + r; solver failures on
// degenerate partitions are recorded, never retried.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (cfg.m > kMaxQubits)
    throw std::invalid_argument("coreset size exceeds 24 qubits");
  double lam_max = max_depolarizing_lambda(cfg.m);
  if (cfg.lambda < 0.0 || cfg.lambda > lam_max)
    throw std::invalid_argument("noise lambda out of range");

  RunResult result;
  result.config = cfg;

  Dataset csv_data;
  if (!cfg.blob) {
    csv_data = load_csv(cfg.csv_path, cfg.csv_columns, cfg.csv_has_header);
    if (cfg.normalize) minmax_normalize(csv_data);
  }

  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    std::uint64_t repeat_seed = cfg.master_seed + r;
    RepeatRecord rec;
    rec.repeat_seed = repeat_seed;

    Dataset blob_data;
    const Dataset* data = &csv_data;
    if (cfg.blob) {
      BlobSpec spec = *cfg.blob;
      spec.seed = repeat_seed;  // fresh dataset draw per repeat
      blob_data = generate_uneven_blobs(spec);
      if (cfg.normalize) minmax_normalize(blob_data);
      data = &blob_data;
    }

    LloydResult truth = lloyd_2means(*data, cfg.ground_truth_restarts,
                                     mix_seed(repeat_seed, stream::ground_truth));

    Coreset cs =
        detail::build_coreset_for(*data, cfg, mix_seed(repeat_seed, stream::coreset));
    rec.coreset_seconds = cs.construct_seconds;

    double solve_t0 = detail::now_seconds();
    try {
      CentroidPair centroids;
      if (cfg.solver == Solver::classical_on_coreset) {
        // The classical baseline mirrors the ground-truth procedure exactly
        // (same restart count and seed stream), so running it on the whole
        // dataset as its own coreset reproduces the reference labels.
        LloydResult local = lloyd_2means(cs, cfg.ground_truth_restarts,
                                         mix_seed(repeat_seed, stream::ground_truth));
        centroids = local.centroids;
        PartitionBits p;
        p.bits.resize(cs.size());
        for (std::size_t i = 0; i < cs.size(); ++i)
          p.bits[i] = static_cast<std::uint8_t>(local.labels[i]);
        rec.partition = p.to_index();
      } else {
        ZPolynomial h = build_hamiltonian(cs, cfg.order);
        detail::SolveOutcome sol;
        if (cfg.solver == Solver::brute_force) {
          GroundState g = brute_force_ground(h);
          sol = {g.partition, g.energy, g.energy, true};
        } else {
          sol = detail::solve_variational(cfg, cs, h,
                                          mix_seed(repeat_seed, stream::solver),
                                          mix_seed(repeat_seed, stream::shots));
        }
        rec.partition = sol.partition.to_index();
        rec.solver_energy = sol.solver_energy;
        rec.ground_energy = sol.ground_energy;
        rec.ground_gap = sol.solver_energy - sol.ground_energy;
        centroids = partition_to_centroids(cs, sol.partition);
      }
      std::vector<int> labels = assign_labels(*data, centroids);
      rec.accuracy = accuracy(labels, truth.labels);
    } catch (const DegeneratePartitionError&) {
      rec.failed = true;
      ++result.failures;
    }
    rec.solve_seconds = detail::now_seconds() - solve_t0;
    result.records.push_back(std::move(rec));
  }

  // Aggregates over successful repeats; identical values collapse to an
  // exact zero spread instead of accumulating rounding dust.
  std::vector<double> acc, gaps;
  for (const RepeatRecord& rec : result.records) {
    result.mean_coreset_seconds += rec.coreset_seconds;
    result.mean_solve_seconds += rec.solve_seconds;
    if (rec.failed) continue;
    acc.push_back(rec.accuracy);
    gaps.push_back(rec.ground_gap);
  }
  result.mean_coreset_seconds /= static_cast<double>(result.records.size());
  result.mean_solve_seconds /= static_cast<double>(result.records.size());
  if (!acc.empty()) {
    for (double a : acc) result.mean_accuracy += a;
    result.mean_accuracy /= static_cast<double>(acc.size());
    auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    if (*lo != *hi) {
      double ss = 0.0;
      for (double a : acc) {
        double t = a - result.mean_accuracy;
        ss += t * t;
      }
      result.std_accuracy = std::sqrt(ss / static_cast<double>(acc.size()));
    }
    for (double g : gaps) result.mean_ground_gap += g;
    result.mean_ground_gap /= static_cast<double>(gaps.size());
  } else {
    result.mean_accuracy = std::numeric_limits<double>::quiet_NaN();
    result.std_accuracy = std::numeric_limits<double>::quiet_NaN();
    result.mean_ground_gap = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

struct LegacyResult {
  double value = 0.0;
  std::size_t iterations = 0;
  bool biased = true;  // running-max protocol overestimates by construction
};

// Keep-the-best-accuracy loop: per-iteration seeds are exactly the repeat
// seeds of run_experiment, the running maximum is returned, and the loop
// stops as soon as it reaches `threshold` (or after max_iter iterations).
// Failed iterations contribute nothing to the maximum.
inline LegacyResult legacy_best_of_n_accuracy(const ExperimentConfig& cfg,
                                              double threshold,
                                              std::size_t max_iter) {
  if (threshold < 0.0)
    throw std::invalid_argument("threshold must be non-negative");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  LegacyResult out;
  ExperimentConfig single = cfg;
  single.repeats = 1;
  for (std::size_t i = 0; i < max_iter; ++i) {
    single.master_seed = cfg.master_seed + i;
    RunResult rr = run_experiment(single);
    ++out.iterations;
    if (rr.failures == 0) out.value = std::max(out.value, rr.mean_accuracy);
    if (out.value >= threshold) break;
  }
  return out;
}

}  // namespace qkm
