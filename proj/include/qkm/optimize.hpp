#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "qkm/errors.hpp"
#include "qkm/rng.hpp"

namespace qkm {

enum class OptimizerKind { evolution_strategy, simplex };

inline OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "evolution_strategy") return OptimizerKind::evolution_strategy;
  if (s == "simplex") return OptimizerKind::simplex;
  throw std::invalid_argument("unknown optimizer kind '" + s + "'");
}

inline std::string optimizer_kind_name(OptimizerKind k) {
  return k == OptimizerKind::evolution_strategy ? "evolution_strategy"
                                                : "simplex";
}

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::evolution_strategy;
  std::size_t max_evals = 2000;
  std::size_t population = 20;  // evolution strategy only
  std::uint64_t seed = 0;
  double lower = -2.0 * 3.14159265358979323846;
  double upper = 2.0 * 3.14159265358979323846;
  // A full generation (or simplex spread) improving the best value by less
  // than this stops early; 0 disables early stopping.
  double tolerance = 0.0;
};

struct OptResult {
  std::vector<double> best_params;
  double best_value = 0.0;
  std::size_t evals_used = 0;
  std::vector<std::pair<std::size_t, double>> trace;  // (eval index, value)
};

struct OptimizationError : std::runtime_error {
  std::vector<double> params;
  OptimizationError(const std::string& msg, std::vector<double> p)
      : std::runtime_error(msg), params(std::move(p)) {}
};

using Objective = std::function<double(const std::vector<double>&)>;

namespace detail {

struct Evaluator {
  const Objective& objective;
  const OptimizerSpec& spec;
  OptResult result;

  explicit Evaluator(const Objective& obj, const OptimizerSpec& s)
      : objective(obj), spec(s) {
    result.best_value = std::numeric_limits<double>::infinity();
  }
  bool exhausted() const { return result.evals_used >= spec.max_evals; }
  double operator()(const std::vector<double>& x) {
    double v = objective(x);
    if (!std::isfinite(v))
      throw OptimizationError("objective returned a non-finite value", x);
    result.trace.emplace_back(result.evals_used, v);
    ++result.evals_used;
    if (v < result.best_value) {
      result.best_value = v;
      result.best_params = x;
    }
    return v;
  }
};

// Unconstrained (mu, lambda) evolution strategy with log-normal step-size
// self-adaptation (the standard mutation-scaling schedule of the stochastic-
// ranking ES family; without constraints its ranking is plain objective
// order). Comma selection with the best-ever point tracked separately.
inline void run_evolution_strategy(Evaluator& ev, std::size_t dim) {
  const OptimizerSpec& spec = ev.spec;
  std::size_t lambda = std::max<std::size_t>(spec.population, 4);
  std::size_t mu = std::max<std::size_t>(lambda / 4, 1);
  Rng rng(spec.seed);
  double width = spec.upper - spec.lower;
  double tau_global = 1.0 / std::sqrt(2.0 * static_cast<double>(dim));
  double tau_coord = 1.0 / std::sqrt(2.0 * std::sqrt(static_cast<double>(dim)));
  double sigma_min = 1e-8 * width;

  struct Individual {
    std::vector<double> x, sigma;
    double value = 0.0;
  };
  std::vector<Individual> pop(lambda);
  for (Individual& ind : pop) {
    ind.x.resize(dim);
    ind.sigma.assign(dim, 0.15 * width);
    for (double& xi : ind.x) xi = uniform_in(rng, spec.lower, spec.upper);
  }

  bool first_generation = true;
  while (!ev.exhausted()) {
    double best_before = ev.result.best_value;
    std::size_t evaluated = 0;
    for (Individual& ind : pop) {
      if (ev.exhausted()) break;
      ind.value = ev(ind.x);
      ++evaluated;
    }
    if (evaluated == 0) break;
    if (!first_generation && spec.tolerance > 0.0 &&
        best_before - ev.result.best_value < spec.tolerance)
      break;
    first_generation = false;
    if (ev.exhausted()) break;

    std::vector<std::size_t> order(evaluated);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pop[a].value < pop[b].value;
    });
    std::size_t parents = std::min(mu, evaluated);
    std::vector<Individual> next(lambda);
    for (std::size_t c = 0; c < lambda; ++c) {
      const Individual& parent = pop[order[c % parents]];
      Individual child;
      child.x.resize(dim);
      child.sigma.resize(dim);
      double g = normal01(rng);
      for (std::size_t k = 0; k < dim; ++k) {
        child.sigma[k] = parent.sigma[k] *
                         std::exp(tau_global * g + tau_coord * normal01(rng));
        child.sigma[k] = std::clamp(child.sigma[k], sigma_min, width);
        child.x[k] = std::clamp(parent.x[k] + child.sigma[k] * normal01(rng),
                                spec.lower, spec.upper);
      }
      next[c] = std::move(child);
    }
    pop = std::move(next);
  }
}

// Nelder-Mead simplex with reflection/expansion/contraction/shrink, started
// at the zero vector with unit-offset vertices; every candidate is clamped to
// the bounds before evaluation.
inline void run_simplex(Evaluator& ev, std::size_t dim) {
  const OptimizerSpec& spec = ev.spec;
  auto clamp_vec = [&](std::vector<double> x) {
    for (double& v : x) v = std::clamp(v, spec.lower, spec.upper);
    return x;
  };
  struct Vertex {
    std::vector<double> x;
    double value = 0.0;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  {
    Vertex v0{clamp_vec(std::vector<double>(dim, 0.0)), 0.0};
    if (ev.exhausted()) return;
    v0.value = ev(v0.x);
    simplex.push_back(std::move(v0));
  }
  for (std::size_t k = 0; k < dim && !ev.exhausted(); ++k) {
    Vertex v{simplex[0].x, 0.0};
    v.x[k] += 1.0;
    v.x = clamp_vec(std::move(v.x));
    v.value = ev(v.x);
    simplex.push_back(std::move(v));
  }
  if (simplex.size() < dim + 1) return;  // budget ran out mid-setup

  auto by_value = [](const Vertex& a, const Vertex& b) {
    return a.value < b.value;
  };
  while (!ev.exhausted()) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    if (spec.tolerance > 0.0 &&
        simplex.back().value - simplex.front().value < spec.tolerance)
      break;
    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i].x[k];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);
    Vertex& worst = simplex.back();

    auto blend = [&](double t) {
      std::vector<double> x(dim);
      for (std::size_t k = 0; k < dim; ++k)
        x[k] = centroid[k] + t * (centroid[k] - worst.x[k]);
      return clamp_vec(std::move(x));
    };

    std::vector<double> xr = blend(1.0);
    double fr = ev(xr);
    if (fr < simplex.front().value) {
      if (ev.exhausted()) break;
      std::vector<double> xe = blend(2.0);
      double fe = ev(xe);
      if (fe < fr) {
        worst = {std::move(xe), fe};
      } else {
        worst = {std::move(xr), fr};
      }
    } else if (fr < simplex[dim - 1].value) {
      worst = {std::move(xr), fr};
    } else {
      if (ev.exhausted()) break;
      bool outside = fr < worst.value;
      std::vector<double> xc = blend(outside ? 0.5 : -0.5);
      double fc = ev(xc);
      if (fc < std::min(fr, worst.value)) {
        worst = {std::move(xc), fc};
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 1; i < simplex.size() && !ev.exhausted(); ++i) {
          for (std::size_t k = 0; k < dim; ++k)
            simplex[i].x[k] =
                0.5 * (simplex[i].x[k] + simplex.front().x[k]);
          simplex[i].x = clamp_vec(std::move(simplex[i].x));
          simplex[i].value = ev(simplex[i].x);
        }
      }
    }
  }
}

}  // namespace detail

inline OptResult minimize(const Objective& objective, std::size_t dim,
                          const OptimizerSpec& spec) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (spec.max_evals < 1) throw std::invalid_argument("max_evals must be >= 1");
  if (!(spec.upper > spec.lower))
    throw std::invalid_argument("empty parameter bounds");
  detail::Evaluator ev(objective, spec);
  if (spec.kind == OptimizerKind::evolution_strategy)
    detail::run_evolution_strategy(ev, dim);
  else
    detail::run_simplex(ev, dim);
  return std::move(ev.result);
}

// Best-so-far values after the given evaluation counts, from one seeded run.
inline std::vector<double> evaluate_budget_curve(
    const Objective& objective, std::size_t dim, const OptimizerSpec& spec,
    const std::vector<std::size_t>& checkpoints) {
  OptResult res = minimize(objective, dim, spec);
  std::vector<double> curve;
  curve.reserve(checkpoints.size());
  for (std::size_t budget : checkpoints) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [idx, value] : res.trace) {
      if (idx >= budget) break;
      best = std::min(best, value);
    }
    curve.push_back(best);
  }
  return curve;
}

}  // namespace qkm
