#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qkm/errors.hpp"
#include "qkm/hamiltonian.hpp"
#include "qkm/rng.hpp"

namespace qkm {

enum class Entanglement { linear, full, circular, pairwise, sca };

inline Entanglement parse_entanglement(const std::string& s) {
  if (s == "linear") return Entanglement::linear;
  if (s == "full") return Entanglement::full;
  if (s == "circular") return Entanglement::circular;
  if (s == "pairwise") return Entanglement::pairwise;
  if (s == "sca") return Entanglement::sca;
  throw std::invalid_argument("unknown entanglement strategy '" + s + "'");
}

inline std::string entanglement_name(Entanglement e) {
  switch (e) {
    case Entanglement::linear: return "linear";
    case Entanglement::full: return "full";
    case Entanglement::circular: return "circular";
    case Entanglement::pairwise: return "pairwise";
    default: return "sca";
  }
}

// Two-local circuit shape: R repetitions of (rotation layer, entanglement
// layer) plus a final rotation layer; one parameter per qubit per rotation
// layer, laid out layer-major.
struct AnsatzSpec {
  std::size_t num_qubits = 5;
  std::size_t reps = 2;
  Entanglement entanglement = Entanglement::linear;
};

struct QaoaSpec {
  std::size_t num_qubits = 5;
  std::size_t layers = 5;
};

struct StateVector {
  std::size_t num_qubits = 0;
  std::vector<std::complex<double>> amp;
};

struct ProbDist {
  std::size_t num_qubits = 0;
  std::vector<double> probs;
};

// Depolarizing parameter; valid up to 4^n/(4^n - 1), slightly above 1.
struct NoiseSpec {
  double lambda = 0.0;
};

inline std::size_t param_count(const AnsatzSpec& spec) {
  return (spec.reps + 1) * spec.num_qubits;
}

namespace detail {

inline void check_capacity(std::size_t m) {
  if (m < 1) throw std::invalid_argument("need at least one qubit");
  if (m > kMaxQubits) throw ConstructionError("state capped at 24 qubits");
}

// Y-rotation on one qubit: [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
inline void apply_ry(StateVector& s, std::size_t qubit, double theta) {
  double c = std::cos(theta / 2.0), sn = std::sin(theta / 2.0);
  std::size_t step = std::size_t{1} << qubit;
  std::size_t dim = s.amp.size();
  for (std::size_t base = 0; base < dim; base += 2 * step)
    for (std::size_t off = 0; off < step; ++off) {
      std::complex<double>& a0 = s.amp[base + off];
      std::complex<double>& a1 = s.amp[base + off + step];
      std::complex<double> n0 = c * a0 - sn * a1;
      std::complex<double> n1 = sn * a0 + c * a1;
      a0 = n0;
      a1 = n1;
    }
}

// X-rotation by angle phi: [[cos phi/2, -i sin phi/2], [-i sin phi/2, cos phi/2]].
inline void apply_rx(StateVector& s, std::size_t qubit, double phi) {
  double c = std::cos(phi / 2.0);
  std::complex<double> isn(0.0, -std::sin(phi / 2.0));
  std::size_t step = std::size_t{1} << qubit;
  std::size_t dim = s.amp.size();
  for (std::size_t base = 0; base < dim; base += 2 * step)
    for (std::size_t off = 0; off < step; ++off) {
      std::complex<double>& a0 = s.amp[base + off];
      std::complex<double>& a1 = s.amp[base + off + step];
      std::complex<double> n0 = c * a0 + isn * a1;
      std::complex<double> n1 = isn * a0 + c * a1;
      a0 = n0;
      a1 = n1;
    }
}

inline void apply_cx(StateVector& s, std::size_t control, std::size_t target) {
  std::size_t cbit = std::size_t{1} << control;
  std::size_t tbit = std::size_t{1} << target;
  std::size_t dim = s.amp.size();
  for (std::size_t b = 0; b < dim; ++b)
    if ((b & cbit) && !(b & tbit)) std::swap(s.amp[b], s.amp[b | tbit]);
}

// Control/target pairs for one entanglement layer. rep selects the variant
// for the shifted-circular-alternating strategy: the circular pair list is
// rotated left by the repetition index and control/target swap on odd
// repetitions; the other strategies ignore rep.
inline std::vector<std::pair<std::size_t, std::size_t>> entangler_pairs(
    const AnsatzSpec& spec, std::size_t rep) {
  std::size_t m = spec.num_qubits;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (m < 2) return pairs;
  switch (spec.entanglement) {
    case Entanglement::linear:
      for (std::size_t i = 0; i + 1 < m; ++i) pairs.emplace_back(i, i + 1);
      break;
    case Entanglement::circular:
      for (std::size_t i = 0; i + 1 < m; ++i) pairs.emplace_back(i, i + 1);
      pairs.emplace_back(m - 1, 0);
      break;
    case Entanglement::full:
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
      break;
    case Entanglement::pairwise:
      for (std::size_t i = 0; i + 1 < m; i += 2) pairs.emplace_back(i, i + 1);
      for (std::size_t i = 1; i + 1 < m; i += 2) pairs.emplace_back(i, i + 1);
      break;
    case Entanglement::sca: {
      for (std::size_t i = 0; i + 1 < m; ++i) pairs.emplace_back(i, i + 1);
      pairs.emplace_back(m - 1, 0);
      std::rotate(pairs.begin(), pairs.begin() + (rep % pairs.size()),
                  pairs.end());
      if (rep % 2)
        for (auto& p : pairs) std::swap(p.first, p.second);
      break;
    }
  }
  return pairs;
}

}  // namespace detail

inline StateVector prepare_ansatz_state(const AnsatzSpec& spec,
                                        const std::vector<double>& params) {
  detail::check_capacity(spec.num_qubits);
  if (params.size() != param_count(spec))
    throw std::invalid_argument("expected " + std::to_string(param_count(spec)) +
                                " parameters, got " +
                                std::to_string(params.size()));
  StateVector s;
  s.num_qubits = spec.num_qubits;
  s.amp.assign(std::size_t{1} << spec.num_qubits, {0.0, 0.0});
  s.amp[0] = 1.0;
  std::size_t m = spec.num_qubits;
  for (std::size_t rep = 0; rep < spec.reps; ++rep) {
    for (std::size_t q = 0; q < m; ++q)
      detail::apply_ry(s, q, params[rep * m + q]);
    for (auto [c, t] : detail::entangler_pairs(spec, rep))
      detail::apply_cx(s, c, t);
  }
  for (std::size_t q = 0; q < m; ++q)
    detail::apply_ry(s, q, params[spec.reps * m + q]);
  return s;
}

// Uniform superposition, then alternating cost-phase layers exp(-i*gamma*E(b))
// and X-mixer rotations by 2*beta on every qubit.
inline StateVector prepare_qaoa_state(const ZPolynomial& h,
                                      const std::vector<double>& gammas,
                                      const std::vector<double>& betas) {
  detail::check_capacity(h.num_qubits);
  if (gammas.empty() || gammas.size() != betas.size())
    throw std::invalid_argument("need equal, nonzero gamma/beta layer counts");
  std::vector<double> diag = diagonal(h);
  StateVector s;
  s.num_qubits = h.num_qubits;
  std::size_t dim = std::size_t{1} << h.num_qubits;
  double amp0 = 1.0 / std::sqrt(static_cast<double>(dim));
  s.amp.assign(dim, {amp0, 0.0});
  for (std::size_t layer = 0; layer < gammas.size(); ++layer) {
    for (std::size_t b = 0; b < dim; ++b)
      s.amp[b] *= std::exp(std::complex<double>(0.0, -gammas[layer] * diag[b]));
    for (std::size_t q = 0; q < h.num_qubits; ++q)
      detail::apply_rx(s, q, 2.0 * betas[layer]);
  }
  return s;
}

inline ProbDist measure_probs(const StateVector& s) {
  ProbDist d;
  d.num_qubits = s.num_qubits;
  d.probs.resize(s.amp.size());
  for (std::size_t b = 0; b < s.amp.size(); ++b)
    d.probs[b] = std::norm(s.amp[b]);
  return d;
}

inline double max_depolarizing_lambda(std::size_t num_qubits) {
  double four_n = std::pow(4.0, static_cast<double>(num_qubits));
  return four_n / (four_n - 1.0);
}

// probs' = (1-lambda)*probs + lambda/2^m. Above lambda = 1 the affine map can
// push entries slightly negative; those are clamped at 0 and the vector
// renormalized.
inline ProbDist apply_depolarizing(const ProbDist& d, const NoiseSpec& noise) {
  double lam = noise.lambda;
  if (lam < 0.0 || lam > max_depolarizing_lambda(d.num_qubits))
    throw std::invalid_argument("depolarizing parameter out of range");
  ProbDist out;
  out.num_qubits = d.num_qubits;
  out.probs.resize(d.probs.size());
  double floor = lam / static_cast<double>(d.probs.size());
  for (std::size_t b = 0; b < d.probs.size(); ++b)
    out.probs[b] = (1.0 - lam) * d.probs[b] + floor;
  if (lam > 1.0) {
    double total = 0.0;
    for (double& p : out.probs) {
      if (p < 0.0) p = 0.0;
      total += p;
    }
    for (double& p : out.probs) p /= total;
  }
  return out;
}

inline double expectation(const ProbDist& d, const std::vector<double>& diag) {
  if (d.probs.size() != diag.size())
    throw std::invalid_argument("distribution/diagonal size mismatch");
  double e = 0.0;
  for (std::size_t b = 0; b < d.probs.size(); ++b) e += d.probs[b] * diag[b];
  return e;
}

inline double expectation(const ProbDist& d, const ZPolynomial& h) {
  if (d.num_qubits != h.num_qubits)
    throw std::invalid_argument("distribution/hamiltonian qubit mismatch");
  return expectation(d, diagonal(h));
}

// Multinomial sample of the distribution; sparse histogram keyed by basis
// index, ordered so ties in downstream argmax resolve to the lowest bitstring.
inline std::map<std::uint32_t, std::uint64_t> sample_counts(const ProbDist& d,
                                                            std::size_t shots,
                                                            std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("need at least one shot");
  Rng rng(seed);
  std::map<std::uint32_t, std::uint64_t> counts;
  for (std::size_t s = 0; s < shots; ++s) {
    std::size_t b = sample_discrete(rng, d.probs, 1.0);
    ++counts[static_cast<std::uint32_t>(b)];
  }
  return counts;
}

inline PartitionBits most_probable(const std::map<std::uint32_t, std::uint64_t>& counts,
                                   std::size_t num_qubits) {
  if (counts.empty()) throw std::invalid_argument("empty histogram");
  std::uint32_t best = 0;
  std::uint64_t best_count = 0;
  for (const auto& [b, c] : counts)
    if (c > best_count) {  // map order makes ties pick the lowest bitstring
      best_count = c;
      best = b;
    }
  return PartitionBits::from_index(best, num_qubits);
}

inline PartitionBits most_probable(const ProbDist& d) {
  if (d.probs.empty()) throw std::invalid_argument("empty distribution");
  std::size_t best = 0;
  for (std::size_t b = 1; b < d.probs.size(); ++b)
    if (d.probs[b] > d.probs[best]) best = b;
  return PartitionBits::from_index(static_cast<std::uint32_t>(best),
                                   d.num_qubits);
}

}  // namespace qkm
