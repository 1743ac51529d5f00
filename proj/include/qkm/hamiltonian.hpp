#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "qkm/coreset.hpp"
#include "qkm/errors.hpp"

namespace qkm {

// Cluster membership of the m coreset points. bit_i = 0 puts point i in the
// z = +1 cluster (called the "minus" side throughout), bit_i = 1 in the
// z = -1 cluster; z_i = 1 - 2*bit_i.
struct PartitionBits {
  std::vector<std::uint8_t> bits;

  static PartitionBits from_index(std::uint32_t value, std::size_t m) {
    PartitionBits p;
    p.bits.resize(m);
    for (std::size_t i = 0; i < m; ++i) p.bits[i] = (value >> i) & 1u;
    return p;
  }
  std::uint32_t to_index() const {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      v |= static_cast<std::uint32_t>(bits[i] & 1u) << i;
    return v;
  }
  PartitionBits flipped() const {
    PartitionBits p = *this;
    for (auto& b : p.bits) b ^= 1u;
    return p;
  }
  std::size_t size() const { return bits.size(); }
  int z(std::size_t i) const { return 1 - 2 * static_cast<int>(bits[i]); }
};

enum class TaylorOrder : int { zeroth = 0, first = 1, second = 2 };

// Real polynomial in Pauli-Z operators, reduced with Z_i^2 = 1: each term is
// a qubit-subset bitmask with a coefficient, mask 0 being the constant term.
// Diagonal in the computational basis, so energies are functions of bitstrings.
struct ZPolynomial {
  std::size_t num_qubits = 0;
  TaylorOrder order = TaylorOrder::zeroth;
  std::map<std::uint32_t, double> terms;

  void add(std::uint32_t mask, double coeff) {
    auto [it, inserted] = terms.emplace(mask, coeff);
    if (!inserted) it->second += coeff;
  }
  double constant() const {
    auto it = terms.find(0);
    return it == terms.end() ? 0.0 : it->second;
  }
  void prune_zeros() {
    for (auto it = terms.begin(); it != terms.end();)
      it = it->second == 0.0 ? terms.erase(it) : std::next(it);
  }
};

constexpr std::size_t kMaxQubits = 24;

// Maximized 2-means objective of a weighted point set: the product of the two
// cluster weights times the squared distance between the weighted centroids.
// An empty side contributes the limit value 0.
inline double exact_objective(const Coreset& cs, const PartitionBits& p) {
  std::size_t m = cs.size();
  if (p.size() != m)
    throw std::invalid_argument("partition length does not match coreset size");
  std::size_t d = cs.dims();
  double w_minus = 0.0, w_plus = 0.0;
  std::vector<double> s_minus(d, 0.0), s_plus(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const WeightedPoint& pt = cs.points[i];
    double& w = p.bits[i] ? w_plus : w_minus;
    std::vector<double>& s = p.bits[i] ? s_plus : s_minus;
    w += pt.weight;
    for (std::size_t j = 0; j < d; ++j) s[j] += pt.weight * pt.position[j];
  }
  if (w_minus == 0.0 || w_plus == 0.0) return 0.0;
  double dist2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double t = s_plus[j] / w_plus - s_minus[j] / w_minus;
    dist2 += t * t;
  }
  return w_plus * w_minus * dist2;
}

namespace detail {

// Taylor replacement for the cluster-weight ratio W_other/W_self around the
// balanced point W_self = W/2, as a function of u = W_self/W:
//   order 0: 1;  order 1: 3 - 4u;  order 2: 8u^2 - 12u + 5.
inline double ratio_approx(double w_self, double w_total, TaylorOrder order) {
  double u = w_self / w_total;
  switch (order) {
    case TaylorOrder::zeroth: return 1.0;
    case TaylorOrder::first: return 3.0 - 4.0 * u;
    default: return 8.0 * u * u - 12.0 * u + 5.0;
  }
}

}  // namespace detail

// The objective rewritten as
//   (W-/W+)*||S+||^2 + (W+/W-)*||S-||^2 - 2*(S+ . S-),   S± = Σ_side w_i x_i,
// with each weight ratio replaced by its Taylor polynomial. Total for every
// partition, degenerate ones included.
inline double approx_objective(const Coreset& cs, const PartitionBits& p,
                               TaylorOrder order) {
  std::size_t m = cs.size();
  if (p.size() != m)
    throw std::invalid_argument("partition length does not match coreset size");
  std::size_t d = cs.dims();
  double w_minus = 0.0, w_plus = 0.0, w_total = 0.0;
  std::vector<double> s_minus(d, 0.0), s_plus(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const WeightedPoint& pt = cs.points[i];
    double& w = p.bits[i] ? w_plus : w_minus;
    std::vector<double>& s = p.bits[i] ? s_plus : s_minus;
    w += pt.weight;
    w_total += pt.weight;
    for (std::size_t j = 0; j < d; ++j) s[j] += pt.weight * pt.position[j];
  }
  double norm_plus = 0.0, norm_minus = 0.0, cross = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    norm_plus += s_plus[j] * s_plus[j];
    norm_minus += s_minus[j] * s_minus[j];
    cross += s_plus[j] * s_minus[j];
  }
  double ratio_for_plus = detail::ratio_approx(w_plus, w_total, order);
  double ratio_for_minus = detail::ratio_approx(w_minus, w_total, order);
  return ratio_for_plus * norm_plus + ratio_for_minus * norm_minus -
         2.0 * cross;
}

// Compile the approximated objective into a Z-polynomial and negate it, so the
// optimal partition is the minimum-energy basis state. With S = Σ w_i Z_i and
// u_self = W_self/W, the ratio polynomials collapse to an even part A and an
// odd part B*S:
//   order 0: A = 1,            B = 0
//   order 1: A = 1,            B = 2/W
//   order 2: A = 1 + 2S^2/W^2, B = 2/W
// and each ordered point pair (i,j) contributes
//   w_i w_j (x_i . x_j)/2 * [ A(1 + Z_i Z_j) - B*S*(Z_i + Z_j) - 1 + Z_i Z_j ].
// Every product has even parity, so energies are exactly flip-symmetric.
// Constant terms are retained: energy(H, p) == -approx_objective(cs, p, order).
inline ZPolynomial build_hamiltonian(const Coreset& cs, TaylorOrder order) {
  std::size_t m = cs.size();
  if (m < 2) throw ConstructionError("need at least two coreset points");
  if (m > kMaxQubits) throw ConstructionError("coreset exceeds 24 qubits");

  double w_total = 0.0;
  for (const WeightedPoint& pt : cs.points) w_total += pt.weight;

  // A and B*S as mask->coeff maps (A is even, bs is odd).
  std::map<std::uint32_t, double> a_poly, bs_poly;
  a_poly[0] = 1.0;
  if (order != TaylorOrder::zeroth) {
    double b = 2.0 / w_total;
    for (std::size_t i = 0; i < m; ++i)
      bs_poly[static_cast<std::uint32_t>(1u << i)] = b * cs.points[i].weight;
  }
  if (order == TaylorOrder::second) {
    double c = 2.0 / (w_total * w_total);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        std::uint32_t mask = (1u << i) ^ (1u << j);  // Z^2 = 1 on the diagonal
        double coeff = c * cs.points[i].weight * cs.points[j].weight;
        auto [it, inserted] = a_poly.emplace(mask, coeff);
        if (!inserted) it->second += coeff;
      }
  }

  ZPolynomial obj;
  obj.num_qubits = m;
  obj.order = order;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < cs.dims(); ++t)
        dot += cs.points[i].position[t] * cs.points[j].position[t];
      double c = 0.5 * cs.points[i].weight * cs.points[j].weight * dot;
      if (c == 0.0) continue;
      std::uint32_t pair_mask = (1u << i) ^ (1u << j);
      for (const auto& [mask, coeff] : a_poly) {
        obj.add(mask, c * coeff);              // A * 1
        obj.add(mask ^ pair_mask, c * coeff);  // A * Z_i Z_j
      }
      for (const auto& [mask, coeff] : bs_poly) {
        obj.add(mask ^ (1u << i), -c * coeff);  // -B*S * Z_i
        obj.add(mask ^ (1u << j), -c * coeff);  // -B*S * Z_j
      }
      obj.add(0, -c);          // -1
      obj.add(pair_mask, c);   // +Z_i Z_j
    }

  obj.prune_zeros();
  ZPolynomial h;
  h.num_qubits = m;
  h.order = order;
  for (const auto& [mask, coeff] : obj.terms) h.terms[mask] = -coeff;
  return h;
}

inline double energy(const ZPolynomial& h, const PartitionBits& p) {
  if (p.size() != h.num_qubits)
    throw std::invalid_argument("partition length does not match qubit count");
  std::uint32_t ones = p.to_index();
  double e = 0.0;
  for (const auto& [mask, coeff] : h.terms)
    e += std::popcount(mask & ones) % 2 ? -coeff : coeff;
  return e;
}

inline std::vector<double> diagonal(const ZPolynomial& h) {
  if (h.num_qubits > kMaxQubits)
    throw ConstructionError("diagonal capped at 24 qubits");
  std::size_t dim = std::size_t{1} << h.num_qubits;
  std::vector<double> out(dim, 0.0);
  for (const auto& [mask, coeff] : h.terms)
    for (std::size_t b = 0; b < dim; ++b)
      out[b] += std::popcount(mask & static_cast<std::uint32_t>(b)) % 2
                    ? -coeff
                    : coeff;
  return out;
}

struct GroundState {
  PartitionBits partition;
  double energy = 0.0;
};

// Exhaustive minimum over all basis states; ties go to the lowest bitstring.
inline GroundState brute_force_ground(const ZPolynomial& h) {
  if (h.num_qubits > kMaxQubits)
    throw ConstructionError("brute force capped at 24 qubits");
  std::size_t dim = std::size_t{1} << h.num_qubits;
  std::uint32_t best = 0;
  double best_e = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < dim; ++b) {
    double e = 0.0;
    for (const auto& [mask, coeff] : h.terms)
      e += std::popcount(mask & static_cast<std::uint32_t>(b)) % 2 ? -coeff
                                                                   : coeff;
    if (e < best_e) {
      best_e = e;
      best = static_cast<std::uint32_t>(b);
    }
  }
  return {PartitionBits::from_index(best, h.num_qubits), best_e};
}

struct BestPartition {
  PartitionBits partition;
  double objective = 0.0;
};

// Exhaustive argmax of the exact objective over non-degenerate partitions.
inline BestPartition brute_force_best_partition(const Coreset& cs) {
  std::size_t m = cs.size();
  if (m < 2) throw ConstructionError("need at least two coreset points");
  if (m > kMaxQubits) throw ConstructionError("brute force capped at 24 qubits");
  std::uint32_t all = (1u << m) - 1u;
  std::uint32_t best = 1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::uint32_t b = 0; b <= all; ++b) {
    if (b == 0 || b == all) continue;  // degenerate: one side empty
    double v = exact_objective(cs, PartitionBits::from_index(b, m));
    if (v > best_v) {
      best_v = v;
      best = b;
    }
  }
  return {PartitionBits::from_index(best, m), best_v};
}

}  // namespace qkm
