#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkm/coreset.hpp"
#include "qkm/errors.hpp"
#include "qkm/hamiltonian.hpp"
#include "qkm/pipeline.hpp"
#include "qkm/quantum.hpp"

namespace qkm {

using json = nlohmann::json;

// Atomic text-file write: temp file in the target directory, then rename.
inline void write_file_atomic(const std::string& path,
                              const std::string& content) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ParseError("cannot write '" + tmp.string() + "'", 0, 0);
    out << content;
    if (!out) throw ParseError("write failed for '" + tmp.string() + "'", 0, 0);
  }
  std::filesystem::rename(tmp, target);
}

// Fixed significance for result tables: 6 significant digits.
inline std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string coreset_csv(const Coreset& cs) {
  std::ostringstream out;
  out << "source_index,weight";
  for (std::size_t j = 0; j < cs.dims(); ++j) out << ",x" << j;
  out << '\n';
  for (const WeightedPoint& p : cs.points) {
    out << p.source_index << ',' << detail::format_double(p.weight);
    for (double v : p.position) out << ',' << detail::format_double(v);
    out << '\n';
  }
  return out.str();
}

inline json coreset_sidecar(const Coreset& cs, std::size_t k) {
  return json{{"method", cs.method},
              {"k", k},
              {"m", cs.size()},
              {"construct_seconds", cs.construct_seconds}};
}

// Sidecar path: extension swapped to .json (appended when there is none).
inline std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

inline json hamiltonian_to_json(const ZPolynomial& h) {
  json terms = json::array();
  for (const auto& [mask, coeff] : h.terms) {
    json bits = json::array();
    for (std::size_t i = 0; i < h.num_qubits; ++i)
      if (mask & (1u << i)) bits.push_back(i);
    terms.push_back(json{{"mask_bits", bits}, {"coeff", coeff}});
  }
  return json{{"num_qubits", h.num_qubits},
              {"order", static_cast<int>(h.order)},
              {"terms", terms}};
}

inline ZPolynomial hamiltonian_from_json(const json& j) {
  ZPolynomial h;
  h.num_qubits = j.at("num_qubits").get<std::size_t>();
  int order = j.at("order").get<int>();
  if (order < 0 || order > 2)
    throw std::invalid_argument("order must be 0, 1, or 2");
  h.order = static_cast<TaylorOrder>(order);
  for (const json& term : j.at("terms")) {
    std::uint32_t mask = 0;
    for (std::size_t bit : term.at("mask_bits").get<std::vector<std::size_t>>()) {
      if (bit >= h.num_qubits)
        throw std::invalid_argument("mask bit exceeds qubit count");
      mask |= 1u << bit;
    }
    h.add(mask, term.at("coeff").get<double>());
  }
  return h;
}

// Bitstrings render most-significant-qubit first: qubit m-1 is the leftmost
// character, so the string is the plain binary form of the basis index.
inline std::string bitstring(std::uint32_t value, std::size_t num_qubits) {
  std::string s(num_qubits, '0');
  for (std::size_t i = 0; i < num_qubits; ++i)
    if (value & (1u << i)) s[num_qubits - 1 - i] = '1';
  return s;
}

inline json probdist_to_json(const ProbDist& d) {
  json out = json::object();
  for (std::size_t b = 0; b < d.probs.size(); ++b)
    out[bitstring(static_cast<std::uint32_t>(b), d.num_qubits)] = d.probs[b];
  return out;
}

inline json counts_to_json(const std::map<std::uint32_t, std::uint64_t>& counts,
                           std::size_t num_qubits) {
  json out = json::object();
  for (const auto& [b, c] : counts) out[bitstring(b, num_qubits)] = c;
  return out;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json dataset;
  if (cfg.blob) {
    dataset = json{{"type", "blob"},
                   {"ratio", {cfg.blob->ratio_a, cfg.blob->ratio_b}},
                   {"n", cfg.blob->n_total},
                   {"dims", cfg.blob->dims},
                   {"std", cfg.blob->cluster_std},
                   {"separation", cfg.blob->center_separation}};
  } else {
    dataset = json{{"type", "csv"},
                   {"path", cfg.csv_path},
                   {"columns", cfg.csv_columns},
                   {"has_header", cfg.csv_has_header}};
  }
  return json{
      {"name", cfg.name},
      {"dataset", dataset},
      {"normalize", cfg.normalize},
      {"coreset",
       {{"method", coreset_method_name(cfg.method)},
        {"m", cfg.m},
        {"regions", cfg.regions}}},
      {"order", static_cast<int>(cfg.order)},
      {"solver", solver_name(cfg.solver)},
      {"ansatz",
       {{"reps", cfg.ansatz_reps},
        {"entanglement", entanglement_name(cfg.entanglement)}}},
      {"qaoa", {{"layers", cfg.qaoa_layers}}},
      {"noise", {{"lambda", cfg.lambda}}},
      {"shots", cfg.shots},
      {"optimizer",
       {{"kind", optimizer_kind_name(cfg.optimizer.kind)},
        {"max_evals", cfg.optimizer.max_evals},
        {"population", cfg.optimizer.population},
        {"bounds", {cfg.optimizer.lower, cfg.optimizer.upper}},
        {"tolerance", cfg.optimizer.tolerance}}},
      {"ground_truth_restarts", cfg.ground_truth_restarts},
      {"repeats", cfg.repeats},
      {"master_seed", cfg.master_seed}};
}

inline std::string dataset_tag(const ExperimentConfig& cfg) {
  if (cfg.blob)
    return "uneven-" + std::to_string(cfg.blob->ratio_a) + ":" +
           std::to_string(cfg.blob->ratio_b);
  return std::filesystem::path(cfg.csv_path).filename().string();
}

inline json run_result_to_json(const RunResult& r) {
  json records = json::array();
  for (const RepeatRecord& rec : r.records) {
    records.push_back(json{
        {"repeat_seed", rec.repeat_seed},
        {"failed", rec.failed},
        {"accuracy", rec.accuracy},
        {"solver_energy", rec.solver_energy},
        {"ground_energy", rec.ground_energy},
        {"ground_gap", rec.ground_gap},
        {"partition", bitstring(rec.partition, r.config.m)},
        {"coreset_seconds", rec.coreset_seconds},
        {"solve_seconds", rec.solve_seconds}});
  }
  return json{{"config", config_to_json(r.config)},
              {"records", records},
              {"failures", r.failures},
              {"mean_accuracy", r.mean_accuracy},
              {"std_accuracy", r.std_accuracy},
              {"mean_ground_gap", r.mean_ground_gap},
              {"mean_coreset_seconds", r.mean_coreset_seconds},
              {"mean_solve_seconds", r.mean_solve_seconds}};
}

inline const char* kResultsHeader =
    "config_id,dataset,method,order,solver,lambda,mean_accuracy,std_accuracy,"
    "mean_ground_gap,coreset_seconds,solve_seconds,failures";

inline std::string results_row(const std::string& config_id,
                               const RunResult& r) {
  std::ostringstream out;
  out << config_id << ',' << dataset_tag(r.config) << ','
      << coreset_method_name(r.config.method) << ','
      << static_cast<int>(r.config.order) << ',' << solver_name(r.config.solver)
      << ',' << format_sig6(r.config.lambda) << ','
      << format_sig6(r.mean_accuracy) << ',' << format_sig6(r.std_accuracy)
      << ',' << format_sig6(r.mean_ground_gap) << ','
      << format_sig6(r.mean_coreset_seconds) << ','
      << format_sig6(r.mean_solve_seconds) << ',' << r.failures;
  return out.str();
}

}  // namespace qkm
