#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkm/io.hpp"
#include "qkm/pipeline.hpp"

namespace qkm {

// Experiment configuration document: JSON mirroring ExperimentConfig plus an
// output directory and a figure toggle. Unknown keys are rejected; every
// default matches the toolkit's tuned settings (contour coreset of size 5,
// first-order Hamiltonian, VQE with 2 linear-entangled repetitions, evolution
// strategy).
struct ConfigFile {
  ExperimentConfig experiment;
  std::string output_dir;  // empty: QKM_OUT_DIR environment variable, else "."
  bool figures = false;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw std::invalid_argument("unknown config key '" +
                                  (where.empty() ? key : where + "." + key) +
                                  "'");
}

template <typename T>
inline T get_or(const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + key + "' has the wrong type");
  }
}

inline void parse_ratio(const json& v, BlobSpec& spec) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    auto colon = s.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("ratio must look like \"1:2\"");
    try {
      spec.ratio_a = std::stoull(s.substr(0, colon));
      spec.ratio_b = std::stoull(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("ratio must look like \"1:2\"");
    }
    return;
  }
  if (v.is_array() && v.size() == 2) {
    spec.ratio_a = v[0].get<std::size_t>();
    spec.ratio_b = v[1].get<std::size_t>();
    return;
  }
  throw std::invalid_argument("ratio must be \"a:b\" or [a, b]");
}

}  // namespace detail

inline ConfigFile parse_config(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be an object");
  detail::reject_unknown_keys(
      doc, "",
      {"name", "dataset", "normalize", "coreset", "order", "solver", "ansatz",
       "qaoa", "noise", "shots", "optimizer", "ground_truth_restarts",
       "repeats", "master_seed", "output_dir", "figures"});
  ConfigFile out;
  ExperimentConfig& cfg = out.experiment;

  cfg.name = detail::get_or<std::string>(doc, "name", cfg.name);
  cfg.normalize = detail::get_or(doc, "normalize", cfg.normalize);
  cfg.shots = detail::get_or(doc, "shots", cfg.shots);
  cfg.repeats = detail::get_or(doc, "repeats", cfg.repeats);
  cfg.master_seed = detail::get_or(doc, "master_seed", cfg.master_seed);
  cfg.ground_truth_restarts =
      detail::get_or(doc, "ground_truth_restarts", cfg.ground_truth_restarts);
  if (doc.contains("order")) {
    int order = doc.at("order").get<int>();
    if (order < 0 || order > 2)
      throw std::invalid_argument("order must be 0, 1, or 2");
    cfg.order = static_cast<TaylorOrder>(order);
  }
  if (doc.contains("solver"))
    cfg.solver = parse_solver(doc.at("solver").get<std::string>());

  if (doc.contains("dataset")) {
    const json& ds = doc.at("dataset");
    std::string type = detail::get_or<std::string>(ds, "type", "blob");
    if (type == "blob") {
      detail::reject_unknown_keys(
          ds, "dataset", {"type", "ratio", "n", "dims", "std", "separation"});
      BlobSpec spec = cfg.blob.value_or(BlobSpec{});
      if (ds.contains("ratio")) detail::parse_ratio(ds.at("ratio"), spec);
      spec.n_total = detail::get_or(ds, "n", spec.n_total);
      spec.dims = detail::get_or(ds, "dims", spec.dims);
      spec.cluster_std = detail::get_or(ds, "std", spec.cluster_std);
      spec.center_separation =
          detail::get_or(ds, "separation", spec.center_separation);
      cfg.blob = spec;
      cfg.csv_path.clear();
    } else if (type == "csv") {
      detail::reject_unknown_keys(ds, "dataset",
                                  {"type", "path", "columns", "has_header"});
      cfg.blob.reset();
      cfg.csv_path = ds.at("path").get<std::string>();
      cfg.csv_columns =
          detail::get_or(ds, "columns", std::vector<std::size_t>{});
      cfg.csv_has_header = detail::get_or(ds, "has_header", false);
    } else {
      throw std::invalid_argument("dataset.type must be 'blob' or 'csv'");
    }
  }

  if (doc.contains("coreset")) {
    const json& cs = doc.at("coreset");
    detail::reject_unknown_keys(cs, "coreset", {"method", "m", "regions"});
    if (cs.contains("method"))
      cfg.method = parse_coreset_method(cs.at("method").get<std::string>());
    cfg.m = detail::get_or(cs, "m", cfg.m);
    cfg.regions = detail::get_or(cs, "regions", cfg.regions);
  }
  if (doc.contains("ansatz")) {
    const json& an = doc.at("ansatz");
    detail::reject_unknown_keys(an, "ansatz", {"reps", "entanglement"});
    cfg.ansatz_reps = detail::get_or(an, "reps", cfg.ansatz_reps);
    if (an.contains("entanglement"))
      cfg.entanglement =
          parse_entanglement(an.at("entanglement").get<std::string>());
  }
  if (doc.contains("qaoa")) {
    const json& q = doc.at("qaoa");
    detail::reject_unknown_keys(q, "qaoa", {"layers"});
    cfg.qaoa_layers = detail::get_or(q, "layers", cfg.qaoa_layers);
    if (cfg.qaoa_layers < 1)
      throw std::invalid_argument("qaoa.layers must be >= 1");
  }
  if (doc.contains("noise")) {
    const json& nz = doc.at("noise");
    detail::reject_unknown_keys(nz, "noise", {"lambda"});
    cfg.lambda = detail::get_or(nz, "lambda", cfg.lambda);
  }
  if (doc.contains("optimizer")) {
    const json& op = doc.at("optimizer");
    detail::reject_unknown_keys(
        op, "optimizer",
        {"kind", "max_evals", "population", "bounds", "tolerance"});
    if (op.contains("kind"))
      cfg.optimizer.kind =
          parse_optimizer_kind(op.at("kind").get<std::string>());
    cfg.optimizer.max_evals =
        detail::get_or(op, "max_evals", cfg.optimizer.max_evals);
    cfg.optimizer.population =
        detail::get_or(op, "population", cfg.optimizer.population);
    cfg.optimizer.tolerance =
        detail::get_or(op, "tolerance", cfg.optimizer.tolerance);
    if (op.contains("bounds")) {
      const json& b = op.at("bounds");
      if (!b.is_array() || b.size() != 2)
        throw std::invalid_argument("optimizer.bounds must be [lower, upper]");
      cfg.optimizer.lower = b[0].get<double>();
      cfg.optimizer.upper = b[1].get<double>();
    }
  }

  out.output_dir = detail::get_or<std::string>(doc, "output_dir", "");
  out.figures = detail::get_or(doc, "figures", false);
  return out;
}

// Shorthand paths accepted by --override and --axis; long dotted paths pass
// through unchanged.
inline std::string expand_config_path(const std::string& key) {
  static const std::map<std::string, std::string> aliases = {
      {"method", "coreset.method"},   {"m", "coreset.m"},
      {"regions", "coreset.regions"}, {"lambda", "noise.lambda"},
      {"reps", "ansatz.reps"},        {"entanglement", "ansatz.entanglement"},
      {"layers", "qaoa.layers"},      {"ratio", "dataset.ratio"},
      {"n", "dataset.n"},             {"dims", "dataset.dims"},
      {"std", "dataset.std"},         {"separation", "dataset.separation"},
      {"kind", "optimizer.kind"},     {"max_evals", "optimizer.max_evals"},
      {"population", "optimizer.population"},
      {"tolerance", "optimizer.tolerance"},
      {"seed", "master_seed"}};
  auto it = aliases.find(key);
  return it == aliases.end() ? key : it->second;
}

// Apply one key=value override onto the raw JSON document. The value string
// is parsed as JSON when possible, else taken as a plain string.
inline void apply_override(json& doc, const std::string& key,
                           const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  std::string path = expand_config_path(key);
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    std::size_t dot = path.find('.', start);
    std::string part = path.substr(start, dot - start);
    if (part.empty()) throw std::invalid_argument("empty override key");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

struct SweepAxis {
  std::string key;                  // config path (shorthand accepted)
  std::vector<std::string> values;  // raw value strings
};

// key=v1,v2,... as passed to --axis.
inline SweepAxis parse_axis(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= arg.size())
    throw std::invalid_argument("axis must look like key=v1,v2,...");
  SweepAxis axis;
  axis.key = arg.substr(0, eq);
  std::size_t start = eq + 1;
  while (start <= arg.size()) {
    std::size_t comma = arg.find(',', start);
    std::size_t end = comma == std::string::npos ? arg.size() : comma;
    if (end > start) axis.values.push_back(arg.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (axis.values.empty())
    throw std::invalid_argument("axis '" + axis.key + "' has no values");
  return axis;
}

}  // namespace qkm
