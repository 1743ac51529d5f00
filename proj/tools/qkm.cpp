// Command-line front end: generate synthetic data, build and inspect
// coresets, run experiments and parameter sweeps, render result figures.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qkm/config.hpp"
#include "qkm/coreset.hpp"
#include "qkm/dataset.hpp"
#include "qkm/io.hpp"
#include "qkm/pipeline.hpp"
#include "qkm/svg.hpp"

namespace {

namespace fs = std::filesystem;

std::string resolve_output_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("QKM_OUT_DIR"); env && *env) return env;
  return ".";
}

qkm::BlobSpec parse_ratio_flag(const std::string& ratio) {
  auto colon = ratio.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= ratio.size())
    throw std::invalid_argument("--ratio must look like a:b");
  qkm::BlobSpec spec;
  try {
    spec.ratio_a = std::stoull(ratio.substr(0, colon));
    spec.ratio_b = std::stoull(ratio.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("--ratio must look like a:b");
  }
  if (spec.ratio_a < 1 || spec.ratio_b < 1)
    throw std::invalid_argument("--ratio parts must be >= 1");
  return spec;
}

qkm::json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  try {
    return qkm::json::parse(in);
  } catch (const qkm::json::exception& e) {
    throw std::invalid_argument("config '" + path + "' is not valid JSON: " +
                                e.what());
  }
}

qkm::Dataset load_dataset_flagged(const std::string& path,
                                  const std::vector<std::size_t>& columns,
                                  bool has_header, bool labeled) {
  if (!labeled || !columns.empty())
    return qkm::load_csv(path, columns, has_header);
  // trailing label column: probe the width, then select everything before it
  qkm::Dataset probe = qkm::load_csv(path, {}, has_header);
  if (probe.d < 2)
    throw std::invalid_argument("--labeled needs at least two columns");
  std::vector<std::size_t> features(probe.d - 1);
  for (std::size_t j = 0; j + 1 < probe.d; ++j) features[j] = j;
  qkm::Dataset data = qkm::load_csv(path, features, has_header);
  data.reference_labels.resize(data.n);
  for (std::size_t i = 0; i < data.n; ++i)
    data.reference_labels[i] = probe.at(i, probe.d - 1) != 0.0 ? 1 : 0;
  return data;
}

std::vector<qkm::TableRow> read_results_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open results '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("no rows in '" + path + "'");
  std::vector<qkm::TableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 12) continue;
    qkm::TableRow row;
    row.config_id = cells[0];
    row.lambda = std::stod(cells[5]);
    row.mean_accuracy = std::stod(cells[6]);
    row.std_accuracy = std::stod(cells[7]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("no rows in '" + path + "'");
  return rows;
}

int cmd_generate(const std::string& ratio, std::size_t n, std::size_t dims,
                 double std_dev, double sep, std::uint64_t seed,
                 const std::string& out_path) {
  qkm::BlobSpec spec = parse_ratio_flag(ratio);
  spec.n_total = n;
  spec.dims = dims;
  spec.cluster_std = std_dev;
  spec.center_separation = sep;
  spec.seed = seed;
  qkm::Dataset data = qkm::generate_uneven_blobs(spec);
  qkm::save_csv(data, out_path, /*with_labels=*/true);
  std::size_t minority = 0;
  for (int label : data.reference_labels)
    if (label == 0) ++minority;
  std::cout << "wrote " << data.n << " rows (" << minority << " + "
            << data.n - minority << "), dims " << data.d << " -> " << out_path
            << "\n";
  return 0;
}

int cmd_coreset(const std::string& in_path, const std::string& method,
                std::size_t m, std::size_t regions, std::uint64_t seed,
                const std::vector<std::size_t>& columns, bool has_header,
                bool labeled, const std::string& out_path,
                const std::string& plot_path) {
  qkm::Dataset data = load_dataset_flagged(in_path, columns, has_header, labeled);
  qkm::CoresetMethod kind = qkm::parse_coreset_method(method);
  qkm::Coreset cs;
  switch (kind) {
    case qkm::CoresetMethod::contour:
      cs = qkm::build_contour_coreset(data, regions, m);
      break;
    case qkm::CoresetMethod::lightweight:
      cs = qkm::build_lightweight_coreset(data, m, seed);
      break;
    case qkm::CoresetMethod::d2_bfl_style:
      cs = qkm::build_d2_coreset(data, m, seed, "d2_bfl_style");
      break;
    case qkm::CoresetMethod::d2_oneshot_style:
      cs = qkm::build_d2_coreset(data, m, seed, "d2_oneshot_style");
      break;
    default:
      cs = qkm::build_uniform_coreset(data, m, seed);
      break;
  }
  qkm::write_file_atomic(out_path, qkm::coreset_csv(cs));
  qkm::write_file_atomic(qkm::sidecar_path(out_path),
                         qkm::coreset_sidecar(cs, regions).dump(2) + "\n");
  if (!plot_path.empty())
    qkm::write_file_atomic(plot_path, qkm::render_coreset_scatter(data, cs));
  std::cout << cs.method << " coreset: m=" << cs.size() << " from n=" << data.n
            << ", built in " << qkm::format_sig6(cs.construct_seconds)
            << " s -> " << out_path << "\n";
  return 0;
}

qkm::ConfigFile resolve_config(const std::string& config_path,
                               const std::vector<std::string>& overrides) {
  qkm::json doc =
      config_path.empty() ? qkm::json::object() : load_config_file(config_path);
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--override must look like key=value");
    qkm::apply_override(doc, ov.substr(0, eq), ov.substr(eq + 1));
  }
  return qkm::parse_config(doc);
}

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& overrides) {
  qkm::ConfigFile file = resolve_config(config_path, overrides);
  qkm::RunResult result = qkm::run_experiment(file.experiment);
  fs::path dir = resolve_output_dir(file.output_dir);
  fs::create_directories(dir);
  fs::path json_path = dir / (file.experiment.name + ".json");
  fs::path csv_path = dir / (file.experiment.name + ".csv");
  qkm::write_file_atomic(json_path.string(),
                         qkm::run_result_to_json(result).dump(2) + "\n");
  qkm::write_file_atomic(csv_path.string(),
                         std::string(qkm::kResultsHeader) + "\n" +
                             qkm::results_row(file.experiment.name, result) +
                             "\n");
  std::cout << qkm::kResultsHeader << "\n"
            << qkm::results_row(file.experiment.name, result) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::vector<std::string>& axis_args, std::size_t jobs,
              const std::string& out_path) {
  qkm::json base = config_path.empty() ? qkm::json::object()
                                       : load_config_file(config_path);
  for (const std::string& ov : overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--override must look like key=value");
    qkm::apply_override(base, ov.substr(0, eq), ov.substr(eq + 1));
  }
  std::vector<qkm::SweepAxis> axes;
  for (const std::string& a : axis_args) axes.push_back(qkm::parse_axis(a));
  if (axes.empty()) throw std::invalid_argument("sweep needs at least one --axis");

  struct Cell {
    std::string id;
    qkm::ConfigFile config;
  };
  std::vector<Cell> cells;
  std::vector<std::size_t> index(axes.size(), 0);
  for (;;) {
    qkm::json doc = base;
    std::string id;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const std::string& value = axes[a].values[index[a]];
      qkm::apply_override(doc, axes[a].key, value);
      if (a) id += '|';
      id += axes[a].key + "=" + value;
    }
    qkm::ConfigFile file = qkm::parse_config(doc);
    // repeat seeds stay identical across cells, so comparisons are paired
    cells.push_back({std::move(id), std::move(file)});
    std::size_t a = axes.size();
    while (a > 0 && ++index[a - 1] == axes[a - 1].values.size()) {
      index[a - 1] = 0;
      --a;
    }
    if (a == 0) break;
  }

  std::vector<qkm::RunResult> results(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        results[i] = qkm::run_experiment(cells[i].config.experiment);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::size_t thread_count = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < thread_count; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!errors[i].empty())
      throw std::invalid_argument("cell '" + cells[i].id + "': " + errors[i]);

  std::ostringstream table;
  table << qkm::kResultsHeader << "\n";
  for (std::size_t i = 0; i < cells.size(); ++i)
    table << qkm::results_row(cells[i].id, results[i]) << "\n";

  fs::path out = out_path.empty()
                     ? fs::path(resolve_output_dir(
                           cells.front().config.output_dir)) /
                           "sweep.csv"
                     : fs::path(out_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  qkm::write_file_atomic(out.string(), table.str());
  std::cout << table.str();
  return 0;
}

int cmd_plot(const std::string& results_path, const std::string& kind,
             const std::string& out_path, const std::string& coreset_path) {
  std::string svg;
  if (kind == "accuracy_bars") {
    svg = qkm::render_accuracy_bars(read_results_table(results_path));
  } else if (kind == "noise_curve") {
    svg = qkm::render_noise_curve(read_results_table(results_path));
  } else if (kind == "coreset_scatter") {
    // results_path: dataset CSV (trailing label column tolerated via --labeled
    // upstream formats); coreset_path: coreset CSV written by the coreset
    // subcommand.
    if (coreset_path.empty())
      throw std::invalid_argument("coreset_scatter needs --coreset PATH");
    qkm::Dataset data = qkm::load_csv(results_path);
    std::ifstream in(coreset_path);
    if (!in)
      throw std::invalid_argument("cannot open coreset '" + coreset_path + "'");
    std::string line;
    if (!std::getline(in, line))
      throw std::invalid_argument("no rows in '" + coreset_path + "'");
    qkm::Coreset cs;
    cs.method = "unknown";
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 3)
        throw qkm::ParseError("coreset row too short", row, cells.size() + 1);
      qkm::WeightedPoint p;
      p.source_index = std::stoull(cells[0]);
      p.weight = std::stod(cells[1]);
      for (std::size_t j = 2; j < cells.size(); ++j)
        p.position.push_back(std::stod(cells[j]));
      cs.points.push_back(std::move(p));
    }
    svg = qkm::render_coreset_scatter(data, cs);
  } else {
    throw std::invalid_argument("unknown plot kind '" + kind + "'");
  }
  qkm::write_file_atomic(out_path, svg);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid quantum-classical 2-means clustering toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "generate an uneven two-blob dataset");
  std::string gen_ratio = "1:2", gen_out;
  std::size_t gen_n = 750, gen_dims = 2;
  double gen_std = 1.0, gen_sep = 6.0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--ratio", gen_ratio, "cluster size ratio a:b");
  gen->add_option("--n", gen_n, "total number of points");
  gen->add_option("--dims", gen_dims, "dimensions");
  gen->add_option("--std", gen_std, "cluster standard deviation");
  gen->add_option("--sep", gen_sep, "center separation");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  auto* cor = app.add_subcommand("coreset", "build a coreset from a dataset CSV");
  std::string cor_in, cor_method = "contour", cor_out, cor_plot;
  std::size_t cor_m = 5, cor_regions = 3;
  std::uint64_t cor_seed = 0;
  std::vector<std::size_t> cor_columns;
  bool cor_header = false, cor_labeled = false;
  cor->add_option("--in", cor_in, "input dataset CSV")->required();
  cor->add_option("--method", cor_method,
                  "contour|lightweight|d2_bfl_style|d2_oneshot_style|uniform");
  cor->add_option("--m", cor_m, "coreset size");
  cor->add_option("--regions", cor_regions, "region count");
  cor->add_option("--seed", cor_seed, "random seed (sampled methods)");
  cor->add_option("--columns", cor_columns, "0-based feature columns");
  cor->add_flag("--has-header", cor_header, "skip one header line");
  cor->add_flag("--labeled", cor_labeled,
                "treat the trailing column as a label, not a feature");
  cor->add_option("--out", cor_out, "output coreset CSV path")->required();
  cor->add_option("--plot", cor_plot, "optional scatter SVG path");

  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  std::string run_config;
  std::vector<std::string> run_overrides;
  run->add_option("--config", run_config, "config JSON path");
  run->add_option("--override", run_overrides, "key=value config override");

  auto* sweep = app.add_subcommand("sweep", "run a Cartesian parameter sweep");
  std::string sweep_config, sweep_out;
  std::vector<std::string> sweep_overrides, sweep_axes;
  std::size_t sweep_jobs = 1;
  sweep->add_option("--config", sweep_config, "config JSON path");
  sweep->add_option("--override", sweep_overrides, "key=value config override");
  sweep->add_option("--axis", sweep_axes, "key=v1,v2,... sweep axis")
      ->required();
  sweep->add_option("--jobs", sweep_jobs, "parallel cells");
  sweep->add_option("--out", sweep_out, "results table path");

  auto* plot = app.add_subcommand("plot", "render an SVG figure from results");
  std::string plot_results, plot_kind, plot_out, plot_coreset;
  plot->add_option("--results", plot_results, "results table or dataset CSV")
      ->required();
  plot->add_option("--kind", plot_kind,
                   "accuracy_bars|noise_curve|coreset_scatter")
      ->required();
  plot->add_option("--coreset", plot_coreset,
                   "coreset CSV (coreset_scatter only)");
  plot->add_option("--out", plot_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help, --version
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_generate(gen_ratio, gen_n, gen_dims, gen_std, gen_sep,
                          gen_seed, gen_out);
    if (cor->parsed())
      return cmd_coreset(cor_in, cor_method, cor_m, cor_regions, cor_seed,
                         cor_columns, cor_header, cor_labeled, cor_out,
                         cor_plot);
    if (run->parsed()) return cmd_run(run_config, run_overrides);
    if (sweep->parsed())
      return cmd_sweep(sweep_config, sweep_overrides, sweep_axes, sweep_jobs,
                       sweep_out);
    if (plot->parsed())
      return cmd_plot(plot_results, plot_kind, plot_out, plot_coreset);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const qkm::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
