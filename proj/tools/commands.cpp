#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sbglsu/admm.hpp"
#include "sbglsu/errors.hpp"
#include "sbglsu/graph.hpp"
#include "sbglsu/io.hpp"
#include "sbglsu/metrics.hpp"
#include "sbglsu/rng.hpp"
#include "sbglsu/slic.hpp"
#include "sbglsu/synth.hpp"

#ifndef SBGLSU_VERSION
#define SBGLSU_VERSION "0.0.0"
#endif

namespace sbglsu::cli {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_manifest(const std::string& subcommand, json params, json inputs, json outputs,
                   std::optional<std::uint64_t> seed) {
  return {{"subcommand", subcommand},
          {"version", SBGLSU_VERSION},
          {"timestamp", utc_timestamp()},
          {"seed", seed ? json(*seed) : json(nullptr)},
          {"params", std::move(params)},
          {"inputs", std::move(inputs)},
          {"outputs", std::move(outputs)}};
}

// JSON has no infinity; keep it readable and round-trippable as a string.
json real_or_inf(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); }

// Standard DC1/DC2 weights per noise level.
const std::map<std::string, std::pair<double, double>>& weight_presets() {
  static const std::map<std::string, std::pair<double, double>> table = {
      {"dc1-20", {5e-2, 1e3}}, {"dc1-30", {1e-2, 1e3}}, {"dc1-40", {5e-3, 1e3}},
      {"dc2-20", {2e-2, 1e3}}, {"dc2-30", {7e-2, 5e-2}}, {"dc2-40", {2e-2, 7e-3}},
  };
  return table;
}

GraphParams graph_params(const UnmixOptions& opt) {
  GraphParams p;
  p.k_neighbors = opt.knn;
  if (opt.sigma != "median") {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(opt.sigma, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != opt.sigma.size() || !(v > 0.0) || !std::isfinite(v))
      throw UsageError("--sigma must be 'median' or a positive number, got '" + opt.sigma + "'");
    p.sigma = v;
  }
  p.validate();
  return p;
}

SolverConfig solver_config(const UnmixOptions& opt, double lambda_s, double lambda_g) {
  SolverConfig c;
  c.lambda_s = lambda_s;
  c.lambda_g = lambda_g;
  c.mu = opt.mu;
  c.epsilon = opt.eps;
  c.outer_iters = opt.outer;
  c.inner_iters = opt.inner;
  c.tol = opt.tol;
  c.exec = opt.serial ? Execution::kSerial : Execution::kParallel;
  c.validate();
  return c;
}

/// Everything unmix needs that does not depend on the regularization weights.
struct Problem {
  HsiCube cube;
  SpectralLibrary library;
  SuperpixelMap labels;
  bool segmented = false;
  SuperpixelGraph graph;
  Matrix y;
  std::optional<Matrix> truth;
};

Problem load_problem(const UnmixOptions& opt) {
  Problem p{io::load_cube(opt.cube), io::load_library(opt.library), {}, false, {}, {}, {}};
  if (p.cube.bands() != p.library.bands()) {
    throw ShapeError(opt.cube.string() + " has " + std::to_string(p.cube.bands()) + " bands but " +
                     opt.library.string() + " has " + std::to_string(p.library.bands()));
  }
  if (opt.labels) {
    p.labels = io::load_labels(*opt.labels);
    if (p.labels.height() != p.cube.height() || p.labels.width() != p.cube.width()) {
      throw ShapeError(opt.labels->string() + " is " + std::to_string(p.labels.height()) + "x" +
                       std::to_string(p.labels.width()) + " but " + opt.cube.string() + " is " +
                       std::to_string(p.cube.height()) + "x" + std::to_string(p.cube.width()));
    }
  } else {
    SlicParams sp;
    sp.superpixel_size = opt.size;
    sp.compactness = opt.compactness;
    if (opt.size > std::max(p.cube.height(), p.cube.width()))
      throw UsageError("--size exceeds both image dimensions");
    p.labels = segment(p.cube, sp, opt.serial ? Execution::kSerial : Execution::kParallel);
    p.segmented = true;
  }
  if (opt.truth) {
    p.truth = io::load_matrix_csv(*opt.truth);
    if (static_cast<std::size_t>(p.truth->rows()) != p.library.size() ||
        static_cast<std::size_t>(p.truth->cols()) != p.cube.pixels()) {
      throw ShapeError(opt.truth->string() + " is " + std::to_string(p.truth->rows()) + "x" +
                       std::to_string(p.truth->cols()) + " but " + opt.library.string() + " and " +
                       opt.cube.string() + " imply " + std::to_string(p.library.size()) + "x" +
                       std::to_string(p.cube.pixels()));
    }
  }
  for (const auto i : opt.maps) {
    if (i >= p.library.size())
      throw UsageError("--maps index " + std::to_string(i) + " is out of range for " +
                       std::to_string(p.library.size()) + " endmembers");
  }
  p.y = cube_to_matrix(p.cube);
  p.graph = build_graph(p.y, p.labels, graph_params(opt), opt.serial ? Execution::kSerial : Execution::kParallel);
  return p;
}

struct RunOutcome {
  SolveResult result;
  double wall_seconds = 0.0;
  std::optional<EvalReport> report;
  json outputs = json::object();
};

RunOutcome run_solver(const Problem& p, const UnmixOptions& opt, double lambda_s, double lambda_g,
                      const fs::path& dir) {
  const auto config = solver_config(opt, lambda_s, lambda_g);
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out{solve(p.y, p.library.matrix(), p.graph, config, p.truth ? &*p.truth : nullptr), 0.0, {}, {}};
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(dir);
  const Matrix& s = out.result.abundances.values;
  io::save_matrix_csv(s, dir / "abundances.csv");
  io::write_convergence_csv(out.result.record, dir / "convergence.csv");
  out.outputs["abundances"] = (dir / "abundances.csv").string();
  out.outputs["convergence"] = (dir / "convergence.csv").string();
  if (!opt.maps.empty()) {
    fs::create_directories(dir / "maps");
    json maps = json::array();
    for (const auto i : opt.maps) {
      const auto path = dir / "maps" / ("endmember_" + std::to_string(i) + ".pgm");
      io::save_abundance_pgm(s, i, path, p.cube.height(), p.cube.width());
      maps.push_back(path.string());
    }
    out.outputs["maps"] = maps;
  }
  if (p.truth) {
    out.report = evaluate(*p.truth, s);
    std::ofstream rep(dir / "report.csv");
    io::write_report(*out.report, rep, io::ReportFormat::kCsv);
    if (!rep) throw Error("write to " + (dir / "report.csv").string() + " failed");
    out.outputs["report"] = (dir / "report.csv").string();
  }
  return out;
}

json unmix_params(const UnmixOptions& opt) {
  return {{"mu", opt.mu},
          {"eps", opt.eps},
          {"outer", opt.outer},
          {"inner", opt.inner},
          {"tol", opt.tol},
          {"knn", opt.knn},
          {"sigma", opt.sigma},
          {"size", opt.size},
          {"compactness", opt.compactness},
          {"maps", opt.maps},
          {"serial", opt.serial}};
}

json unmix_inputs(const UnmixOptions& opt) {
  json in = {{"cube", opt.cube.string()}, {"library", opt.library.string()}};
  in["labels"] = opt.labels ? json(opt.labels->string()) : json(nullptr);
  in["truth"] = opt.truth ? json(opt.truth->string()) : json(nullptr);
  return in;
}

std::vector<std::pair<double, double>> read_grid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  std::vector<std::pair<double, double>> grid;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (auto& ch : line)
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra)) throw ParseError("expected 'lambda_s,lambda_g'", number);
    std::size_t ua = 0, ub = 0;
    double ls = 0, lg = 0;
    try {
      ls = std::stod(a, &ua);
      lg = std::stod(b, &ub);
    } catch (const std::exception&) {
      ua = 0;
    }
    if (ua != a.size() || ub != b.size()) {
      if (grid.empty() && number == 1) continue;  // header row
      throw ParseError("invalid number in '" + a + "," + b + "'", number);
    }
    grid.emplace_back(ls, lg);
  }
  if (grid.empty()) throw FormatError(path.string() + ": grid has no (lambda_s, lambda_g) rows");
  return grid;
}

}  // namespace

fs::path default_output(const std::string& name) {
  const char* root = std::getenv("SBGLSU_OUTPUT_ROOT");
  return (root && *root ? fs::path(root) : fs::path("sbglsu_out")) / name;
}

int run_gen_library(const GenLibraryOptions& opt) {
  const auto lib = make_synthetic_library(opt.bands, opt.count, opt.seed);
  const fs::path out = opt.out.empty() ? default_output("gen-library") / "library.csv" : opt.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::save_library(lib, out);
  fs::path manifest = out;
  manifest.replace_extension(".manifest.json");
  io::write_json(make_manifest("gen-library", {{"bands", opt.bands}, {"count", opt.count}},
                               json::object(), {{"library", out.string()}}, opt.seed),
                 manifest);
  std::cout << "library: " << out.string() << " (" << lib.bands() << " bands, " << lib.size()
            << " signatures)\n";
  return 0;
}

int run_synth(const SynthOptions& opt) {
  SynthConfig cfg;
  cfg.height = opt.height;
  cfg.width = opt.width;
  cfg.m_library = opt.m_library;
  cfg.m_active = opt.m_active;
  cfg.patch_size = opt.patch_size;
  cfg.snr_db = opt.snr_db;
  cfg.seed = opt.seed;
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }

  const auto full = opt.library ? io::load_library(*opt.library)
                                : make_synthetic_library(opt.synthetic_bands, 2 * opt.m_library, opt.seed);
  const auto scene = generate_scene(full, cfg);

  const fs::path dir = opt.out.empty() ? default_output("synth") : opt.out;
  fs::create_directories(dir);
  const json config = {{"height", cfg.height},         {"width", cfg.width},
                       {"m_library", cfg.m_library},   {"m_active", cfg.m_active},
                       {"patch_size", cfg.patch_size}, {"snr_db", real_or_inf(cfg.snr_db)},
                       {"preset", opt.preset}};
  json metadata = {{"generator", kGeneratorName}, {"seed", cfg.seed}, {"config", config}};
  if (!opt.preset.empty()) {
    metadata["caveat"] =
        "preset matches the DC1/DC2 image size and active count only; its abundance maps are a seeded "
        "patch-and-blur stand-in";
  }
  io::save_cube(scene.cube, dir / "cube.bin", metadata);
  io::save_matrix_csv(scene.truth.values, dir / "truth.csv");
  io::save_library(scene.library, dir / "library.csv");
  {
    std::ofstream ids(dir / "active_ids.csv");
    ids << "index,name\n";
    for (const auto id : scene.active_ids) ids << id << ',' << scene.library.names()[id] << '\n';
    if (!ids) throw Error("write to " + (dir / "active_ids.csv").string() + " failed");
  }

  json params = config;
  params["generator"] = kGeneratorName;
  if (!opt.library) {
    params["synthetic_library"] = {{"bands", opt.synthetic_bands}, {"count", 2 * opt.m_library}};
  }
  if (metadata.contains("caveat")) params["caveat"] = metadata["caveat"];
  io::write_json(make_manifest("synth", params,
                               {{"library", opt.library ? json(opt.library->string()) : json(nullptr)}},
                               {{"cube", (dir / "cube.bin").string()},
                                {"header", io::header_path_for(dir / "cube.bin").string()},
                                {"truth", (dir / "truth.csv").string()},
                                {"library", (dir / "library.csv").string()},
                                {"active_ids", (dir / "active_ids.csv").string()}},
                               cfg.seed),
                 dir / "manifest.json");
  std::cout << "synth: " << cfg.height << "x" << cfg.width << "x" << scene.cube.bands() << " cube, "
            << cfg.m_active << " active of " << cfg.m_library << ", written to " << dir.string() << "\n";
  return 0;
}

int run_segment(const SegmentOptions& opt) {
  const auto cube = io::load_cube(opt.cube);
  if (opt.size < 1 || opt.size > std::max(cube.height(), cube.width())) {
    throw UsageError("--size " + std::to_string(opt.size) + " must be between 1 and the larger image dimension (" +
                     std::to_string(std::max(cube.height(), cube.width())) + ")");
  }
  SlicParams params;
  params.superpixel_size = opt.size;
  params.compactness = opt.compactness;
  try {
    params.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  const auto map = segment(cube, params);
  const fs::path out = opt.out.empty() ? default_output("segment") / "labels.csv" : opt.out;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::save_labels(map, out);
  fs::path manifest = out;
  manifest.replace_extension(".manifest.json");
  io::write_json(make_manifest("segment",
                               {{"size", opt.size},
                                {"compactness", opt.compactness},
                                {"max_iters", params.max_iters},
                                {"min_region_fraction", params.min_region_fraction},
                                {"superpixels", map.region_count()}},
                               {{"cube", opt.cube.string()}}, {{"labels", out.string()}}, std::nullopt),
                 manifest);
  std::cout << "superpixels: " << map.region_count() << "\n";
  return 0;
}

int run_unmix(const UnmixOptions& in) {
  UnmixOptions opt = in;
  if (!opt.weights_preset.empty()) {
    const auto it = weight_presets().find(opt.weights_preset);
    if (it == weight_presets().end()) throw UsageError("unknown --weights-preset '" + opt.weights_preset + "'");
    if (!opt.lambda_s) opt.lambda_s = it->second.first;
    if (!opt.lambda_g) opt.lambda_g = it->second.second;
  }
  if (!opt.lambda_s || !opt.lambda_g)
    throw UsageError("--lambda-s and --lambda-g are required unless --weights-preset is given");

  const auto problem = load_problem(opt);
  const fs::path dir = opt.out.empty() ? default_output("unmix") : opt.out;
  auto outcome = run_solver(problem, opt, *opt.lambda_s, *opt.lambda_g, dir);
  if (problem.segmented) {
    io::save_labels(problem.labels, dir / "labels.csv");
    outcome.outputs["labels"] = (dir / "labels.csv").string();
  }

  json params = unmix_params(opt);
  params["lambda_s"] = *opt.lambda_s;
  params["lambda_g"] = *opt.lambda_g;
  params["weights_preset"] = opt.weights_preset;
  params["superpixels"] = problem.labels.region_count();
  params["iterations"] = outcome.result.record.iterations();
  params["wall_time_s"] = outcome.wall_seconds;
  if (outcome.result.record.tail_change) params["tail_change"] = *outcome.result.record.tail_change;
  io::write_json(make_manifest("unmix", params, unmix_inputs(opt), outcome.outputs, std::nullopt),
                 dir / "manifest.json");

  std::cout << "superpixels: " << problem.labels.region_count() << "\n"
            << "outer iterations: " << outcome.result.record.iterations() << "\n"
            << "wall time: " << outcome.wall_seconds << " s\n";
  if (outcome.report) {
    std::cout << "sre_db: " << outcome.report->sre.to_string() << "\n"
              << "rmse: " << io::format_real(outcome.report->rmse) << "\n";
  }
  return 0;
}

int run_eval(const EvalOptions& opt) {
  const auto format = opt.format == "json" ? io::ReportFormat::kJson : io::ReportFormat::kCsv;
  if (opt.format != "csv" && opt.format != "json") throw UsageError("--format must be csv or json");
  const Matrix truth = io::load_matrix_csv(opt.truth);
  const Matrix est = io::load_matrix_csv(opt.est);
  if (truth.rows() != est.rows() || truth.cols() != est.cols()) {
    throw ShapeError(opt.truth.string() + " is " + std::to_string(truth.rows()) + "x" + std::to_string(truth.cols()) +
                     " but " + opt.est.string() + " is " + std::to_string(est.rows()) + "x" +
                     std::to_string(est.cols()));
  }
  const auto report = evaluate(truth, est);
  if (opt.out) {
    if (opt.out->has_parent_path()) fs::create_directories(opt.out->parent_path());
    std::ofstream out(*opt.out);
    io::write_report(report, out, format);
    if (!out) throw Error("write to " + opt.out->string() + " failed");
    fs::path manifest = *opt.out;
    manifest.replace_extension(".manifest.json");
    io::write_json(make_manifest("eval", {{"format", opt.format}},
                                 {{"truth", opt.truth.string()}, {"est", opt.est.string()}},
                                 {{"report", opt.out->string()}}, std::nullopt),
                   manifest);
  } else {
    io::write_report(report, std::cout, format);
  }
  return 0;
}

int run_sweep(const SweepOptions& opt) {
  if (!opt.unmix.truth) throw UsageError("sweep needs --truth to score each grid point");
  const auto grid = read_grid(opt.grid);
  const auto problem = load_problem(opt.unmix);
  const fs::path dir = opt.unmix.out.empty() ? default_output("sweep") : opt.unmix.out;
  fs::create_directories(dir);

  struct Row {
    double lambda_s, lambda_g;
    std::optional<EvalReport> report;
    double wall = 0.0;
    std::string message;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [ls, lg] = grid[i];
    Row row{ls, lg, std::nullopt, 0.0, {}};
    try {
      const auto outcome = run_solver(problem, opt.unmix, ls, lg, dir / ("run_" + std::to_string(i)));
      row.report = outcome.report;
      row.wall = outcome.wall_seconds;
    } catch (const std::exception& e) {
      row.message = e.what();
    }
    std::cerr << "[" << (i + 1) << "/" << grid.size() << "] lambda_s=" << ls << " lambda_g=" << lg << ": "
              << (row.report ? "sre_db " + row.report->sre.to_string() : "failed: " + row.message) << "\n";
    rows.push_back(std::move(row));
  }

  // First occurrence of the largest SRE wins.
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].report && (!best || rows[i].report->sre.db() > rows[*best].report->sre.db())) best = i;
  }

  const auto csv_path = dir / "sweep.csv";
  std::ofstream csv(csv_path);
  csv << "run,lambda_s,lambda_g,sre_db,rmse,wall_time_s,status,best,message\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv << i << ',' << io::format_real(r.lambda_s) << ',' << io::format_real(r.lambda_g) << ',';
    if (r.report) {
      csv << r.report->sre.to_string() << ',' << io::format_real(r.report->rmse) << ',' << io::format_real(r.wall)
          << ",ok,";
    } else {
      csv << ",,,failed,";
    }
    std::string msg = r.message;
    for (auto& ch : msg)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    csv << (best && *best == i ? 1 : 0) << ',' << msg << '\n';
  }
  if (!csv) throw Error("write to " + csv_path.string() + " failed");

  json params = unmix_params(opt.unmix);
  params["grid"] = json::array();
  for (const auto& [ls, lg] : grid) params["grid"].push_back({ls, lg});
  params["superpixels"] = problem.labels.region_count();
  json inputs = unmix_inputs(opt.unmix);
  inputs["grid"] = opt.grid.string();
  json outputs = {{"table", csv_path.string()}, {"best_run", best ? json(*best) : json(nullptr)}};
  io::write_json(make_manifest("sweep", params, inputs, outputs, std::nullopt), dir / "manifest.json");

  if (best) {
    std::cout << "best: lambda_s=" << rows[*best].lambda_s << " lambda_g=" << rows[*best].lambda_g
              << " sre_db=" << rows[*best].report->sre.to_string() << "\n";
  } else {
    std::cout << "every grid point failed\n";
  }
  std::cout << "table: " << csv_path.string() << "\n";
  return best ? 0 : 1;
}

}  // namespace sbglsu::cli
