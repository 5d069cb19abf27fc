#include "nonlindep/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "nonlindep/rng.hpp"
#include "nonlindep/surrogates.hpp"

namespace nonlindep {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "write failed on " + path.string());
}

ordered_json provenance(const RunConfig& c) {
  ordered_json p;
  p["config_hash"] = c.hash();
  p["stages"] = json::array();
  for (auto s : c.stages) p["stages"].push_back(to_string(s));
  p["drop_poles"] = c.drop_poles;
  p["bins"] = c.bins;
  p["surrogate_master_seed"] = c.seed;
  p["n_surr"] = c.n_surr;
  p["seed_derivation"] = SurrogateSpec::derivation();
  p["calibration_seed"] = c.effective_calibration_seed();
  return p;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double mean_of(const PairMatrix& m) {
  double s = 0.0;
  for (float v : m.data()) s += v;
  return m.size() ? s / static_cast<double>(m.size()) : 0.0;
}

// Stages files in a scratch directory and promotes them together.
class Staging {
 public:
  Staging(fs::path out_dir, const RunConfig& config)
      : out_(std::move(out_dir)),
        tmp_(out_ / (".partial-" + config.hash())),
        prov_(provenance(config)) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + out_.string());
    fs::remove_all(tmp_, ec);
    fs::create_directories(tmp_, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + tmp_.string());
  }
  ~Staging() {
    std::error_code ec;
    fs::remove_all(tmp_, ec);
  }

  fs::path path(const std::string& name) {
    names_.push_back(name);
    return tmp_ / name;
  }

  /// Adds "<name>.meta.json" carrying provenance and a description.
  void sidecar(const std::string& name, const std::string& what) {
    ordered_json m = prov_;
    m["artifact"] = name;
    m["content"] = what;
    write_text(path(name + ".meta.json"), m.dump(1) + "\n");
  }

  std::vector<fs::path> promote() {
    std::vector<fs::path> out;
    for (const auto& n : names_) {
      std::error_code ec;
      fs::rename(tmp_ / n, out_ / n, ec);
      if (ec) fail(ErrorCode::io, "cannot move " + n + " into " + out_.string());
      out.push_back(out_ / n);
    }
    return out;
  }

 private:
  fs::path out_;
  fs::path tmp_;
  ordered_json prov_;
  std::vector<std::string> names_;
};

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 0.5)) {
    fail(ErrorCode::configuration, "alpha must lie in (0, 0.5], got " + fmt9(alpha));
  }
  if (bins < 2 || bins > 255) {
    fail(ErrorCode::configuration, "bins must lie in [2, 255]");
  }
  if (n_surr == 0) fail(ErrorCode::configuration, "need at least one surrogate");
  significance_threshold(alpha, n_surr);
  if (threads < 1) fail(ErrorCode::configuration, "threads must be >= 1");
  if (input.empty()) fail(ErrorCode::configuration, "no input path given");
  if (!fs::exists(input)) {
    fail(ErrorCode::configuration, "input " + input.string() + " does not exist");
  }
  if (calibration_path && !fs::exists(*calibration_path)) {
    fail(ErrorCode::configuration,
         "calibration " + calibration_path->string() + " does not exist");
  }
  if (!calibration_path && calibration_replicates < 100) {
    fail(ErrorCode::configuration, "calibration needs at least 100 replicates");
  }
  PreprocessPipeline check(stages);
  (void)check;
}

std::uint64_t RunConfig::effective_calibration_seed() const {
  return calibration_seed ? *calibration_seed : derive_seed(seed, 0xCA11B);
}

std::string RunConfig::canonical_json() const {
  ordered_json j;
  j["input"] = {{"path", input.string()}, {"format", to_string(format)}};
  j["drop_poles"] = drop_poles;
  j["stages"] = json::array();
  for (auto s : stages) j["stages"].push_back(to_string(s));
  j["bins"] = bins;
  ordered_json cal;
  if (calibration_path) {
    cal["path"] = calibration_path->string();
  } else {
    cal["rho_grid"] = rho_grid;
    cal["replicates"] = calibration_replicates;
    cal["seed"] = effective_calibration_seed();
  }
  j["calibration"] = cal;
  j["surrogate"] = {{"n_surr", n_surr}, {"master_seed", seed}};
  j["alpha"] = alpha;
  ordered_json outputs;
  outputs["matrices"] = write_matrices;
  outputs["fields"] = write_fields;
  outputs["summary"] = write_summary;
  outputs["scatter_sample"] = scatter_sample;
  outputs["pairs"] = json::array();
  for (const auto& [i, k] : pairs) outputs["pairs"].push_back({i, k});
  j["output"] = outputs;
  return j.dump();
}

std::string RunConfig::hash() const { return hex64(fnv1a(canonical_json())); }

RunConfig run_config_from_json(const std::string& text, const fs::path& base_dir) {
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    const json j = json::parse(text);
    if (j.contains("input")) {
      const auto& in = j.at("input");
      if (in.is_string()) {
        c.input = resolve(in.get<std::string>());
      } else {
        c.input = resolve(in.at("path").get<std::string>());
        if (in.contains("format")) {
          c.format = grid_format_from_string(in.at("format").get<std::string>());
        }
      }
    }
    if (j.contains("format")) c.format = grid_format_from_string(j.at("format").get<std::string>());
    c.drop_poles = j.value("drop_poles", c.drop_poles);
    if (j.contains("stages")) {
      c.stages.clear();
      const auto& st = j.at("stages");
      if (st.is_string()) {
        const auto parsed = PreprocessPipeline::parse(st.get<std::string>());
        for (const auto& s : parsed.stages()) c.stages.push_back(s.kind);
      } else {
        for (const auto& s : st) c.stages.push_back(stage_from_string(s.get<std::string>()));
      }
    }
    c.bins = j.value("bins", c.bins);
    if (j.contains("calibration")) {
      const auto& cal = j.at("calibration");
      if (cal.is_string()) {
        c.calibration_path = resolve(cal.get<std::string>());
      } else {
        if (cal.contains("path")) c.calibration_path = resolve(cal.at("path").get<std::string>());
        if (cal.contains("rho_grid")) c.rho_grid = cal.at("rho_grid").get<std::vector<double>>();
        c.calibration_replicates = cal.value("replicates", c.calibration_replicates);
        if (cal.contains("seed")) c.calibration_seed = cal.at("seed").get<std::uint64_t>();
      }
    }
    if (j.contains("surrogate")) {
      const auto& s = j.at("surrogate");
      c.n_surr = s.value("n_surr", c.n_surr);
      c.seed = s.value("master_seed", c.seed);
    }
    c.seed = j.value("seed", c.seed);
    c.alpha = j.value("alpha", c.alpha);
    if (j.contains("output")) {
      const auto& o = j.at("output");
      if (o.contains("dir")) c.out_dir = resolve(o.at("dir").get<std::string>());
      c.write_matrices = o.value("matrices", c.write_matrices);
      c.write_fields = o.value("fields", c.write_fields);
      c.write_summary = o.value("summary", c.write_summary);
      c.scatter_sample = o.value("scatter_sample", c.scatter_sample);
      if (o.contains("pairs")) {
        for (const auto& p : o.at("pairs")) {
          c.pairs.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
        }
      }
    }
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    fail(ErrorCode::configuration, std::string("malformed run config: ") + e.what());
  }
  return c;
}

std::string run_config_to_json(const RunConfig& config) {
  ordered_json j = ordered_json::parse(config.canonical_json());
  j["output"]["dir"] = config.out_dir.string();
  j["threads"] = config.threads;
  return j.dump(1) + "\n";
}

TimeSeriesGrid prepare_grid(const RunConfig& config) {
  TimeSeriesGrid grid = load_grid(config.input, config.format);
  if (config.drop_poles) {
    grid = drop_poles(grid);
    grid.require_analyzable();
  }
  return PreprocessPipeline(config.stages).apply(grid, config.threads);
}

CalibrationCurve resolve_calibration(const RunConfig& config, std::size_t length) {
  if (config.calibration_path) {
    CalibrationCurve c = load_calibration(*config.calibration_path);
    check_calibration_key(c, length, config.bins);
    return c;
  }
  return build_calibration(length, config.bins, config.rho_grid,
                           config.calibration_replicates,
                           config.effective_calibration_seed(), config.threads);
}

ReportBundle run(const RunConfig& config, const LogFn& log) {
  config.validate();
  auto note = [&](const std::string& m) {
    if (log) log(m);
  };
  const int threads = config.threads;

  note("loading " + config.input.string());
  const TimeSeriesGrid grid = prepare_grid(config);
  grid.require_analyzable();
  const std::size_t n = grid.node_count();
  for (const auto& [i, j] : config.pairs) {
    if (i >= n || j >= n || i == j) {
      fail(ErrorCode::bounds, "dossier pair (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ") invalid for N=" +
                                  std::to_string(n));
    }
  }
  if (config.scatter_sample > pair_count(n)) {
    fail(ErrorCode::configuration, "scatter sample exceeds the number of pairs");
  }
  note("grid: T=" + std::to_string(grid.length()) + " N=" + std::to_string(n) +
       " stages=" + PreprocessPipeline(config.stages).describe());

  note("calibration");
  const CalibrationCurve curve = resolve_calibration(config, grid.length());

  note("data matrices");
  const PairMatrix corr = pairwise_correlation(grid, threads);
  const PairMatrix mi_raw = pairwise_mi_raw(grid, config.bins, threads);
  const PairMatrix mi = calibrate_matrix(mi_raw, curve);

  SurrogateSpec spec{config.seed, config.n_surr};
  const SurrogateStats stats = surrogate_mi_stats(
      grid, spec, config.bins, curve, mi_raw, threads,
      [&](std::size_t done, std::size_t total) {
        if (done % 10 == 0 || done == total) {
          note("surrogates " + std::to_string(done) + "/" + std::to_string(total));
        }
      });
  auto [flags, summary] = significance(stats.exceed, config.alpha, config.n_surr);

  const NodeField mi_field = node_average(mi, grid.nodes());
  const NodeField surr_field = node_average(stats.surr_mean, grid.nodes());
  auto [en_field, rel_field] = extra_normal_fields(mi_field, surr_field);

  Staging stage(config.out_dir, config);
  const ordered_json prov = provenance(config);

  {
    ordered_json r = ordered_json::parse(config.canonical_json());
    r["provenance"] = prov;
    r["grid"] = {{"T", grid.length()}, {"N", n}, {"period", grid.period()},
                 {"time_start", grid.time_start()}, {"label", grid.label()}};
    write_text(stage.path("run.json"), r.dump(1) + "\n");
  }
  save_calibration(curve, stage.path("calibration.json"));
  stage.sidecar("calibration.json", "calibration curve used by this run");
  {
    json nodes = json::array();
    for (const auto& m : grid.nodes()) nodes.push_back({{"lat", m.lat}, {"lon", m.lon}});
    write_text(stage.path("nodes.json"), nodes.dump() + "\n");
  }

  if (config.write_matrices) {
    const std::pair<const PairMatrix*, const char*> mats[] = {
        {&corr, "correlation.pmat"}, {&mi_raw, "mi_raw.pmat"},
        {&mi, "mi.pmat"},            {&stats.surr_mean, "mi_surr_mean.pmat"},
        {&stats.exceed, "exceed_count.pmat"}, {&flags, "significant.pmat"}};
    for (const auto& [m, name] : mats) {
      save_pair_matrix(*m, stage.path(name));
      stage.sidecar(name, std::string("pair matrix, kind ") + to_string(m->kind()));
    }
  }
  if (config.write_fields) {
    const NodeField* fields[] = {&mi_field, &surr_field, &en_field, &rel_field};
    for (const NodeField* f : fields) {
      const std::string name = std::string(to_string(f->kind)) + ".csv";
      save_field(*f, stage.path(name));
      stage.sidecar(name, std::string("node field ") + to_string(f->kind));
    }
  }
  if (config.scatter_sample > 0) {
    const auto pairs = sample_pairs(n, config.scatter_sample,
                                    derive_seed(config.seed, 0x5CA77E5));
    std::string text = "i,j,r,gaussian_mi,mi_raw,mi,mi_surr_mean,exceed_count\n";
    for (const auto& [i, j] : pairs) {
      const float r = corr.at(i, j);
      const double ig = std::abs(r) < 1.0f ? gaussian_mi(r) : INFINITY;
      text += std::to_string(i) + "," + std::to_string(j) + "," + fmt9(r) + "," +
              (std::isfinite(ig) ? fmt9(ig) : std::string()) + "," +
              fmt9(mi_raw.at(i, j)) + "," + fmt9(mi.at(i, j)) + "," +
              fmt9(stats.surr_mean.at(i, j)) + "," + fmt9(stats.exceed.at(i, j)) + "\n";
    }
    write_text(stage.path("scatter.csv"), text);
    stage.sidecar("scatter.csv", "random pair sample for scatter plots");
  }
  for (const auto& [i, j] : config.pairs) {
    const auto d = extract_pair(grid, i, j, config.bins, curve);
    const std::string name = "pair_" + std::to_string(i) + "_" + std::to_string(j);
    write_text(stage.path(name + ".json"), dossier_to_json(d));
    write_text(stage.path(name + ".csv"), dossier_to_csv(d));
    stage.sidecar(name + ".json", "pair dossier");
  }

  ordered_json sj;
  sj["alpha"] = summary.alpha;
  sj["n_surr"] = summary.n_surr;
  sj["threshold"] = summary.threshold;
  sj["significant_pairs"] = summary.significant_pairs;
  sj["total_pairs"] = summary.total_pairs;
  sj["fraction"] = summary.fraction;
  sj["mean_correlation"] = mean_of(corr);
  sj["mean_mi"] = mean_of(mi);
  sj["mean_mi_surr"] = mean_of(stats.surr_mean);
  sj["mean_extra_normal"] = mean_of(mi) - mean_of(stats.surr_mean);
  sj["provenance"] = prov;
  ReportBundle bundle;
  bundle.summary_json = sj.dump(1) + "\n";
  bundle.significance = summary;
  if (config.write_summary) write_text(stage.path("summary.json"), bundle.summary_json);

  bundle.files = stage.promote();
  note("done: " + std::to_string(summary.significant_pairs) + "/" +
       std::to_string(summary.total_pairs) + " significant pairs");
  return bundle;
}

RunConfig load_run_config(const fs::path& run_dir) {
  return run_config_from_json(read_text(run_dir / "run.json"));
}

std::vector<NodeMeta> load_nodes(const fs::path& path) {
  std::vector<NodeMeta> nodes;
  try {
    const json j = json::parse(read_text(path));
    for (const auto& n : j) {
      nodes.push_back({n.at("lat").get<double>(), n.at("lon").get<double>(), nodes.size()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::format, "malformed node list " + path.string() + ": " + e.what());
  }
  return nodes;
}

std::vector<NodeField> fields_from_run(const fs::path& run_dir) {
  const auto nodes = load_nodes(run_dir / "nodes.json");
  const PairMatrix mi = load_pair_matrix(run_dir / "mi.pmat");
  const PairMatrix surr = load_pair_matrix(run_dir / "mi_surr_mean.pmat");
  const NodeField a = node_average(mi, nodes);
  const NodeField b = node_average(surr, nodes);
  auto [en, rel] = extra_normal_fields(a, b);
  return {a, b, std::move(en), std::move(rel)};
}

}  // namespace nonlindep
