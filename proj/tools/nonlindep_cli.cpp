// Command-line front end: synth, calibrate, analyze, extract, fields.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "nonlindep/analysis.hpp"
#include "nonlindep/calibration.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/grid_io.hpp"
#include "nonlindep/pipeline.hpp"
#include "nonlindep/synth.hpp"

namespace fs = std::filesystem;
using namespace nonlindep;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) fail(ErrorCode::io, "cannot write " + p.string());
}

std::pair<std::size_t, std::size_t> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(text);
    return {std::stoul(text.substr(0, comma)), std::stoul(text.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(ErrorCode::configuration, "pair must look like i,j: '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::configuration, "not a number: '" + item + "'");
    }
  }
  return out;
}

void log_line(const std::string& m) { std::cerr << "[nonlindep] " << m << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear dependence analysis of gridded time series"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic grid");
  std::string synth_spec, synth_out, synth_format = "flatbin";
  synth->add_option("--spec", synth_spec, "SynthSpec JSON file")->required();
  synth->add_option("--out", synth_out, "Output grid path")->required();
  synth->add_option("--format", synth_format, "flatbin or csv");

  // calibrate
  auto* calib = app.add_subcommand("calibrate", "Build an MI calibration curve");
  std::size_t cal_length = 0, cal_replicates = kDefaultCalibrationReplicates;
  int cal_bins = 8, cal_threads = 1;
  std::uint64_t cal_seed = 0;
  std::string cal_rho, cal_out;
  calib->add_option("--length", cal_length, "Series length T")->required();
  calib->add_option("--bins", cal_bins, "Bins per axis");
  calib->add_option("--replicates", cal_replicates, "Samples per grid point");
  calib->add_option("--rho-grid", cal_rho, "Comma-separated correlations");
  calib->add_option("--seed", cal_seed, "Seed");
  calib->add_option("--threads", cal_threads, "Worker threads");
  calib->add_option("--out", cal_out, "Output JSON path")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Run the full analysis");
  std::string an_config, an_input, an_format, an_stages, an_calibration, an_out;
  int an_bins = 0, an_threads = 0;
  std::size_t an_surr = 0, an_scatter = 0, an_cal_reps = 0;
  std::uint64_t an_seed = 0;
  double an_alpha = 0.0;
  bool an_drop_poles = false, an_summary_stdout = false;
  std::vector<std::string> an_pairs;
  analyze->add_option("--config", an_config, "RunConfig JSON file");
  analyze->add_option("--input", an_input, "Input grid");
  analyze->add_option("--format", an_format, "flatbin or csv");
  analyze->add_option("--stages", an_stages,
                      "Comma-separated stages (anomaly,gaussianize,varnorm,detrend); 'none' for raw");
  analyze->add_option("--bins", an_bins, "Bins per axis");
  analyze->add_option("--calibration", an_calibration, "Saved calibration curve");
  analyze->add_option("--calibration-replicates", an_cal_reps, "Replicates when building");
  auto* seed_opt = analyze->add_option("--seed", an_seed, "Surrogate master seed");
  analyze->add_option("--surrogates", an_surr, "Number of surrogates");
  analyze->add_option("--alpha", an_alpha, "Significance level");
  analyze->add_option("--out", an_out, "Output directory");
  analyze->add_option("--threads", an_threads, "Worker threads");
  analyze->add_option("--scatter-sample", an_scatter, "Random pairs for scatter.csv");
  analyze->add_option("--pair", an_pairs, "Dossier pair i,j (repeatable)");
  analyze->add_flag("--drop-poles", an_drop_poles, "Remove nodes at |lat| = 90");
  analyze->add_flag("--summary-stdout", an_summary_stdout, "Print summary JSON");

  // extract
  auto* extract = app.add_subcommand("extract", "Write one pair's dossier from a run");
  std::string ex_run, ex_pair, ex_out;
  extract->add_option("--run", ex_run, "Run directory")->required();
  extract->add_option("--pair", ex_pair, "Pair i,j")->required();
  extract->add_option("--out", ex_out, "Output .json (a .csv is written alongside)");

  // fields
  auto* fields = app.add_subcommand("fields", "Recompute node fields from a run");
  std::string fl_run, fl_out;
  fields->add_option("--run", fl_run, "Run directory")->required();
  fields->add_option("--out", fl_out, "Output directory (default: the run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_code(ErrorCode::configuration);
  }

  try {
    if (synth->parsed()) {
      const SynthSpec spec = synth_spec_from_json(read_file(synth_spec));
      save_grid(generate(spec), synth_out, grid_format_from_string(synth_format),
                synth_spec_to_json(spec));
      log_line("wrote " + synth_out);
    } else if (calib->parsed()) {
      const auto grid = cal_rho.empty() ? default_rho_grid() : parse_list(cal_rho);
      const auto curve =
          build_calibration(cal_length, cal_bins, grid, cal_replicates, cal_seed, cal_threads);
      save_calibration(curve, cal_out);
      log_line("wrote " + cal_out);
    } else if (analyze->parsed()) {
      RunConfig c;
      if (!an_config.empty()) {
        c = run_config_from_json(read_file(an_config), fs::path(an_config).parent_path());
      }
      if (!an_input.empty()) c.input = an_input;
      if (!an_format.empty()) c.format = grid_format_from_string(an_format);
      if (!an_stages.empty()) {
        std::vector<StageKind> kinds;
        if (an_stages != "none") {
          const auto parsed = PreprocessPipeline::parse(an_stages);
          for (const auto& s : parsed.stages()) kinds.push_back(s.kind);
        }
        c.stages = kinds;
      }
      if (an_bins) c.bins = an_bins;
      if (!an_calibration.empty()) c.calibration_path = fs::path(an_calibration);
      if (an_cal_reps) c.calibration_replicates = an_cal_reps;
      if (*seed_opt) c.seed = an_seed;
      if (an_surr) c.n_surr = an_surr;
      if (an_alpha != 0.0) c.alpha = an_alpha;
      if (!an_out.empty()) c.out_dir = an_out;
      if (an_threads) c.threads = an_threads;
      if (an_scatter) c.scatter_sample = an_scatter;
      if (an_drop_poles) c.drop_poles = true;
      for (const auto& p : an_pairs) c.pairs.push_back(parse_pair(p));
      const auto bundle = run(c, log_line);
      if (an_summary_stdout) std::cout << bundle.summary_json;
    } else if (extract->parsed()) {
      const fs::path run_dir = ex_run;
      const auto cfg = load_run_config(run_dir);
      const auto [i, j] = parse_pair(ex_pair);
      const auto grid = prepare_grid(cfg);
      const auto curve = load_calibration(run_dir / "calibration.json");
      const auto d = extract_pair(grid, i, j, cfg.bins, curve);
      fs::path out = ex_out.empty()
                         ? run_dir / ("pair_" + std::to_string(i) + "_" + std::to_string(j) + ".json")
                         : fs::path(ex_out);
      write_file(out, dossier_to_json(d));
      write_file(fs::path(out).replace_extension(".csv"), dossier_to_csv(d));
      log_line("wrote " + out.string());
    } else if (fields->parsed()) {
      const fs::path out = fl_out.empty() ? fs::path(fl_run) : fs::path(fl_out);
      fs::create_directories(out);
      for (const auto& f : fields_from_run(fl_run)) {
        save_field(f, out / (std::string(to_string(f.kind)) + ".csv"));
      }
      log_line("wrote fields to " + out.string());
    }
  } catch (const Error& e) {
    std::cerr << "nonlindep: " << to_string(e.code()) << ": " << e.what() << std::endl;
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "nonlindep: " << e.what() << std::endl;
    return exit_code(ErrorCode::io);
  }
  return 0;
}
