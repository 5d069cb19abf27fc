#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonlindep/error.hpp"
#include "nonlindep/pipeline.hpp"
#include "nonlindep/synth.hpp"

namespace fs = std::filesystem;
using namespace nonlindep;

namespace {

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "nonlindep_pipeline";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config(const fs::path& out) {
  static const fs::path input = [] {
    SynthSpec spec;
    spec.kind = SynthSpec::Kind::gaussian_ar1;
    spec.nodes = 6;
    spec.length = 240;
    spec.seed = 3;
    const fs::path p = workdir() / "input.bin";
    save_grid(generate(spec), p, GridFormat::flatbin);
    return p;
  }();
  RunConfig c;
  c.input = input;
  c.rho_grid = {0.0, 0.3, 0.6, 0.9};
  c.calibration_replicates = 100;
  c.n_surr = 19;
  c.seed = 11;
  c.scatter_sample = 5;
  c.pairs = {{0, 1}, {2, 5}};
  c.out_dir = out;
  return c;
}

ErrorCode code_of(const RunConfig& c) {
  try {
    run(c);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::io;
}

}  // namespace

TEST(Pipeline, RejectsBadConfiguration) {
  auto c = small_config(workdir() / "bad");
  c.alpha = 0.7;
  EXPECT_EQ(code_of(c), ErrorCode::configuration);
  c = small_config(workdir() / "bad");
  c.input = workdir() / "missing.bin";
  EXPECT_EQ(code_of(c), ErrorCode::configuration);
  c = small_config(workdir() / "bad");
  c.pairs = {{0, 6}};
  EXPECT_EQ(code_of(c), ErrorCode::bounds);
  EXPECT_FALSE(fs::exists(workdir() / "bad" / "summary.json"));
}

TEST(Pipeline, ConfigJsonRoundTrip) {
  const auto c = small_config(workdir() / "x");
  const auto back = run_config_from_json(run_config_to_json(c));
  EXPECT_EQ(back.canonical_json(), c.canonical_json());
  EXPECT_EQ(back.hash(), c.hash());
  auto d = c;
  d.threads = 4;
  d.out_dir = "elsewhere";
  EXPECT_EQ(d.hash(), c.hash());
  d.seed = 12;
  EXPECT_NE(d.hash(), c.hash());
}

TEST(Pipeline, ByteIdenticalAcrossRunsAndThreads) {
  const fs::path a = workdir() / "run_a";
  const fs::path b = workdir() / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto ca = small_config(a);
  auto cb = small_config(b);
  cb.threads = 3;
  const auto ra = run(ca);
  const auto rb = run(cb);
  EXPECT_EQ(ra.summary_json, rb.summary_json);
  ASSERT_EQ(ra.files.size(), rb.files.size());
  for (const char* name : {"run.json", "calibration.json", "nodes.json", "mi.pmat",
                           "mi_surr_mean.pmat", "exceed_count.pmat", "significant.pmat",
                           "correlation.pmat", "mi_raw.pmat", "mi_mean.csv",
                           "extra_normal.csv", "scatter.csv", "pair_0_1.json",
                           "pair_2_5.csv", "summary.json", "mi.pmat.meta.json"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  for (const auto& entry : fs::directory_iterator(a))
    EXPECT_EQ(entry.path().filename().string().rfind(".partial", 0), std::string::npos);

  EXPECT_EQ(ra.significance.total_pairs, 15u);
  EXPECT_EQ(ra.significance.threshold, 19u);
}

TEST(Pipeline, SavedArtifactsAreConsistent) {
  const fs::path out = workdir() / "run_c";
  fs::remove_all(out);
  const auto cfg = small_config(out);
  run(cfg);
  const auto mi = load_pair_matrix(out / "mi.pmat");
  const auto surr = load_pair_matrix(out / "mi_surr_mean.pmat");
  const auto nodes = load_nodes(out / "nodes.json");
  ASSERT_EQ(nodes.size(), 6u);

  const auto fields = fields_from_run(out);
  ASSERT_EQ(fields.size(), 4u);
  const auto saved = load_field(out / "mi_mean.csv", FieldKind::mi_mean);
  const auto direct = node_average(mi, nodes);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(saved.values[i], direct.values[i], 1e-8);
    EXPECT_NEAR(fields[2].values[i], fields[0].values[i] - fields[1].values[i], 1e-12);
  }

  const auto loaded = load_run_config(out);
  EXPECT_EQ(loaded.hash(), cfg.hash());
  const auto grid = prepare_grid(loaded);
  const auto curve = load_calibration(out / "calibration.json");
  const auto d = extract_pair(grid, 2, 5, cfg.bins, curve);
  EXPECT_EQ(d.mi_calibrated, double(mi.at(2, 5)));
  for (float v : surr.data()) EXPECT_GE(v, 0.0f);
}

TEST(Pipeline, StagesAcceptListOrString) {
  const auto a = run_config_from_json(R"({"stages":"anomaly,detrend"})");
  const auto b = run_config_from_json(R"({"stages":["anomaly","detrend"]})");
  ASSERT_EQ(a.stages.size(), 2u);
  EXPECT_EQ(a.stages, b.stages);
  EXPECT_EQ(a.stages[1], StageKind::detrend_linear);
}
