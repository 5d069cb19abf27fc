#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "nonlindep/analysis.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "nonlindep/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace nonlindep;

namespace {

const CalibrationCurve& curve_for(std::size_t T) {
  static std::map<std::size_t, CalibrationCurve> cache;
  auto it = cache.find(T);
  if (it == cache.end()) {
    const std::vector<double> grid = {0.0, 0.3, 0.6, 0.9};
    it = cache.emplace(T, build_calibration(T, 8, grid, 100, 5, 2)).first;
  }
  return it->second;
}

TimeSeriesGrid grid_from(const std::vector<std::vector<double>>& cols) {
  std::vector<double> v;
  for (const auto& c : cols) v.insert(v.end(), c.begin(), c.end());
  return TimeSeriesGrid(std::move(v), cols[0].size(), synthetic_mesh(cols.size()), 1, 12,
                        "test");
}

TimeSeriesGrid noise(std::size_t T, std::size_t N, std::uint64_t seed) {
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < N; ++i) cols.push_back(oracle::gaussian_noise(T, seed * 1000 + i));
  return grid_from(cols);
}

std::vector<NodeMeta> nodes(std::size_t n) { return synthetic_mesh(n); }

}  // namespace

TEST(PairMatrix, AddressingCoversEachPairOnce) {
  for (std::size_t n : {2u, 3u, 7u, 40u}) {
    std::vector<int> hit(pair_count(n), 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto k = condensed_index(i, j, n);
        ASSERT_LT(k, hit.size());
        ++hit[k];
        EXPECT_EQ(condensed_pair(k, n), std::make_pair(i, j));
      }
    for (int h : hit) EXPECT_EQ(h, 1);
  }
  EXPECT_EQ(pair_count(10224), 52259976u);
}

TEST(PairMatrix, SymmetricAccessAndRoundTrip) {
  PairMatrix m(4, PairKind::mi_raw);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = 0.1f * static_cast<float>(k);
  EXPECT_EQ(m.at(1, 3), m.at(3, 1));
  EXPECT_EQ(m.at(1, 3), m[condensed_index(1, 3, 4)]);
  EXPECT_THROW(m.at(2, 2), Error);
  EXPECT_THROW(m.at(0, 4), Error);

  const fs::path p = fs::temp_directory_path() / "nonlindep_pm.pmat";
  save_pair_matrix(m, p);
  EXPECT_EQ(fs::file_size(p), 16u + 4u * 6u);
  EXPECT_EQ(load_pair_matrix(p), m);

  {
    std::ofstream out(p, std::ios::binary);
    out << "XMAT";
  }
  try {
    load_pair_matrix(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format);
  }
  fs::remove(p);
}

TEST(PairwiseCorrelation, AffineAndCounts) {
  auto x = oracle::gaussian_noise(100, 1);
  std::vector<double> y(x);
  for (auto& v : y) v = 2 * v + 3;
  const auto g = grid_from({x, y, oracle::gaussian_noise(100, 2), oracle::gaussian_noise(100, 3)});
  const auto r = pairwise_correlation(g);
  EXPECT_EQ(r.size(), 6u);
  EXPECT_EQ(r.kind(), PairKind::correlation);
  EXPECT_NEAR(r.at(0, 1), 1.0f, 1e-6);
  EXPECT_NEAR(r.at(0, 2),
              oracle::pearson(x, std::vector<double>(g.series(2).begin(), g.series(2).end())),
              1e-6);
}

TEST(PairwiseCorrelation, NullSpreadAndDegenerateNode) {
  const auto g = noise(720, 30, 4);
  const auto r = pairwise_correlation(g, 2);
  std::size_t small = 0;
  for (float v : r.data()) small += std::abs(v) < 0.15f;
  EXPECT_GE(small, static_cast<std::size_t>(0.99 * r.size()));

  auto cols = std::vector<std::vector<double>>{oracle::gaussian_noise(30, 1),
                                               std::vector<double>(30, 2.0)};
  try {
    pairwise_correlation(grid_from(cols));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(PairwiseMi, MonotoneTransformAttainsMaximum) {
  const auto x = oracle::gaussian_noise(720, 5);
  std::vector<double> ex(x);
  for (auto& v : ex) v = std::exp(v);
  const auto g = grid_from({x, ex, oracle::gaussian_noise(720, 6)});
  const auto& c = curve_for(720);
  const auto mi = pairwise_mi(g, 8, c);
  EXPECT_EQ(mi.size(), 3u);
  EXPECT_EQ(mi.at(0, 1), static_cast<float>(calibrate(std::log(8.0), c)));
  EXPECT_LT(mi.at(0, 2), 0.05f);
  EXPECT_LT(mi.at(1, 2), 0.05f);
  EXPECT_EQ(mi.at(0, 2), mi.at(1, 2));

  const auto raw = pairwise_mi_raw(g, 8);
  EXPECT_EQ(calibrate_matrix(raw, c), mi);
}

TEST(PairwiseMi, NullMeanNearZeroAndCalibrationMismatch) {
  const auto g = noise(720, 20, 7);
  const auto mi = pairwise_mi(g, 8, curve_for(720), 2);
  double mean = 0, sq = 0;
  for (float v : mi.data()) {
    mean += v;
    sq += double(v) * v;
  }
  mean /= mi.size();
  const double se = std::sqrt((sq / mi.size() - mean * mean) / mi.size());
  // Calibration clamps at zero, so the mean sits just above zero.
  EXPECT_LT(mean, 0.01 + 2 * se);
  EXPECT_THROW(pairwise_mi(g, 8, curve_for(360)), Error);
}

TEST(PairwiseMi, ThreadCountInvariantAndPermutationEquivariant) {
  const auto g = noise(240, 12, 8);
  const auto& c = curve_for(240);
  const auto a = pairwise_mi(g, 8, c, 1);
  EXPECT_EQ(a, pairwise_mi(g, 8, c, 3));

  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  std::vector<std::vector<double>> cols;
  for (std::size_t i = 0; i < 12; ++i)
    cols.emplace_back(g.series(perm[i]).begin(), g.series(perm[i]).end());
  const auto pg = grid_from(cols);
  const auto b = pairwise_mi(pg, 8, c, 1);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = i + 1; j < 12; ++j) EXPECT_EQ(b.at(i, j), a.at(perm[i], perm[j]));

  const auto fa = node_average(a, g.nodes());
  const auto fb = node_average(b, pg.nodes());
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(fb.values[i], fa.values[perm[i]], 1e-12);
}

TEST(Significance, ThresholdIsExact) {
  EXPECT_EQ(significance_threshold(0.05, 99), 95u);
  EXPECT_EQ(significance_threshold(0.01, 99), 99u);
  EXPECT_EQ(significance_threshold(0.1, 19), 18u);
  try {
    significance_threshold(0.005, 99);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::configuration);
  }

  PairMatrix exceed(3, PairKind::exceed_count, {95, 94, 99});
  auto [flags, summary] = significance(exceed, 0.05, 99);
  EXPECT_EQ(flags.data(), (std::vector<float>{1, 0, 1}));
  EXPECT_EQ(summary.significant_pairs, 2u);
  EXPECT_EQ(summary.total_pairs, 3u);
  EXPECT_EQ(summary.fraction, 2.0 / 3.0);

  PairMatrix all(4, PairKind::exceed_count, std::vector<float>(6, 99));
  EXPECT_EQ(significance(all, 0.05, 99).second.fraction, 1.0);
}

TEST(NodeAverage, HandExamples) {
  const auto f = node_average(PairMatrix(3, PairKind::mi_calibrated, {0.3f, 0.1f, 0.2f}), nodes(3));
  EXPECT_NEAR(f.values[0], 0.2, 1e-7);
  EXPECT_NEAR(f.values[1], 0.25, 1e-7);
  EXPECT_NEAR(f.values[2], 0.15, 1e-7);
  EXPECT_EQ(f.kind, FieldKind::mi_mean);

  const auto two = node_average(PairMatrix(2, PairKind::mi_calibrated, {0.4f}), nodes(2));
  EXPECT_EQ(two.values[0], double(0.4f));
  EXPECT_EQ(two.values[1], double(0.4f));

  const auto zero = node_average(PairMatrix(5, PairKind::mi_surr_mean), nodes(5));
  EXPECT_EQ(zero.kind, FieldKind::mi_surr_mean);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
}

TEST(ExtraNormalFields, ArithmeticAndGuard) {
  NodeField mi{FieldKind::mi_mean, nodes(3), {0.05, 0.3, 1e-7}, {1, 1, 1}};
  NodeField surr{FieldKind::mi_surr_mean, nodes(3), {0.04, 0.35, 0.0}, {1, 1, 1}};
  auto [diff, rel] = extra_normal_fields(mi, surr);
  EXPECT_NEAR(diff.values[0], 0.01, 1e-15);
  EXPECT_NEAR(rel.values[0], 0.2, 1e-12);
  EXPECT_NEAR(diff.values[1], -0.05, 1e-15);
  EXPECT_EQ(rel.values[1], 0.0);
  EXPECT_TRUE(rel.is_defined(1));
  EXPECT_FALSE(rel.is_defined(2));
  EXPECT_TRUE(diff.is_defined(2));

  auto [same, same_rel] = extra_normal_fields(mi, mi);
  for (double v : same.values) EXPECT_EQ(v, 0.0);

  NodeField shorter{FieldKind::mi_surr_mean, nodes(2), {0, 0}, {1, 1}};
  EXPECT_THROW(extra_normal_fields(mi, shorter), Error);
}

TEST(SurrogateStats, StreamingMatchesBatchAndCounts) {
  const auto g = gen_gaussian_grid({CovarianceProfile::Kind::spatial_decay, 1.0}, 6, 120, 0.5, 3);
  const auto& c = curve_for(120);
  const auto raw = pairwise_mi_raw(g, 8);
  SurrogateSpec spec{77, 19};
  const auto stats = surrogate_mi_stats(g, spec, 8, c, raw, 2);
  EXPECT_EQ(stats.surr_mean.kind(), PairKind::mi_surr_mean);
  EXPECT_EQ(stats.exceed.kind(), PairKind::exceed_count);

  const auto ensemble = generate_ensemble(g, spec, 1);
  std::vector<double> sum(raw.size(), 0.0);
  std::vector<int> below(raw.size(), 0);
  for (const auto& s : ensemble) {
    const auto sr = pairwise_mi_raw(s, 8);
    for (std::size_t k = 0; k < sr.size(); ++k) {
      sum[k] += calibrate(sr[k], c);
      below[k] += sr[k] < raw[k];
    }
  }
  for (std::size_t k = 0; k < raw.size(); ++k) {
    EXPECT_NEAR(stats.surr_mean_exact[k], sum[k] / 19, 1e-12);
    EXPECT_EQ(stats.exceed[k], static_cast<float>(below[k]));
    EXPECT_GE(stats.surr_mean[k], 0.0f);
  }
  EXPECT_EQ(surrogate_mi_stats(g, spec, 8, c, raw, 1).surr_mean, stats.surr_mean);

  // Data MI below every surrogate value yields zero exceedances.
  PairMatrix floor_mi(6, PairKind::mi_raw);
  EXPECT_EQ(surrogate_mi_stats(g, spec, 8, c, floor_mi).exceed.data(),
            std::vector<float>(15, 0.0f));
  EXPECT_THROW(surrogate_mi_stats(g, spec, 8, c, PairMatrix(5, PairKind::mi_raw)), Error);
}

TEST(ExtractPair, MatchesMatricesBitForBit) {
  const auto g = gen_gaussian_grid({CovarianceProfile::Kind::spatial_decay, 2.0}, 5, 240, 0.3, 9);
  const auto& c = curve_for(240);
  const auto r = pairwise_correlation(g);
  const auto raw = pairwise_mi_raw(g, 8);
  const auto mi = pairwise_mi(g, 8, c);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == j) continue;
      const auto d = extract_pair(g, i, j, 8, c);
      EXPECT_EQ(d.r, double(r.at(i, j)));
      EXPECT_EQ(d.mi_raw, double(raw.at(i, j)));
      EXPECT_EQ(d.mi_calibrated, double(mi.at(i, j)));
      EXPECT_EQ(d.x.size(), 240u);
      EXPECT_EQ(d.phase_std_x.size(), 12u);
    }
  EXPECT_THROW(extract_pair(g, 1, 1, 8, c), Error);
  EXPECT_THROW(extract_pair(g, 0, 5, 8, c), Error);
  const auto d = extract_pair(g, 0, 1, 8, c);
  EXPECT_NE(dossier_to_json(d).find("\"mi_calibrated\""), std::string::npos);
  const auto csv = dossier_to_csv(d);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 241);
}

TEST(ExtractPair, IdenticalAndAntiPhasePairs) {
  const auto x = oracle::gaussian_noise(240, 10);
  const auto same = extract_pair(grid_from({x, x}), 0, 1, 8, curve_for(240));
  EXPECT_EQ(same.r, 1.0);
  EXPECT_TRUE(std::isinf(same.gaussian_mi));
  EXPECT_EQ(same.x, same.y);

  const auto profile = seasonal_profile(12, 3.0);
  const auto a = apply_seasonal_variance(oracle::gaussian_noise(240, 11), profile, 0);
  const auto b = apply_seasonal_variance(oracle::gaussian_noise(240, 12), profile, 6);
  const auto d = extract_pair(grid_from({a, b}), 0, 1, 8, curve_for(240));
  auto season = [](const std::vector<double>& s, std::size_t centre) {
    return s[(centre + 11) % 12] + s[centre] + s[(centre + 1) % 12];
  };
  EXPECT_GT(season(d.phase_std_x, 0), 2 * season(d.phase_std_x, 6));
  EXPECT_GT(season(d.phase_std_y, 6), 2 * season(d.phase_std_y, 0));
}

TEST(SamplePairs, ExhaustiveDeterministicDistinct) {
  const auto all = sample_pairs(6, 15, 3);
  ASSERT_EQ(all.size(), 15u);
  for (std::size_t k = 0; k < 15; ++k) EXPECT_EQ(all[k], condensed_pair(k, 6));

  const auto a = sample_pairs(10224, 1000, 42);
  EXPECT_EQ(a, sample_pairs(10224, 1000, 42));
  EXPECT_NE(a, sample_pairs(10224, 1000, 43));
  std::set<std::pair<std::size_t, std::size_t>> unique(a.begin(), a.end());
  EXPECT_EQ(unique.size(), 1000u);
  for (auto [i, j] : a) EXPECT_LT(i, j);

  try {
    sample_pairs(4, 7, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::configuration);
  }
}
