#include <gtest/gtest.h>

#include <cmath>

#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "nonlindep/preprocess.hpp"
#include "oracles.hpp"

using namespace nonlindep;

namespace {

std::vector<NodeMeta> nodes_for(std::size_t n) {
  std::vector<NodeMeta> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({0.0, static_cast<double>(i), i});
  return out;
}

TimeSeriesGrid one_node(std::vector<double> v, int period, int start = 1) {
  const std::size_t T = v.size();
  return TimeSeriesGrid(std::move(v), T, nodes_for(1), start, period, "");
}

TimeSeriesGrid noise_grid(std::size_t T, std::size_t N, std::uint64_t seed, int period = 12) {
  return TimeSeriesGrid(oracle::gaussian_noise(T * N, seed), T, nodes_for(N), 1, period, "");
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(AnnualCycle, HandComputedPhaseMeans) {
  const auto out = remove_annual_cycle(one_node({1, 2, 3, 4}, 2));
  const std::vector<double> expected{-1, -1, 1, 1};
  for (std::size_t t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(out.at(t, 0), expected[t]);
}

TEST(AnnualCycle, PureCycleAndConstantVanish) {
  std::vector<double> v(36);
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = std::sin(static_cast<double>(t % 12)) * 5 + 280;
  const auto cycle = remove_annual_cycle(one_node(v, 12));
  for (double x : cycle.values()) EXPECT_NEAR(x, 0.0, 1e-10 * 285);
  const auto flat = remove_annual_cycle(one_node(std::vector<double>(24, 7.0), 12));
  for (double x : flat.values()) EXPECT_EQ(x, 0.0);
}

TEST(AnnualCycle, IdempotentAndZeroPhaseMeans) {
  const auto g = noise_grid(120, 3, 1);
  const auto once = remove_annual_cycle(g);
  const auto twice = remove_annual_cycle(once);
  EXPECT_LT(max_abs_diff(once.values(), twice.values()), 1e-12);
  // Phase alignment honours time_start.
  const auto shifted = remove_annual_cycle(TimeSeriesGrid(
      std::vector<double>(g.values().begin(), g.values().end()), 120, nodes_for(3), 5, 12, ""));
  for (std::size_t p = 0; p < 12; ++p) {
    double s = 0;
    for (std::size_t t = 0; t < 120; ++t) {
      if (shifted.phase_of(t) == p) s += shifted.at(t, 1);
    }
    EXPECT_NEAR(s / 10.0, 0.0, 1e-12);
  }
}

TEST(Gaussianize, TwoSampleNormalScores) {
  const auto out = marginal_gaussianize(one_node({7, 3}, 1));
  EXPECT_NEAR(out.at(0, 0), 0.6744897501960817, 1e-12);
  EXPECT_NEAR(out.at(1, 0), -0.6744897501960817, 1e-12);
}

TEST(Gaussianize, IncreasingSeriesGivesFixedScoresAndIsIdempotent) {
  std::vector<double> v(50);
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = std::exp(0.1 * static_cast<double>(t));
  const auto out = marginal_gaussianize(one_node(v, 1));
  for (std::size_t t = 0; t < v.size(); ++t) {
    EXPECT_NEAR(out.at(t, 0), normal_quantile((t + 0.5) / 50.0), 1e-15);
  }
  const auto g = noise_grid(120, 4, 2);
  const auto a = marginal_gaussianize(g);
  const auto b = marginal_gaussianize(a);
  EXPECT_EQ(a, b);
}

TEST(Gaussianize, PreservesRanksAndMi) {
  const auto g = noise_grid(240, 3, 3);
  const auto out = marginal_gaussianize(g);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(equiquantal_bins(g.series(i)).labels, equiquantal_bins(out.series(i)).labels);
    for (std::size_t s = 0; s < 240; ++s)
      for (std::size_t t = s + 1; t < 240; t += 7)
        EXPECT_EQ(g.at(s, i) < g.at(t, i), out.at(s, i) < out.at(t, i));
  }
  const auto mi_before = mutual_information_binned(equiquantal_bins(g.series(0)), equiquantal_bins(g.series(1)));
  const auto mi_after = mutual_information_binned(equiquantal_bins(out.series(0)), equiquantal_bins(out.series(1)));
  EXPECT_EQ(mi_before, mi_after);
}

TEST(Gaussianize, DegenerateSeriesRejected) {
  try {
    marginal_gaussianize(TimeSeriesGrid({1, 2, 3, 4, 5, 5, 5, 5, 5, 5}, 5, nodes_for(2), 1, 1, ""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate);
    EXPECT_NE(std::string(e.what()).find("node 1"), std::string::npos);
  }
  // More than T/2 ties at one value.
  EXPECT_THROW(marginal_gaussianize(one_node({1, 1, 1, 2}, 1)), Error);
  // Exactly T/2 ties is accepted.
  EXPECT_NO_THROW(marginal_gaussianize(one_node({1, 1, 2, 3}, 1)));
}

TEST(SeasonalVariance, SampleStdConvention) {
  // January {-2, 2}, July {-1, 1}, remaining months {-3, 3}.
  std::vector<double> v(24);
  for (std::size_t t = 0; t < 24; ++t) v[t] = (t < 12 ? -1.0 : 1.0) * 3.0;
  v[0] = -2;
  v[12] = 2;
  v[6] = -1;
  v[18] = 1;
  const auto out = normalize_seasonal_variance(one_node(v, 12));
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(out.at(0, 0), -h, 1e-12);
  EXPECT_NEAR(out.at(12, 0), h, 1e-12);
  EXPECT_NEAR(out.at(6, 0), -h, 1e-12);
  EXPECT_NEAR(out.at(18, 0), h, 1e-12);
}

TEST(SeasonalVariance, UnitPhaseStdFixedPointAndScaleInvariance) {
  const auto g = remove_annual_cycle(noise_grid(240, 3, 4));
  const auto out = normalize_seasonal_variance(g);
  for (std::size_t i = 0; i < 3; ++i)
    for (double s : phase_std(out, i)) EXPECT_NEAR(s, 1.0, 1e-10);
  const auto again = normalize_seasonal_variance(out);
  EXPECT_LT(max_abs_diff(again.values(), out.values()), 1e-10);

  std::vector<double> scaled(g.values().begin(), g.values().end());
  for (std::size_t t = 0; t < 240; ++t) scaled[240 + t] *= 37.5;
  const auto out2 = normalize_seasonal_variance(g.with_values(scaled));
  EXPECT_LT(max_abs_diff(out2.values(), out.values()), 1e-12);
}

TEST(SeasonalVariance, ZeroSpreadPhaseNamesNodeAndPhase) {
  std::vector<double> v = oracle::gaussian_noise(48, 9);
  v[24 + 2] = 1.0;
  v[24 + 14] = 1.0;  // node 1, phase 3 constant
  try {
    normalize_seasonal_variance(TimeSeriesGrid(v, 24, nodes_for(2), 1, 12, ""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate);
    EXPECT_NE(std::string(e.what()).find("node 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("phase 3"), std::string::npos);
  }
}

TEST(Detrend, ThreePointClosedForm) {
  const auto out = detrend_linear(one_node({0, 1, 0}, 1));
  EXPECT_NEAR(out.at(0, 0), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(out.at(1, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(out.at(2, 0), -1.0 / 3.0, 1e-15);
}

TEST(Detrend, LinesVanishAndOutputIsOrthogonal) {
  std::vector<double> v(100);
  for (std::size_t t = 0; t < 100; ++t) v[t] = 3.0 - 0.25 * static_cast<double>(t);
  const auto line = detrend_linear(one_node(v, 1));
  for (double x : line.values()) EXPECT_NEAR(x, 0.0, 1e-12 * 25);

  const auto g = noise_grid(300, 4, 5);
  const auto out = detrend_linear(g);
  for (std::size_t i = 0; i < 4; ++i) {
    double s0 = 0, s1 = 0;
    for (std::size_t t = 0; t < 300; ++t) {
      s0 += out.at(t, i);
      s1 += out.at(t, i) * static_cast<double>(t);
    }
    EXPECT_NEAR(s0, 0.0, 1e-10);
    EXPECT_NEAR(s1 / 300.0, 0.0, 1e-10);
  }
  EXPECT_LT(max_abs_diff(detrend_linear(out).values(), out.values()), 1e-12);
}

TEST(Pipeline, ParsesOrderAndRejectsRepeats) {
  const auto p = PreprocessPipeline::parse("anomaly,varnorm,detrend");
  ASSERT_EQ(p.stages().size(), 3u);
  EXPECT_EQ(p.stages()[1].kind, StageKind::seasonal_variance_norm);
  EXPECT_EQ(p.stages()[2].applied_order, 2u);
  EXPECT_EQ(p.describe(), "anomaly,varnorm,detrend");
  EXPECT_THROW(PreprocessPipeline::parse("anomaly,anomaly"), Error);
  EXPECT_THROW(PreprocessPipeline::parse("smooth"), Error);
  EXPECT_EQ(PreprocessPipeline::full().describe(), "anomaly,gaussianize,varnorm,detrend");

  const auto g = noise_grid(120, 3, 6);
  const auto manual = detrend_linear(normalize_seasonal_variance(remove_annual_cycle(g)));
  EXPECT_EQ(p.apply(g, 2), manual);
}
