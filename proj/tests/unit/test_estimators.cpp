#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "oracles.hpp"

using namespace nonlindep;

TEST(Pearson, Examples) {
  EXPECT_DOUBLE_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0);
  EXPECT_DOUBLE_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{6, 4, 2}), -1.0);
  // cov = 4/4, var = 5/4 each.
  EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_THROW(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), Error);
}

TEST(Pearson, AffineInvarianceSymmetryAndOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = oracle::gaussian_noise(200, seed);
    auto y = oracle::gaussian_noise(200, seed + 100);
    for (std::size_t t = 0; t < 200; ++t) y[t] += 0.3 * x[t];
    const double r = pearson(x, y);
    EXPECT_NEAR(r, oracle::pearson(x, y), 1e-14);
    EXPECT_EQ(r, pearson(y, x));
    std::vector<double> xa(x), neg(y);
    for (auto& v : xa) v = 4.5 * v - 17.0;
    for (auto& v : neg) v = -v;
    EXPECT_NEAR(pearson(xa, y), r, 1e-12);
    EXPECT_EQ(pearson(x, neg), -r);
  }
}

TEST(EquiquantalBins, ExactOccupancyAndStableTies) {
  auto x = oracle::gaussian_noise(720, 1);
  const auto b = equiquantal_bins(x, 8);
  std::vector<int> counts(8, 0);
  for (auto l : b.labels) ++counts[l];
  for (int c : counts) EXPECT_EQ(c, 90);

  const auto ties = equiquantal_bins(std::vector<double>{1, 1, 1, 1, 2, 2, 2, 2}, 2);
  EXPECT_EQ(ties.labels, (std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1, 1, 1}));
  const auto mixed = equiquantal_bins(std::vector<double>{2, 1, 2, 1, 2, 1}, 3);
  EXPECT_EQ(mixed.labels, (std::vector<std::uint8_t>{1, 0, 2, 0, 2, 1}));

  EXPECT_THROW(equiquantal_bins(std::vector<double>{1, 2, 3}, 8), Error);
}

TEST(EquiquantalBins, MatchesRankOracleAndMonotoneMaps) {
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t T = 8 + eng() % 200;
    const int Q = 2 + static_cast<int>(eng() % 9);
    if (T < static_cast<std::size_t>(Q)) continue;
    std::vector<double> x(T);
    // Coarse values so that ties occur.
    for (auto& v : x) v = static_cast<double>(eng() % 13);
    const auto b = equiquantal_bins(x, Q);
    const auto o = oracle::equiquantal(x, Q);
    for (std::size_t t = 0; t < T; ++t) ASSERT_EQ(b.labels[t], o[t]);
    std::vector<int> counts(Q, 0);
    for (auto l : b.labels) ++counts[l];
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    EXPECT_LE(*hi - *lo, 1);
    std::vector<double> ex(x);
    for (auto& v : ex) v = std::exp(v);
    EXPECT_EQ(equiquantal_bins(ex, Q).labels, b.labels);
  }
}

TEST(MutualInformation, IdenticalSeriesGiveLnQ) {
  const auto x = oracle::gaussian_noise(720, 2);
  const auto b = equiquantal_bins(x, 8);
  EXPECT_NEAR(mutual_information_binned(b, b), std::log(8.0), 1e-12);
  EXPECT_NEAR(std::log(8.0), 2.0794, 5e-5);
}

TEST(MutualInformation, MatchesDefinitionOracleAndKernel) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto x = oracle::gaussian_noise(300, seed);
    auto y = oracle::gaussian_noise(300, seed + 1000);
    for (std::size_t t = 0; t < 300; ++t) y[t] += 0.1 * static_cast<double>(seed) * x[t] * x[t];
    const int Q = 2 + static_cast<int>(seed % 10);
    const auto bx = equiquantal_bins(x, Q);
    const auto by = equiquantal_bins(y, Q);
    const double mi = mutual_information_binned(bx, by);
    EXPECT_NEAR(mi, oracle::plugin_mi(oracle::equiquantal(x, Q), oracle::equiquantal(y, Q)), 1e-12);
    EXPECT_GE(mi, 0.0);
    EXPECT_LE(mi, std::log(static_cast<double>(Q)));
    const MiKernel kernel(300, Q);
    EXPECT_EQ(kernel(bx.labels.data(), by.labels.data()), mi);
    EXPECT_EQ(kernel(by.labels.data(), bx.labels.data()), mi);
    EXPECT_EQ(mutual_information_binned(by, bx), mi);
  }
}

TEST(MutualInformation, IndependentLabelsCarryPluginBias) {
  // Monte Carlo over independent series: the first-order plug-in bias is
  // (Q-1)^2 / (2T) = 0.0340 nats for T=720, Q=8.
  double sum = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    const auto bx = equiquantal_bins(oracle::gaussian_noise(720, 2 * r), 8);
    const auto by = equiquantal_bins(oracle::gaussian_noise(720, 2 * r + 1), 8);
    sum += mutual_information_binned(bx, by);
  }
  EXPECT_NEAR(sum / reps, 49.0 / 1440.0, 0.003);
}

TEST(MutualInformation, LengthMismatch) {
  BinLabels a{{0, 1, 0, 1}, 2};
  BinLabels b{{0, 1, 0}, 2};
  EXPECT_THROW(mutual_information_binned(a, b), Error);
}

TEST(GaussianMi, ClosedForm) {
  EXPECT_EQ(gaussian_mi(0.0), 0.0);
  EXPECT_NEAR(gaussian_mi(0.5), 0.14384, 5e-6);
  EXPECT_NEAR(gaussian_mi(0.5), -0.5 * std::log(0.75), 1e-15);
  EXPECT_EQ(gaussian_mi(-0.5), gaussian_mi(0.5));
  EXPECT_THROW(gaussian_mi(1.0), Error);
  EXPECT_THROW(gaussian_mi(-1.2), Error);
  double prev = -1.0;
  for (int k = 0; k < 99; ++k) {
    const double rho = k / 100.0;
    const double v = gaussian_mi(rho);
    EXPECT_GT(v, prev);
    // Convexity: midpoint below chord.
    if (k > 0 && k < 98) {
      EXPECT_LE(v, 0.5 * (gaussian_mi(rho - 0.01) + gaussian_mi(rho + 0.01)) + 1e-15);
    }
    prev = v;
  }
}

TEST(ExtraNormal, PlainDifference) {
  EXPECT_EQ(extra_normal(0.4, 0.4), 0.0);
  EXPECT_NEAR(extra_normal(0.73, 0.45), 0.28, 1e-15);
  EXPECT_LT(extra_normal(0.1, 0.2), 0.0);
}

TEST(LabelSet, MatchesPerSeriesBinning) {
  const auto v = oracle::gaussian_noise(100 * 5, 8);
  const LabelSet set(v, 100, 5, 6);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto b = equiquantal_bins(std::span<const double>(v).subspan(i * 100, 100), 6);
    EXPECT_EQ(set.labels(i).labels, b.labels);
  }
}
