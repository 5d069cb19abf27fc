#include "nonlindep/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "nonlindep/rng.hpp"

namespace nonlindep {

using nlohmann::json;

std::vector<double> default_rho_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(k * 0.05);
  return grid;
}

std::vector<std::pair<double, double>> pool_adjacent_violators(
    std::vector<std::pair<double, double>> knots) {
  struct Block {
    double raw_sum;
    double true_sum;
    std::size_t count;
    bool anchored;
    double raw() const { return raw_sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    blocks.push_back({knots[k].first, knots[k].second, 1, k == 0});
    while (blocks.size() > 1 &&
           !(blocks[blocks.size() - 2].raw() < blocks.back().raw())) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      prev.raw_sum += top.raw_sum;
      prev.true_sum += top.true_sum;
      prev.count += top.count;
      prev.anchored = prev.anchored || top.anchored;
    }
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) {
    const double truth =
        b.anchored ? 0.0 : b.true_sum / static_cast<double>(b.count);
    out.emplace_back(b.raw(), truth);
  }
  return out;
}

CalibrationCurve build_calibration(std::size_t length, int bins,
                                   std::span<const double> rho_grid,
                                   std::size_t replicates, std::uint64_t seed,
                                   int threads) {
  if (replicates < 100) {
    fail(ErrorCode::configuration,
         "calibration needs at least 100 replicates, got " +
             std::to_string(replicates));
  }
  if (rho_grid.size() < 2 || rho_grid.front() != 0.0) {
    fail(ErrorCode::configuration,
         "calibration rho grid must start at 0 and hold at least 2 points");
  }
  for (std::size_t g = 1; g < rho_grid.size(); ++g) {
    if (!(rho_grid[g] > rho_grid[g - 1]) || !(rho_grid[g] < 1.0)) {
      fail(ErrorCode::configuration,
           "calibration rho grid must increase strictly within [0, 1)");
    }
  }
  const MiKernel kernel(length, bins);
  const std::size_t G = rho_grid.size();
  std::vector<double> raw(G * replicates);
  const auto total = static_cast<std::ptrdiff_t>(G * replicates);
#pragma omp parallel num_threads(std::max(1, threads))
  {
    std::vector<double> x(length), y(length);
    std::vector<std::uint8_t> lx(length), ly(length);
#pragma omp for schedule(static)
    for (std::ptrdiff_t job = 0; job < total; ++job) {
      const auto g = static_cast<std::size_t>(job) / replicates;
      const auto r = static_cast<std::size_t>(job) % replicates;
      const double rho = rho_grid[g];
      const double c = std::sqrt(1.0 - rho * rho);
      Rng rng(derive_seed(derive_seed(seed, g), r));
      for (std::size_t t = 0; t < length; ++t) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        x[t] = z1;
        y[t] = rho * z1 + c * z2;
      }
      const BinLabels bx = equiquantal_bins(x, bins);
      const BinLabels by = equiquantal_bins(y, bins);
      raw[static_cast<std::size_t>(job)] =
          kernel(bx.labels.data(), by.labels.data());
    }
  }
  std::vector<std::pair<double, double>> knots;
  for (std::size_t g = 0; g < G; ++g) {
    double sum = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) sum += raw[g * replicates + r];
    knots.emplace_back(sum / static_cast<double>(replicates),
                       gaussian_mi(rho_grid[g]));
  }
  CalibrationCurve curve;
  curve.length = length;
  curve.bins = bins;
  curve.seed = seed;
  curve.replicates = replicates;
  curve.knots = pool_adjacent_violators(std::move(knots));
  return curve;
}

double calibrate(double raw_mi, const CalibrationCurve& curve) {
  const auto& k = curve.knots;
  if (k.empty()) fail(ErrorCode::configuration, "calibration curve has no knots");
  if (raw_mi <= k.front().first) return 0.0;
  if (k.size() == 1) return k.front().second;
  auto it = std::upper_bound(
      k.begin(), k.end(), raw_mi,
      [](double v, const std::pair<double, double>& knot) { return v < knot.first; });
  std::size_t hi = static_cast<std::size_t>(it - k.begin());
  if (hi >= k.size()) hi = k.size() - 1;
  const auto& [x0, y0] = k[hi - 1];
  const auto& [x1, y1] = k[hi];
  const double value = y0 + (raw_mi - x0) * (y1 - y0) / (x1 - x0);
  return std::max(0.0, value);
}

void check_calibration_key(const CalibrationCurve& curve, std::size_t length,
                           int bins) {
  if (curve.length != length || curve.bins != bins) {
    fail(ErrorCode::consistency,
         "calibration curve built for (T=" + std::to_string(curve.length) +
             ", Q=" + std::to_string(curve.bins) + ") used with (T=" +
             std::to_string(length) + ", Q=" + std::to_string(bins) + ")");
  }
}

double calibrate(double raw_mi, const CalibrationCurve& curve,
                 std::size_t length, int bins) {
  check_calibration_key(curve, length, bins);
  return calibrate(raw_mi, curve);
}

std::string calibration_to_json(const CalibrationCurve& curve) {
  json j;
  j["T"] = curve.length;
  j["Q"] = curve.bins;
  j["seed"] = curve.seed;
  j["replicates"] = curve.replicates;
  json knots = json::array();
  for (const auto& [raw, truth] : curve.knots) knots.push_back({raw, truth});
  j["knots"] = std::move(knots);
  return j.dump(1) + "\n";
}

CalibrationCurve calibration_from_json(const std::string& text) {
  CalibrationCurve c;
  try {
    const json j = json::parse(text);
    c.length = j.at("T").get<std::size_t>();
    c.bins = j.at("Q").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.replicates = j.at("replicates").get<std::size_t>();
    for (const auto& k : j.at("knots")) {
      c.knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::format, std::string("malformed calibration JSON: ") + e.what());
  }
  if (c.knots.empty() || c.knots.front().second != 0.0) {
    fail(ErrorCode::format, "calibration curve must start at a zero knot");
  }
  for (std::size_t k = 1; k < c.knots.size(); ++k) {
    if (!(c.knots[k].first > c.knots[k - 1].first) ||
        c.knots[k].second < c.knots[k - 1].second) {
      fail(ErrorCode::format, "calibration knots are not monotone");
    }
  }
  return c;
}

void save_calibration(const CalibrationCurve& curve,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << calibration_to_json(curve);
  if (!out) fail(ErrorCode::io, "write failed on " + path.string());
}

CalibrationCurve load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return calibration_from_json(ss.str());
}

}  // namespace nonlindep
