#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nonlindep {

/// Monotone map from raw binned-MI estimates to bias-corrected nats, valid
/// for one (T, Q). Knots are strictly increasing in raw value and
/// nondecreasing in true value; the first knot's true value is 0.
struct CalibrationCurve {
  std::size_t length = 0;  // T
  int bins = 8;            // Q
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  std::vector<std::pair<double, double>> knots;  // (raw_mi, true_mi)

  friend bool operator==(const CalibrationCurve&,
                         const CalibrationCurve&) = default;
};

/// {0, 0.05, ..., 0.95}
std::vector<double> default_rho_grid();
inline constexpr std::size_t kDefaultCalibrationReplicates = 1000;

/// For each rho, averages the raw binned MI of `replicates` independent
/// bivariate-normal samples of length T and pairs it with gaussian_mi(rho).
/// Replicate r of grid point g draws from
/// derive_seed(derive_seed(seed, g), r), so the curve does not depend on
/// the thread count. Adjacent violators in raw value are pooled before the
/// knots are stored.
///
/// rho_grid must start at 0, increase strictly and stay below 1;
/// replicates must be at least 100.
CalibrationCurve build_calibration(std::size_t length, int bins,
                                   std::span<const double> rho_grid,
                                   std::size_t replicates, std::uint64_t seed,
                                   int threads = 1);

/// Piecewise-linear interpolation through the knots. Inputs at or below the
/// first knot map to 0; inputs beyond the last knot extrapolate the final
/// segment.
double calibrate(double raw_mi, const CalibrationCurve& curve);

/// As above, after checking that the curve was built for (T, Q).
double calibrate(double raw_mi, const CalibrationCurve& curve,
                 std::size_t length, int bins);

void check_calibration_key(const CalibrationCurve& curve, std::size_t length,
                           int bins);

/// Pools adjacent violators so that raw values increase strictly. Each pooled
/// block becomes one knot at the block-mean raw value and the block-mean true
/// value, except that the block containing the first knot keeps true value 0.
std::vector<std::pair<double, double>> pool_adjacent_violators(
    std::vector<std::pair<double, double>> knots);

/// JSON: {"T":int,"Q":int,"seed":int,"replicates":int,"knots":[[raw,true],...]}
std::string calibration_to_json(const CalibrationCurve& curve);
CalibrationCurve calibration_from_json(const std::string& text);
void save_calibration(const CalibrationCurve& curve,
                      const std::filesystem::path& path);
CalibrationCurve load_calibration(const std::filesystem::path& path);

}  // namespace nonlindep
