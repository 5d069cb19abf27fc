#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nonlindep/grid.hpp"

namespace nonlindep {

/// Bivariate normal sample, unit variances, correlation rho, i.i.d. in time.
std::pair<std::vector<double>, std::vector<double>> gen_gaussian_pair(
    double rho, std::size_t length, std::uint64_t seed);

struct CovarianceProfile {
  enum class Kind { identity, spatial_decay } kind = Kind::identity;
  double length_scale = 1.0;  // mesh units, for spatial_decay
};

/// Synthetic node coordinates on a square mesh (row-major), away from the
/// poles and unique.
std::vector<NodeMeta> synthetic_mesh(std::size_t nodes);

/// Stationary Gaussian grid: x_t = ar x_{t-1} + sqrt(1 - ar^2) e_t with
/// e_t ~ N(0, C) drawn through the Cholesky factor of C, so every node has
/// unit variance and lag-0 cross-covariance C. For spatial_decay,
/// C_ij = exp(-d_ij / length_scale) with d the mesh distance.
TimeSeriesGrid gen_gaussian_grid(const CovarianceProfile& profile,
                                 std::size_t nodes, std::size_t length,
                                 double ar, std::uint64_t seed,
                                 int period = 12);

/// Multiplies sample t by profile[(t + phase_offset) mod period].
std::vector<double> apply_seasonal_variance(std::span<const double> series,
                                            std::span<const double> profile,
                                            long phase_offset);

/// Smooth annual std profile peaking at phase 0 with factor `ratio` and at
/// phase period/2 with factor 1: exp(ln(ratio) * (1 + cos(2 pi p / P)) / 2).
std::vector<double> seasonal_profile(int period, double ratio);

/// Adds slope * t.
std::vector<double> apply_trend(std::span<const double> series, double slope);

/// Slope whose trend slope * t, t = 0..T-1, has standard deviation `sigmas`
/// (in units of the unit-variance noise it is added to).
double trend_slope_for_sigmas(double sigmas, std::size_t length);

/// standardized(x^2) + noise_scale * eps with eps standard normal.
std::vector<double> quadratic_couple(std::span<const double> x,
                                     double noise_scale, std::uint64_t seed);

struct SynthSpec {
  enum class Kind {
    gaussian_iid,
    gaussian_ar1,
    quadratic_coupled,
    seasonal_variance,
    trended,
  } kind = Kind::gaussian_iid;
  std::size_t length = 720;
  std::size_t nodes = 2;
  int period = 12;
  std::uint64_t seed = 0;
  std::map<std::string, double> params;
  std::string covariance = "identity";  // or "spatial_decay"

  double param(const std::string& name, double fallback) const;
};

/// Default confound sizes used by the acceptance reproductions.
inline constexpr double kSeasonalStdRatio = 3.0;
inline constexpr double kTrendSigmas = 2.0;

/// Builds the grid described by `spec`:
///   gaussian_iid / gaussian_ar1: gen_gaussian_grid (params: ar,
///     length_scale);
///   quadratic_coupled: nodes in pairs (2k, 2k+1), the second a
///     quadratic_couple of the first (param noise_scale, default 0.2);
///   seasonal_variance: independent unit noise, even nodes modulated by
///     seasonal_profile(ratio) and odd nodes by the same profile half a
///     period later (param ratio, default 3);
///   trended: independent unit noise plus a common-sign linear trend whose
///     standard deviation over the record is `sigmas` noise standard
///     deviations (param sigmas, default 2).
TimeSeriesGrid generate(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);
const char* to_string(SynthSpec::Kind kind) noexcept;

}  // namespace nonlindep
