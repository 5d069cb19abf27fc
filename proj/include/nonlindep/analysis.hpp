#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nonlindep/calibration.hpp"
#include "nonlindep/field.hpp"
#include "nonlindep/grid.hpp"
#include "nonlindep/pair_matrix.hpp"
#include "nonlindep/surrogates.hpp"

namespace nonlindep {

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Pearson r of every node pair. Throws ErrorCode::degenerate naming the
/// first constant node.
PairMatrix pairwise_correlation(const TimeSeriesGrid& grid, int threads = 1);

/// Raw plug-in MI of every pair; labels are computed once per node.
PairMatrix pairwise_mi_raw(const TimeSeriesGrid& grid, int bins,
                           int threads = 1);

/// Calibrated MI of every pair.
PairMatrix pairwise_mi(const TimeSeriesGrid& grid, int bins,
                       const CalibrationCurve& curve, int threads = 1);

/// Calibrated matrix derived from a raw one (same float rounding as
/// pairwise_mi).
PairMatrix calibrate_matrix(const PairMatrix& raw, const CalibrationCurve& curve);

struct SurrogateStats {
  PairMatrix surr_mean;  // mean calibrated surrogate MI
  PairMatrix exceed;     // surrogates with MI strictly below the data MI
  std::vector<double> surr_mean_exact;  // float64 accumulator / n_surr
};

/// Streams the surrogate ensemble one grid at a time and accumulates, per
/// pair, the running sum of calibrated surrogate MI and the count of
/// surrogates whose MI is strictly below the data MI (ties do not count).
///
/// `data_mi` may be of kind mi_raw or mi_calibrated; the surrogate value is
/// taken in the same domain and rounded to float32 before the comparison so
/// that it matches what is stored. Accumulation runs in surrogate-index
/// order, so results are independent of `threads`.
SurrogateStats surrogate_mi_stats(const TimeSeriesGrid& grid,
                                  const SurrogateSpec& spec, int bins,
                                  const CalibrationCurve& curve,
                                  const PairMatrix& data_mi, int threads = 1,
                                  const ProgressFn& progress = {});

struct SignificanceSummary {
  double alpha = 0.05;
  std::size_t n_surr = 99;
  std::size_t threshold = 95;  // minimum exceed count
  std::size_t significant_pairs = 0;
  std::size_t total_pairs = 0;
  double fraction = 0.0;
};

/// Smallest exceed count that rejects at level alpha:
/// ceil((1 - alpha)(n_surr + 1)), i.e. 95 for (0.05, 99). Throws
/// ErrorCode::configuration when the threshold exceeds n_surr.
std::size_t significance_threshold(double alpha, std::size_t n_surr);

std::pair<PairMatrix, SignificanceSummary> significance(
    const PairMatrix& exceed, double alpha, std::size_t n_surr);

/// Per node, mean of the N - 1 entries involving it.
NodeField node_average(const PairMatrix& matrix,
                       const std::vector<NodeMeta>& nodes);

inline constexpr double kRelativeFieldFloor = 1e-6;

/// (I(i) - I_surr(i), max(I(i) - I_surr(i), 0) / I(i)); the relative entry is
/// undefined where I(i) <= 1e-6 nats.
std::pair<NodeField, NodeField> extra_normal_fields(const NodeField& mi_field,
                                                    const NodeField& surr_field);

/// Everything needed to plot one node pair.
struct PairDossier {
  std::size_t i = 0;
  std::size_t j = 0;
  NodeMeta node_i;
  NodeMeta node_j;
  int time_start = 1;
  int period = 12;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> phase_std_x;
  std::vector<double> phase_std_y;
  double r = 0.0;              // float32-rounded, as stored in PairMatrix
  double mi_raw = 0.0;         // float32-rounded
  double mi_calibrated = 0.0;  // float32-rounded
  double gaussian_mi = 0.0;    // I_G(r); +inf when |r| = 1
};

PairDossier extract_pair(const TimeSeriesGrid& grid, std::size_t i,
                         std::size_t j, int bins, const CalibrationCurve& curve);

std::string dossier_to_json(const PairDossier& d);
/// "t,x,y" rows.
std::string dossier_to_csv(const PairDossier& d);

/// k distinct pairs drawn uniformly without replacement, sorted by condensed
/// index. Throws ErrorCode::configuration when k > n(n-1)/2.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(
    std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace nonlindep
