#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nonlindep/grid.hpp"

namespace nonlindep {

inline constexpr int kDefaultBins = 8;

/// Pearson correlation, covariance over the product of standard deviations.
/// Throws ErrorCode::degenerate on a constant argument.
double pearson(std::span<const double> x, std::span<const double> y);

/// Equiquantal bin assignment of one series.
struct BinLabels {
  std::vector<std::uint8_t> labels;
  int bins = kDefaultBins;

  std::size_t length() const noexcept { return labels.size(); }
};

/// label = floor(rank * Q / T), ranks ascending from 0 with ties broken by
/// time index. Bin occupancies therefore differ by at most one and the
/// labels depend on the ranks alone. Requires 2 <= Q <= 255 and T >= Q.
BinLabels equiquantal_bins(std::span<const double> x, int bins = kDefaultBins);

/// Plug-in mutual information (nats) of two label sequences from their
/// Q x Q joint histogram. Symmetric, bit-identical under argument swap, and
/// clamped to [0, ln Q].
double mutual_information_binned(const BinLabels& x, const BinLabels& y);

/// -0.5 * ln(1 - rho^2). Throws ErrorCode::singularity for |rho| >= 1.
double gaussian_mi(double rho);

/// I(X, Y) - I_G(X, Y). Not clamped.
double extra_normal(double mi_data, double mi_linear);

/// Pair MI evaluator specialised to one (T, Q). Equiquantal labels share
/// their marginal counts, so the marginal entropy terms are computed once;
/// the result is bit-identical to mutual_information_binned().
class MiKernel {
 public:
  MiKernel(std::size_t length, int bins);

  std::size_t length() const noexcept { return length_; }
  int bins() const noexcept { return bins_; }

  /// `a` and `b` hold T labels each.
  double operator()(const std::uint8_t* a, const std::uint8_t* b) const;

 private:
  friend double mutual_information_binned(const BinLabels&, const BinLabels&);
  double finish(double joint_sum, double marginal_x, double marginal_y) const;

  std::size_t length_;
  int bins_;
  std::vector<double> nlogn_;  // n * ln n for n = 0..T
  double marginal_sum_ = 0.0;  // sum over bins of n_b ln n_b
  double log_length_ = 0.0;
  double log_bins_ = 0.0;
};

/// Equiquantal labels for every node of a grid, stored node-major.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(const TimeSeriesGrid& grid, int bins);
  LabelSet(std::span<const double> values, std::size_t length,
           std::size_t nodes, int bins);

  std::size_t length() const noexcept { return length_; }
  std::size_t node_count() const noexcept { return nodes_; }
  int bins() const noexcept { return bins_; }
  const std::uint8_t* node(std::size_t i) const {
    return labels_.data() + i * length_;
  }
  BinLabels labels(std::size_t i) const;

 private:
  std::size_t length_ = 0;
  std::size_t nodes_ = 0;
  int bins_ = kDefaultBins;
  std::vector<std::uint8_t> labels_;
};

}  // namespace nonlindep
