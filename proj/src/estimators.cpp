#include "nonlindep/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nonlindep/error.hpp"

namespace nonlindep {

namespace {

void rank_labels(std::span<const double> x, int bins, std::uint8_t* out,
                 std::vector<std::uint32_t>& order) {
  const std::size_t T = x.size();
  order.resize(T);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
  const auto Q = static_cast<std::size_t>(bins);
  for (std::size_t r = 0; r < T; ++r) {
    out[order[r]] = static_cast<std::uint8_t>(r * Q / T);
  }
}

void check_bins(std::size_t T, int bins) {
  if (bins < 2 || bins > 255) {
    fail(ErrorCode::configuration,
         "bin count must lie in [2, 255], got " + std::to_string(bins));
  }
  if (T < static_cast<std::size_t>(bins)) {
    fail(ErrorCode::insufficient_data,
         "equiquantal binning needs T >= Q, got T=" + std::to_string(T) +
             ", Q=" + std::to_string(bins));
  }
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::consistency, "pearson: series lengths differ");
  }
  const std::size_t T = x.size();
  if (T < 2) fail(ErrorCode::insufficient_data, "pearson needs T >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    mx += x[t];
    my += y[t];
  }
  mx /= static_cast<double>(T);
  my /= static_cast<double>(T);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    fail(ErrorCode::degenerate, "pearson: constant series");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

BinLabels equiquantal_bins(std::span<const double> x, int bins) {
  check_bins(x.size(), bins);
  BinLabels out;
  out.bins = bins;
  out.labels.resize(x.size());
  std::vector<std::uint32_t> order;
  rank_labels(x, bins, out.labels.data(), order);
  return out;
}

MiKernel::MiKernel(std::size_t length, int bins)
    : length_(length), bins_(bins), nlogn_(length + 1, 0.0) {
  check_bins(length, bins);
  for (std::size_t n = 1; n <= length; ++n) {
    const double v = static_cast<double>(n);
    nlogn_[n] = v * std::log(v);
  }
  const auto Q = static_cast<std::size_t>(bins);
  for (std::size_t b = 0; b < Q; ++b) {
    // number of ranks r in [0, T) with floor(r Q / T) == b
    const std::size_t lo = (b * length + Q - 1) / Q;
    const std::size_t hi = ((b + 1) * length + Q - 1) / Q;
    marginal_sum_ += nlogn_[hi - lo];
  }
  log_length_ = std::log(static_cast<double>(length));
  log_bins_ = std::log(static_cast<double>(bins));
}

double MiKernel::finish(double joint_sum, double marginal_x,
                        double marginal_y) const {
  const double mi = log_length_ + (joint_sum - (marginal_x + marginal_y)) /
                                      static_cast<double>(length_);
  return std::clamp(mi, 0.0, log_bins_);
}

namespace {

// Sum of n ln n over a Q x Q histogram in an order that is invariant under
// transposition: each off-diagonal pair (a, b), (b, a) is added as one
// commutative partial sum, so swapping the arguments is bit-identical.
double symmetric_joint_sum(const std::uint32_t* hist, std::size_t Q,
                           const std::vector<double>& nlogn) {
  double joint = 0.0;
  for (std::size_t a = 0; a < Q; ++a) {
    joint += nlogn[hist[a * Q + a]];
    for (std::size_t b = a + 1; b < Q; ++b) {
      joint += nlogn[hist[a * Q + b]] + nlogn[hist[b * Q + a]];
    }
  }
  return joint;
}

}  // namespace

double MiKernel::operator()(const std::uint8_t* a, const std::uint8_t* b) const {
  const std::size_t T = length_;
  const auto Q = static_cast<std::size_t>(bins_);
  if (Q <= 16) {
    std::uint32_t hist[256] = {};
    for (std::size_t t = 0; t < T; ++t) ++hist[a[t] * Q + b[t]];
    return finish(symmetric_joint_sum(hist, Q, nlogn_), marginal_sum_,
                  marginal_sum_);
  }
  std::vector<std::uint32_t> hist(Q * Q, 0);
  for (std::size_t t = 0; t < T; ++t) ++hist[a[t] * Q + b[t]];
  return finish(symmetric_joint_sum(hist.data(), Q, nlogn_), marginal_sum_,
                marginal_sum_);
}

double mutual_information_binned(const BinLabels& x, const BinLabels& y) {
  if (x.length() != y.length()) {
    fail(ErrorCode::consistency, "label sequences have different lengths");
  }
  if (x.bins != y.bins) {
    fail(ErrorCode::consistency, "label sequences use different bin counts");
  }
  const MiKernel kernel(x.length(), x.bins);
  const auto Q = static_cast<std::size_t>(x.bins);
  const std::size_t T = x.length();
  std::vector<std::uint32_t> hist(Q * Q, 0), mx(Q, 0), my(Q, 0);
  for (std::size_t t = 0; t < T; ++t) {
    if (x.labels[t] >= Q || y.labels[t] >= Q) {
      fail(ErrorCode::consistency, "label out of range at t=" + std::to_string(t));
    }
    ++hist[x.labels[t] * Q + y.labels[t]];
    ++mx[x.labels[t]];
    ++my[y.labels[t]];
  }
  double sx = 0.0, sy = 0.0;
  for (std::size_t b = 0; b < Q; ++b) {
    sx += kernel.nlogn_[mx[b]];
    sy += kernel.nlogn_[my[b]];
  }
  return kernel.finish(symmetric_joint_sum(hist.data(), Q, kernel.nlogn_), sx,
                       sy);
}

double gaussian_mi(double rho) {
  if (!(std::abs(rho) < 1.0)) {
    fail(ErrorCode::singularity, "gaussian_mi needs |rho| < 1");
  }
  return -0.5 * std::log1p(-rho * rho);
}

double extra_normal(double mi_data, double mi_linear) {
  return mi_data - mi_linear;
}

LabelSet::LabelSet(const TimeSeriesGrid& grid, int bins)
    : LabelSet(grid.values(), grid.length(), grid.node_count(), bins) {}

LabelSet::LabelSet(std::span<const double> values, std::size_t length,
                   std::size_t nodes, int bins)
    : length_(length), nodes_(nodes), bins_(bins), labels_(length * nodes) {
  check_bins(length, bins);
  const auto N = static_cast<std::ptrdiff_t>(nodes);
#pragma omp parallel
  {
    std::vector<std::uint32_t> order;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
      const auto node = static_cast<std::size_t>(i);
      rank_labels(values.subspan(node * length, length), bins,
                  labels_.data() + node * length, order);
    }
  }
}

BinLabels LabelSet::labels(std::size_t i) const {
  BinLabels out;
  out.bins = bins_;
  out.labels.assign(node(i), node(i) + length_);
  return out;
}

}  // namespace nonlindep
