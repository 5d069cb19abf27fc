#include "nonlindep/preprocess.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <omp.h>
#include <sstream>

#include "nonlindep/error.hpp"

namespace nonlindep {

namespace {

struct PhaseMoments {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<std::size_t> count;
};

PhaseMoments phase_moments(const TimeSeriesGrid& grid, std::size_t node) {
  const auto P = static_cast<std::size_t>(grid.period());
  PhaseMoments m{std::vector<double>(P, 0.0), std::vector<double>(P, 0.0),
                 std::vector<std::size_t>(P, 0)};
  auto x = grid.series(node);
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto p = grid.phase_of(t);
    m.mean[p] += x[t];
    ++m.count[p];
  }
  for (std::size_t p = 0; p < P; ++p) {
    if (m.count[p] < 2) {
      fail(ErrorCode::insufficient_data,
           "calendar phase " + std::to_string(p + 1) + " of node " +
               std::to_string(node) + " has fewer than 2 samples");
    }
    m.mean[p] /= static_cast<double>(m.count[p]);
  }
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto p = grid.phase_of(t);
    const double d = x[t] - m.mean[p];
    m.std[p] += d * d;
  }
  for (std::size_t p = 0; p < P; ++p) {
    m.std[p] = std::sqrt(m.std[p] / static_cast<double>(m.count[p] - 1));
  }
  return m;
}

template <class NodeFn>
TimeSeriesGrid transform_nodes(const TimeSeriesGrid& grid, NodeFn&& fn) {
  const std::size_t T = grid.length();
  const auto N = static_cast<std::ptrdiff_t>(grid.node_count());
  std::vector<double> out(grid.values().begin(), grid.values().end());
  // Errors thrown inside the parallel region are carried out by index so the
  // reported node is the lowest failing one regardless of schedule.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(N));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    try {
      const auto node = static_cast<std::size_t>(i);
      fn(node, std::span<double>(out).subspan(node * T, T));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return grid.with_values(std::move(out));
}

}  // namespace

const char* to_string(StageKind kind) noexcept {
  switch (kind) {
    case StageKind::anomaly: return "anomaly";
    case StageKind::marginal_gaussianize: return "gaussianize";
    case StageKind::seasonal_variance_norm: return "varnorm";
    case StageKind::detrend_linear: return "detrend";
  }
  return "?";
}

StageKind stage_from_string(const std::string& name) {
  if (name == "anomaly") return StageKind::anomaly;
  if (name == "gaussianize") return StageKind::marginal_gaussianize;
  if (name == "varnorm") return StageKind::seasonal_variance_norm;
  if (name == "detrend") return StageKind::detrend_linear;
  fail(ErrorCode::configuration, "unknown preprocessing stage '" + name + "'");
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorCode::singularity, "normal quantile needs p in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

std::vector<double> phase_std(const TimeSeriesGrid& grid, std::size_t node) {
  return phase_moments(grid, node).std;
}

TimeSeriesGrid remove_annual_cycle(const TimeSeriesGrid& grid) {
  return transform_nodes(grid, [&](std::size_t node, std::span<double> x) {
    const auto m = phase_moments(grid, node);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] -= m.mean[grid.phase_of(t)];
  });
}

TimeSeriesGrid marginal_gaussianize(const TimeSeriesGrid& grid) {
  const std::size_t T = grid.length();
  std::vector<double> scores(T);
  for (std::size_t r = 0; r < T; ++r) {
    scores[r] = normal_quantile((static_cast<double>(r) + 0.5) /
                                static_cast<double>(T));
  }
  return transform_nodes(grid, [&](std::size_t node, std::span<double> x) {
    std::vector<std::size_t> order(T);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::size_t longest_tie = 1;
    for (std::size_t k = 1, run = 1; k < T; ++k) {
      run = x[order[k]] == x[order[k - 1]] ? run + 1 : 1;
      longest_tie = std::max(longest_tie, run);
    }
    if (longest_tie == T) {
      fail(ErrorCode::degenerate,
           "node " + std::to_string(node) + " is constant");
    }
    if (2 * longest_tie > T) {
      fail(ErrorCode::degenerate,
           "node " + std::to_string(node) + " has " +
               std::to_string(longest_tie) + " tied values (more than T/2)");
    }
    for (std::size_t r = 0; r < T; ++r) x[order[r]] = scores[r];
  });
}

TimeSeriesGrid normalize_seasonal_variance(const TimeSeriesGrid& grid) {
  return transform_nodes(grid, [&](std::size_t node, std::span<double> x) {
    const auto m = phase_moments(grid, node);
    for (std::size_t p = 0; p < m.std.size(); ++p) {
      if (!(m.std[p] > 0.0)) {
        fail(ErrorCode::degenerate,
             "node " + std::to_string(node) + " has zero spread in phase " +
                 std::to_string(p + 1));
      }
    }
    for (std::size_t t = 0; t < x.size(); ++t) x[t] /= m.std[grid.phase_of(t)];
  });
}

TimeSeriesGrid detrend_linear(const TimeSeriesGrid& grid) {
  const std::size_t T = grid.length();
  if (T < 3) fail(ErrorCode::insufficient_data, "detrending needs T >= 3");
  const double tbar = static_cast<double>(T - 1) / 2.0;
  double stt = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double d = static_cast<double>(t) - tbar;
    stt += d * d;
  }
  return transform_nodes(grid, [&](std::size_t, std::span<double> x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(T);
    double sty = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      sty += (static_cast<double>(t) - tbar) * (x[t] - mean);
    }
    const double slope = sty / stt;
    for (std::size_t t = 0; t < T; ++t) {
      x[t] -= mean + slope * (static_cast<double>(t) - tbar);
    }
  });
}

TimeSeriesGrid apply_stage(const TimeSeriesGrid& grid, StageKind kind) {
  switch (kind) {
    case StageKind::anomaly: return remove_annual_cycle(grid);
    case StageKind::marginal_gaussianize: return marginal_gaussianize(grid);
    case StageKind::seasonal_variance_norm:
      return normalize_seasonal_variance(grid);
    case StageKind::detrend_linear: return detrend_linear(grid);
  }
  return grid;
}

PreprocessPipeline::PreprocessPipeline(const std::vector<StageKind>& kinds) {
  for (StageKind k : kinds) {
    for (const auto& s : stages_) {
      if (s.kind == k) {
        fail(ErrorCode::configuration,
             std::string("stage '") + to_string(k) + "' listed twice");
      }
    }
    stages_.push_back({k, stages_.size()});
  }
}

PreprocessPipeline PreprocessPipeline::parse(const std::string& list) {
  std::vector<StageKind> kinds;
  std::istringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.push_back(stage_from_string(item));
  }
  return PreprocessPipeline(kinds);
}

PreprocessPipeline PreprocessPipeline::full() {
  return PreprocessPipeline({StageKind::anomaly, StageKind::marginal_gaussianize,
                             StageKind::seasonal_variance_norm,
                             StageKind::detrend_linear});
}

std::string PreprocessPipeline::describe() const {
  std::string out;
  for (const auto& s : stages_) {
    if (!out.empty()) out += ',';
    out += to_string(s.kind);
  }
  return out;
}

TimeSeriesGrid PreprocessPipeline::apply(const TimeSeriesGrid& grid,
                                         int threads) const {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(std::max(1, threads));
  TimeSeriesGrid out = grid;
  try {
    for (const auto& s : stages_) out = apply_stage(out, s.kind);
  } catch (...) {
    omp_set_num_threads(saved);
    throw;
  }
  omp_set_num_threads(saved);
  return out;
}

}  // namespace nonlindep
