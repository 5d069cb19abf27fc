#pragma once

#include <string>
#include <vector>

#include "nonlindep/grid.hpp"

namespace nonlindep {

enum class StageKind {
  anomaly,
  marginal_gaussianize,
  seasonal_variance_norm,
  detrend_linear,
};

const char* to_string(StageKind kind) noexcept;    // "anomaly", "gaussianize", ...
StageKind stage_from_string(const std::string& name);

struct PreprocessStage {
  StageKind kind;
  std::size_t applied_order;
};

/// Subtracts, per node and calendar phase, the mean over all samples of that
/// phase. Idempotent.
TimeSeriesGrid remove_annual_cycle(const TimeSeriesGrid& grid);

/// Replaces each node series by normal scores: the sample with ascending
/// rank r (1-based, ties broken by time index) maps to
/// Phi^-1((r - 0.5) / T). Rejects constant series and series in which more
/// than T/2 samples share one value.
TimeSeriesGrid marginal_gaussianize(const TimeSeriesGrid& grid);

/// Divides every sample by the sample standard deviation (divisor n - 1) of
/// its node's calendar phase. Phase means are not subtracted; the input is
/// expected to be anomalies.
TimeSeriesGrid normalize_seasonal_variance(const TimeSeriesGrid& grid);

/// Subtracts the ordinary-least-squares line over t = 0..T-1 from each node.
TimeSeriesGrid detrend_linear(const TimeSeriesGrid& grid);

TimeSeriesGrid apply_stage(const TimeSeriesGrid& grid, StageKind kind);

/// Ordered list of stages; each kind may appear at most once.
class PreprocessPipeline {
 public:
  PreprocessPipeline() = default;
  explicit PreprocessPipeline(const std::vector<StageKind>& kinds);

  /// Parses "anomaly,gaussianize,varnorm,detrend" style lists. An empty
  /// string yields an empty pipeline.
  static PreprocessPipeline parse(const std::string& list);

  /// anomaly -> gaussianize -> varnorm -> detrend.
  static PreprocessPipeline full();

  const std::vector<PreprocessStage>& stages() const noexcept { return stages_; }
  std::string describe() const;

  TimeSeriesGrid apply(const TimeSeriesGrid& grid, int threads = 1) const;

 private:
  std::vector<PreprocessStage> stages_;
};

/// Sample standard deviation (divisor n - 1) of each calendar phase of one
/// node series.
std::vector<double> phase_std(const TimeSeriesGrid& grid, std::size_t node);

/// Standard normal quantile function.
double normal_quantile(double p);

}  // namespace nonlindep
