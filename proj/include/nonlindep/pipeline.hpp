#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nonlindep/analysis.hpp"
#include "nonlindep/calibration.hpp"
#include "nonlindep/grid_io.hpp"
#include "nonlindep/preprocess.hpp"

namespace nonlindep {

/// Everything one analysis run depends on. Serialized as a single JSON
/// document; command-line flags override individual fields.
struct RunConfig {
  std::filesystem::path input;
  GridFormat format = GridFormat::flatbin;
  bool drop_poles = false;
  std::vector<StageKind> stages = {StageKind::anomaly,
                                   StageKind::marginal_gaussianize,
                                   StageKind::seasonal_variance_norm,
                                   StageKind::detrend_linear};
  int bins = 8;

  // Calibration: either a saved curve or build parameters.
  std::optional<std::filesystem::path> calibration_path;
  std::vector<double> rho_grid = default_rho_grid();
  std::size_t calibration_replicates = kDefaultCalibrationReplicates;
  std::optional<std::uint64_t> calibration_seed;  // default: derived from seed

  std::uint64_t seed = 0;  // surrogate master seed
  std::size_t n_surr = 99;
  double alpha = 0.05;

  std::filesystem::path out_dir = "out";
  bool write_matrices = true;
  bool write_fields = true;
  bool write_summary = true;
  std::size_t scatter_sample = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  int threads = 1;

  /// Throws ErrorCode::configuration on out-of-range values or missing
  /// input paths.
  void validate() const;

  std::uint64_t effective_calibration_seed() const;

  /// Canonical JSON (excludes threads and the output directory, which do not
  /// affect any emitted byte).
  std::string canonical_json() const;
  /// FNV-1a 64 of canonical_json(), as 16 hex digits.
  std::string hash() const;
};

RunConfig run_config_from_json(const std::string& text,
                               const std::filesystem::path& base_dir = {});
std::string run_config_to_json(const RunConfig& config);

struct ReportBundle {
  std::string summary_json;
  SignificanceSummary significance;
  std::vector<std::filesystem::path> files;  // final locations
};

using LogFn = std::function<void(const std::string&)>;

/// load -> drop_poles? -> preprocess -> calibrate -> data matrices ->
/// surrogate statistics -> significance -> fields -> scatter sample and
/// dossiers. Files are staged in a temporary directory under out_dir and
/// moved into place only after every stage succeeded. Identical configs
/// produce identical bytes.
ReportBundle run(const RunConfig& config, const LogFn& log = {});

/// Loads the input and applies drop_poles and the configured stages.
TimeSeriesGrid prepare_grid(const RunConfig& config);

/// The calibration curve the run uses (loaded or built).
CalibrationCurve resolve_calibration(const RunConfig& config, std::size_t length);

/// Reads "<run_dir>/run.json".
RunConfig load_run_config(const std::filesystem::path& run_dir);

/// Node list written alongside a run ("nodes.json").
std::vector<NodeMeta> load_nodes(const std::filesystem::path& path);

/// Recomputes (mi_mean, mi_surr_mean, extra_normal, extra_normal_relative)
/// from a run directory's saved matrices.
std::vector<NodeField> fields_from_run(const std::filesystem::path& run_dir);

}  // namespace nonlindep
