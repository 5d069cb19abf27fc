#include "nonlindep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <span>
#include <unordered_set>

#include "json.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/estimators.hpp"
#include "nonlindep/preprocess.hpp"
#include "nonlindep/rng.hpp"

namespace nonlindep {

using nlohmann::json;

namespace {

// Visits every pair (i, j), i < j, with its condensed index. Rows are
// distributed dynamically; each pair is written by exactly one thread.
template <class Fn>
void sweep_pairs(std::size_t n, int threads, Fn&& fn) {
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(std::max(1, threads))
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto i = static_cast<std::size_t>(r);
    std::size_t k = i * n - i * (i + 1) / 2;
    for (std::size_t j = i + 1; j < n; ++j, ++k) fn(i, j, k);
  }
}

float to_f32(double v) { return static_cast<float>(v); }

// Centers and scales one series to unit Euclidean norm; false if constant.
bool standardize(std::span<const double> x, double* out) {
  const std::size_t T = x.size();
  double mean = 0.0;
  for (std::size_t t = 0; t < T; ++t) mean += x[t];
  mean /= static_cast<double>(T);
  double ss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    out[t] = x[t] - mean;
    ss += out[t] * out[t];
  }
  if (!(ss > 0.0)) return false;
  const double inv = 1.0 / std::sqrt(ss);
  for (std::size_t t = 0; t < T; ++t) out[t] *= inv;
  return true;
}

float standardized_dot(const double* a, const double* b, std::size_t T) {
  double dot = 0.0;
  for (std::size_t t = 0; t < T; ++t) dot += a[t] * b[t];
  return to_f32(std::clamp(dot, -1.0, 1.0));
}

// Raw MI rounded to storage precision, then calibrated; the one route used
// for every stored or compared calibrated value.
double calibrated_from_raw(double raw, const CalibrationCurve& curve) {
  return calibrate(static_cast<double>(to_f32(raw)), curve);
}

}  // namespace

const char* to_string(FieldKind kind) noexcept {
  switch (kind) {
    case FieldKind::mi_mean: return "mi_mean";
    case FieldKind::mi_surr_mean: return "mi_surr_mean";
    case FieldKind::extra_normal: return "extra_normal";
    case FieldKind::extra_normal_relative: return "extra_normal_relative";
  }
  return "?";
}

FieldKind field_kind_from_string(const std::string& name) {
  for (auto k : {FieldKind::mi_mean, FieldKind::mi_surr_mean,
                 FieldKind::extra_normal, FieldKind::extra_normal_relative}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorCode::configuration, "unknown field kind '" + name + "'");
}

PairMatrix pairwise_correlation(const TimeSeriesGrid& grid, int threads) {
  grid.require_analyzable();
  const std::size_t n = grid.node_count();
  const std::size_t T = grid.length();
  // Standardize once: r(i, j) is the dot product of unit-norm centered
  // series.
  std::vector<double> z(n * T);
  for (std::size_t i = 0; i < n; ++i) {
    if (!standardize(grid.series(i), z.data() + i * T)) {
      fail(ErrorCode::degenerate, "node " + std::to_string(i) + " is constant");
    }
  }
  PairMatrix m(n, PairKind::correlation);
  sweep_pairs(n, threads, [&](std::size_t i, std::size_t j, std::size_t k) {
    m[k] = standardized_dot(z.data() + i * T, z.data() + j * T, T);
  });
  return m;
}

PairMatrix pairwise_mi_raw(const TimeSeriesGrid& grid, int bins, int threads) {
  grid.require_analyzable();
  const LabelSet labels(grid, bins);
  const MiKernel kernel(grid.length(), bins);
  PairMatrix m(grid.node_count(), PairKind::mi_raw);
  sweep_pairs(grid.node_count(), threads,
              [&](std::size_t i, std::size_t j, std::size_t k) {
                m[k] = to_f32(kernel(labels.node(i), labels.node(j)));
              });
  return m;
}

PairMatrix calibrate_matrix(const PairMatrix& raw, const CalibrationCurve& curve) {
  if (raw.kind() != PairKind::mi_raw) {
    fail(ErrorCode::consistency, "calibrate_matrix expects an mi_raw matrix");
  }
  PairMatrix m(raw.n(), PairKind::mi_calibrated);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    m[k] = to_f32(calibrate(static_cast<double>(raw[k]), curve));
  }
  return m;
}

PairMatrix pairwise_mi(const TimeSeriesGrid& grid, int bins,
                       const CalibrationCurve& curve, int threads) {
  check_calibration_key(curve, grid.length(), bins);
  return calibrate_matrix(pairwise_mi_raw(grid, bins, threads), curve);
}

SurrogateStats surrogate_mi_stats(const TimeSeriesGrid& grid,
                                  const SurrogateSpec& spec, int bins,
                                  const CalibrationCurve& curve,
                                  const PairMatrix& data_mi, int threads,
                                  const ProgressFn& progress) {
  grid.require_analyzable();
  check_calibration_key(curve, grid.length(), bins);
  const std::size_t n = grid.node_count();
  const std::size_t T = grid.length();
  if (data_mi.n() != n) {
    fail(ErrorCode::consistency, "data MI matrix has n=" +
                                     std::to_string(data_mi.n()) +
                                     " but grid has N=" + std::to_string(n));
  }
  const bool raw_domain = data_mi.kind() == PairKind::mi_raw;
  if (!raw_domain && data_mi.kind() != PairKind::mi_calibrated) {
    fail(ErrorCode::consistency, "data MI matrix must be mi_raw or mi_calibrated");
  }
  if (spec.n_surr == 0) {
    fail(ErrorCode::configuration, "surrogate ensemble must be non-empty");
  }
  const int workers = std::max(1, threads);

  const SurrogateGenerator gen(grid);
  const MiKernel kernel(T, bins);
  const std::size_t pairs = pair_count(n);
  std::vector<double> sum(pairs, 0.0);
  std::vector<std::uint32_t> below(pairs, 0);
  std::vector<double> values(T * n);

  for (std::size_t s = 0; s < spec.n_surr; ++s) {
    const auto phi = gen.phases(spec.stream_seed(s));
    const auto N = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
      const auto node = static_cast<std::size_t>(i);
      gen.generate_nodes(phi, node, 1,
                         std::span<double>(values).subspan(node * T, T));
    }
    const LabelSet labels(values, T, n, bins);
    sweep_pairs(n, workers, [&](std::size_t i, std::size_t j, std::size_t k) {
      const double raw = kernel(labels.node(i), labels.node(j));
      const double cal = calibrated_from_raw(raw, curve);
      const float probe = to_f32(raw_domain ? raw : cal);
      if (probe < data_mi[k]) ++below[k];
      sum[k] += cal;
    });
    if (progress) progress(s + 1, spec.n_surr);
  }

  SurrogateStats out;
  out.surr_mean = PairMatrix(n, PairKind::mi_surr_mean);
  out.exceed = PairMatrix(n, PairKind::exceed_count);
  out.surr_mean_exact.resize(pairs);
  const double inv = 1.0 / static_cast<double>(spec.n_surr);
  for (std::size_t k = 0; k < pairs; ++k) {
    out.surr_mean_exact[k] = sum[k] * inv;
    out.surr_mean[k] = to_f32(out.surr_mean_exact[k]);
    out.exceed[k] = static_cast<float>(below[k]);
  }
  return out;
}

std::size_t significance_threshold(double alpha, std::size_t n_surr) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorCode::configuration, "alpha must lie in (0, 1)");
  }
  // The small offset keeps (1 - 0.05) * 100 from rounding up to 96.
  const double exact = (1.0 - alpha) * static_cast<double>(n_surr + 1);
  const auto threshold = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  if (threshold > n_surr) {
    fail(ErrorCode::configuration,
         "alpha=" + std::to_string(alpha) + " needs more than " +
             std::to_string(n_surr) + " surrogates");
  }
  return std::max<std::size_t>(threshold, 1);
}

std::pair<PairMatrix, SignificanceSummary> significance(
    const PairMatrix& exceed, double alpha, std::size_t n_surr) {
  if (exceed.kind() != PairKind::exceed_count) {
    fail(ErrorCode::consistency, "significance expects an exceed_count matrix");
  }
  SignificanceSummary summary;
  summary.alpha = alpha;
  summary.n_surr = n_surr;
  summary.threshold = significance_threshold(alpha, n_surr);
  summary.total_pairs = exceed.size();
  PairMatrix flags(exceed.n(), PairKind::significant);
  for (std::size_t k = 0; k < exceed.size(); ++k) {
    const float c = exceed[k];
    if (c < 0.0f || c > static_cast<float>(n_surr) || c != std::floor(c)) {
      fail(ErrorCode::consistency,
           "exceed count " + std::to_string(c) + " inconsistent with n_surr=" +
               std::to_string(n_surr));
    }
    if (static_cast<std::size_t>(c) >= summary.threshold) {
      flags[k] = 1.0f;
      ++summary.significant_pairs;
    }
  }
  summary.fraction =
      summary.total_pairs == 0
          ? 0.0
          : static_cast<double>(summary.significant_pairs) /
                static_cast<double>(summary.total_pairs);
  return {std::move(flags), summary};
}

NodeField node_average(const PairMatrix& matrix,
                       const std::vector<NodeMeta>& nodes) {
  FieldKind kind;
  switch (matrix.kind()) {
    case PairKind::mi_calibrated:
    case PairKind::mi_raw:
      kind = FieldKind::mi_mean;
      break;
    case PairKind::mi_surr_mean:
      kind = FieldKind::mi_surr_mean;
      break;
    default:
      fail(ErrorCode::consistency,
           std::string("node_average needs an MI matrix, got ") +
               to_string(matrix.kind()));
  }
  const std::size_t n = matrix.n();
  if (nodes.size() != n) {
    fail(ErrorCode::consistency, "node list does not match matrix size");
  }
  if (n < 2) fail(ErrorCode::insufficient_data, "node_average needs n >= 2");
  std::vector<double> sums(n, 0.0);
  for (std::size_t i = 0, k = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const double v = matrix[k];
      sums[i] += v;
      sums[j] += v;
    }
  }
  NodeField f;
  f.kind = kind;
  f.nodes = nodes;
  f.values.resize(n);
  f.defined.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    f.values[i] = sums[i] / static_cast<double>(n - 1);
  }
  return f;
}

std::pair<NodeField, NodeField> extra_normal_fields(const NodeField& mi_field,
                                                    const NodeField& surr_field) {
  if (mi_field.size() != surr_field.size() ||
      mi_field.nodes.size() != surr_field.nodes.size()) {
    fail(ErrorCode::consistency, "field sizes differ");
  }
  for (std::size_t i = 0; i < mi_field.nodes.size(); ++i) {
    if (mi_field.nodes[i].lat != surr_field.nodes[i].lat ||
        mi_field.nodes[i].lon != surr_field.nodes[i].lon) {
      fail(ErrorCode::consistency,
           "fields refer to different nodes at " + std::to_string(i));
    }
  }
  const std::size_t n = mi_field.size();
  NodeField diff{FieldKind::extra_normal, mi_field.nodes,
                 std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  NodeField rel{FieldKind::extra_normal_relative, mi_field.nodes,
                std::vector<double>(n, 0.0), std::vector<std::uint8_t>(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    if (!mi_field.is_defined(i) || !surr_field.is_defined(i)) continue;
    const double d = extra_normal(mi_field.values[i], surr_field.values[i]);
    diff.values[i] = d;
    diff.defined[i] = 1;
    if (mi_field.values[i] > kRelativeFieldFloor) {
      rel.values[i] = std::max(d, 0.0) / mi_field.values[i];
      rel.defined[i] = 1;
    }
  }
  return {std::move(diff), std::move(rel)};
}

PairDossier extract_pair(const TimeSeriesGrid& grid, std::size_t i,
                         std::size_t j, int bins, const CalibrationCurve& curve) {
  const std::size_t n = grid.node_count();
  if (i >= n || j >= n || i == j) {
    fail(ErrorCode::bounds, "invalid pair (" + std::to_string(i) + ", " +
                                std::to_string(j) + ") for N=" +
                                std::to_string(n));
  }
  check_calibration_key(curve, grid.length(), bins);
  PairDossier d;
  d.i = i;
  d.j = j;
  d.node_i = grid.nodes()[i];
  d.node_j = grid.nodes()[j];
  d.time_start = grid.time_start();
  d.period = grid.period();
  const auto x = grid.series(i);
  const auto y = grid.series(j);
  d.x.assign(x.begin(), x.end());
  d.y.assign(y.begin(), y.end());
  d.phase_std_x = phase_std(grid, i);
  d.phase_std_y = phase_std(grid, j);

  // Same arithmetic as the matrix builders so that values agree bit-for-bit.
  const std::size_t T = grid.length();
  std::vector<double> zx(T), zy(T);
  if (!standardize(x, zx.data()) || !standardize(y, zy.data())) {
    fail(ErrorCode::degenerate, "pair contains a constant node");
  }
  d.r = standardized_dot(zx.data(), zy.data(), T);
  d.gaussian_mi = std::abs(d.r) < 1.0 ? gaussian_mi(d.r)
                                      : std::numeric_limits<double>::infinity();
  const MiKernel kernel(T, bins);
  const LabelSet labels(grid, bins);
  const double raw = kernel(labels.node(i), labels.node(j));
  d.mi_raw = to_f32(raw);
  d.mi_calibrated = to_f32(calibrated_from_raw(raw, curve));
  return d;
}

}  // namespace nonlindep

namespace nonlindep {

namespace {

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

std::string dossier_to_json(const PairDossier& d) {
  json j;
  j["i"] = d.i;
  j["j"] = d.j;
  j["node_i"] = {{"lat", d.node_i.lat}, {"lon", d.node_i.lon}};
  j["node_j"] = {{"lat", d.node_j.lat}, {"lon", d.node_j.lon}};
  j["time_start"] = d.time_start;
  j["period"] = d.period;
  j["r"] = d.r;
  j["mi_raw"] = d.mi_raw;
  j["mi_calibrated"] = d.mi_calibrated;
  j["gaussian_mi"] = finite_or_null(d.gaussian_mi);
  j["extra_normal_vs_gaussian"] = finite_or_null(d.mi_calibrated - d.gaussian_mi);
  j["phase_std_x"] = d.phase_std_x;
  j["phase_std_y"] = d.phase_std_y;
  j["x"] = d.x;
  j["y"] = d.y;
  return j.dump(1) + "\n";
}

std::string dossier_to_csv(const PairDossier& d) {
  std::string out = "t,x,y\n";
  char buf[96];
  for (std::size_t t = 0; t < d.x.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", t, d.x[t], d.y[t]);
    out += buf;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(
    std::size_t n, std::size_t k, std::uint64_t seed) {
  const std::size_t total = pair_count(n);
  if (k > total) {
    fail(ErrorCode::configuration,
         "cannot sample " + std::to_string(k) + " pairs from " +
             std::to_string(total));
  }
  // Floyd's algorithm: k draws, each uniform, no rejection loop.
  Rng rng(seed);
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(k * 2);
  for (std::size_t m = total - k; m < total; ++m) {
    const std::size_t r = static_cast<std::size_t>(rng.below(m + 1));
    if (!chosen.insert(r).second) chosen.insert(m);
  }
  std::vector<std::size_t> idx(chosen.begin(), chosen.end());
  std::sort(idx.begin(), idx.end());
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(k);
  for (std::size_t c : idx) out.push_back(condensed_pair(c, n));
  return out;
}

}  // namespace nonlindep
