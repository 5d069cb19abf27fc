#include "nonlindep/synth.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "nonlindep/error.hpp"
#include "nonlindep/rng.hpp"

namespace nonlindep {

using nlohmann::json;

std::pair<std::vector<double>, std::vector<double>> gen_gaussian_pair(
    double rho, std::size_t length, std::uint64_t seed) {
  if (!(std::abs(rho) < 1.0)) {
    fail(ErrorCode::configuration, "gen_gaussian_pair needs |rho| < 1");
  }
  Rng rng(seed);
  const double c = std::sqrt(1.0 - rho * rho);
  std::vector<double> x(length), y(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    x[t] = z1;
    y[t] = rho * z1 + c * z2;
  }
  return {std::move(x), std::move(y)};
}

std::vector<NodeMeta> synthetic_mesh(std::size_t nodes) {
  const auto side = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(std::max<std::size_t>(nodes, 1)))));
  const double step = std::min(2.5, 120.0 / static_cast<double>(side));
  std::vector<NodeMeta> out;
  out.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    const auto row = static_cast<double>(k / side);
    const auto col = static_cast<double>(k % side);
    out.push_back({60.0 - row * step, col * step, k});
  }
  return out;
}

TimeSeriesGrid gen_gaussian_grid(const CovarianceProfile& profile,
                                 std::size_t nodes, std::size_t length,
                                 double ar, std::uint64_t seed, int period) {
  if (!(std::abs(ar) < 1.0)) {
    fail(ErrorCode::configuration, "AR coefficient must satisfy |ar| < 1");
  }
  if (nodes == 0) fail(ErrorCode::configuration, "grid needs nodes");
  const auto side = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(nodes))));
  const auto N = static_cast<Eigen::Index>(nodes);

  Eigen::MatrixXd chol;
  const bool correlated = profile.kind == CovarianceProfile::Kind::spatial_decay;
  if (correlated) {
    if (!(profile.length_scale > 0.0)) {
      fail(ErrorCode::configuration, "length_scale must be positive");
    }
    Eigen::MatrixXd cov(N, N);
    for (Eigen::Index a = 0; a < N; ++a) {
      for (Eigen::Index b = 0; b < N; ++b) {
        const double dr = static_cast<double>(static_cast<std::size_t>(a) / side) -
                          static_cast<double>(static_cast<std::size_t>(b) / side);
        const double dc = static_cast<double>(static_cast<std::size_t>(a) % side) -
                          static_cast<double>(static_cast<std::size_t>(b) % side);
        cov(a, b) = std::exp(-std::sqrt(dr * dr + dc * dc) / profile.length_scale);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      fail(ErrorCode::configuration, "requested covariance is not positive definite");
    }
    chol = llt.matrixL();
  }

  Rng rng(seed);
  const double innovation = std::sqrt(1.0 - ar * ar);
  std::vector<double> values(nodes * length);
  Eigen::VectorXd z(N), e(N), state = Eigen::VectorXd::Zero(N);
  for (std::size_t t = 0; t < length; ++t) {
    for (Eigen::Index a = 0; a < N; ++a) z(a) = rng.normal();
    if (correlated) {
      e.noalias() = chol.triangularView<Eigen::Lower>() * z;
    } else {
      e = z;
    }
    state = t == 0 ? e : Eigen::VectorXd(ar * state + innovation * e);
    for (std::size_t a = 0; a < nodes; ++a) {
      values[a * length + t] = state(static_cast<Eigen::Index>(a));
    }
  }
  return TimeSeriesGrid(std::move(values), length, synthetic_mesh(nodes), 1,
                        period, "synthetic-gaussian");
}

std::vector<double> apply_seasonal_variance(std::span<const double> series,
                                            std::span<const double> profile,
                                            long phase_offset) {
  if (profile.empty()) fail(ErrorCode::configuration, "empty variance profile");
  for (double f : profile) {
    if (!(f > 0.0)) {
      fail(ErrorCode::configuration, "variance profile factors must be positive");
    }
  }
  const auto P = static_cast<long>(profile.size());
  std::vector<double> out(series.begin(), series.end());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const long p = ((static_cast<long>(t) + phase_offset) % P + P) % P;
    out[t] *= profile[static_cast<std::size_t>(p)];
  }
  return out;
}

std::vector<double> seasonal_profile(int period, double ratio) {
  if (period < 1 || !(ratio > 0.0)) {
    fail(ErrorCode::configuration, "seasonal profile needs period >= 1, ratio > 0");
  }
  std::vector<double> f(static_cast<std::size_t>(period));
  for (int p = 0; p < period; ++p) {
    const double c = std::cos(2.0 * std::numbers::pi * p / period);
    f[static_cast<std::size_t>(p)] = std::exp(std::log(ratio) * (1.0 + c) / 2.0);
  }
  return f;
}

std::vector<double> apply_trend(std::span<const double> series, double slope) {
  std::vector<double> out(series.begin(), series.end());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] += slope * static_cast<double>(t);
  }
  return out;
}

std::vector<double> quadratic_couple(std::span<const double> x,
                                     double noise_scale, std::uint64_t seed) {
  if (!(noise_scale >= 0.0)) {
    fail(ErrorCode::configuration, "noise_scale must be nonnegative");
  }
  const std::size_t T = x.size();
  if (T < 2) fail(ErrorCode::insufficient_data, "quadratic_couple needs T >= 2");
  std::vector<double> y(T);
  double mean = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    y[t] = x[t] * x[t];
    mean += y[t];
  }
  mean /= static_cast<double>(T);
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(T - 1));
  if (!(sd > 0.0)) fail(ErrorCode::degenerate, "x^2 is constant");
  Rng rng(seed);
  for (std::size_t t = 0; t < T; ++t) {
    y[t] = (y[t] - mean) / sd + noise_scale * rng.normal();
  }
  return y;
}

double trend_slope_for_sigmas(double sigmas, std::size_t length) {
  const auto n = static_cast<double>(length);
  return sigmas / std::sqrt((n * n - 1.0) / 12.0);
}

double SynthSpec::param(const std::string& name, double fallback) const {
  const auto it = params.find(name);
  return it == params.end() ? fallback : it->second;
}

const char* to_string(SynthSpec::Kind kind) noexcept {
  switch (kind) {
    case SynthSpec::Kind::gaussian_iid: return "gaussian_iid";
    case SynthSpec::Kind::gaussian_ar1: return "gaussian_ar1";
    case SynthSpec::Kind::quadratic_coupled: return "quadratic_coupled";
    case SynthSpec::Kind::seasonal_variance: return "seasonal_variance";
    case SynthSpec::Kind::trended: return "trended";
  }
  return "?";
}

namespace {

std::vector<double> unit_noise(std::size_t nodes, std::size_t length,
                               std::uint64_t seed) {
  std::vector<double> v(nodes * length);
  for (std::size_t a = 0; a < nodes; ++a) {
    Rng rng(derive_seed(seed, a));
    for (std::size_t t = 0; t < length; ++t) v[a * length + t] = rng.normal();
  }
  return v;
}

}  // namespace

TimeSeriesGrid generate(const SynthSpec& spec) {
  const std::size_t T = spec.length;
  const std::size_t N = spec.nodes;
  const auto label = std::string("synthetic-") + to_string(spec.kind);
  switch (spec.kind) {
    case SynthSpec::Kind::gaussian_iid:
    case SynthSpec::Kind::gaussian_ar1: {
      CovarianceProfile profile;
      if (spec.covariance == "spatial_decay") {
        profile.kind = CovarianceProfile::Kind::spatial_decay;
        profile.length_scale = spec.param("length_scale", 1.0);
      } else if (spec.covariance != "identity") {
        fail(ErrorCode::configuration, "unknown covariance '" + spec.covariance + "'");
      }
      const double ar = spec.kind == SynthSpec::Kind::gaussian_ar1
                            ? spec.param("ar", 0.5)
                            : 0.0;
      return gen_gaussian_grid(profile, N, T, ar, spec.seed, spec.period);
    }
    case SynthSpec::Kind::quadratic_coupled: {
      if (N % 2 != 0) {
        fail(ErrorCode::configuration, "quadratic_coupled needs an even node count");
      }
      const double noise = spec.param("noise_scale", 0.2);
      auto v = unit_noise(N, T, spec.seed);
      for (std::size_t a = 0; a < N; a += 2) {
        const auto y = quadratic_couple(std::span<const double>(v).subspan(a * T, T),
                                        noise, derive_seed(spec.seed ^ 0x5A5A5A5AULL, a));
        std::copy(y.begin(), y.end(), v.begin() + static_cast<std::ptrdiff_t>((a + 1) * T));
      }
      return TimeSeriesGrid(std::move(v), T, synthetic_mesh(N), 1, spec.period, label);
    }
    case SynthSpec::Kind::seasonal_variance: {
      const auto profile = seasonal_profile(spec.period, spec.param("ratio", kSeasonalStdRatio));
      auto v = unit_noise(N, T, spec.seed);
      for (std::size_t a = 0; a < N; ++a) {
        const long offset = a % 2 == 0 ? 0 : spec.period / 2;
        const auto y = apply_seasonal_variance(
            std::span<const double>(v).subspan(a * T, T), profile, offset);
        std::copy(y.begin(), y.end(), v.begin() + static_cast<std::ptrdiff_t>(a * T));
      }
      return TimeSeriesGrid(std::move(v), T, synthetic_mesh(N), 1, spec.period, label);
    }
    case SynthSpec::Kind::trended: {
      const double slope = trend_slope_for_sigmas(spec.param("sigmas", kTrendSigmas), T);
      auto v = unit_noise(N, T, spec.seed);
      for (std::size_t a = 0; a < N; ++a) {
        const auto y = apply_trend(std::span<const double>(v).subspan(a * T, T), slope);
        std::copy(y.begin(), y.end(), v.begin() + static_cast<std::ptrdiff_t>(a * T));
      }
      return TimeSeriesGrid(std::move(v), T, synthetic_mesh(N), 1, spec.period, label);
    }
  }
  fail(ErrorCode::configuration, "unknown synth kind");
}

SynthSpec synth_spec_from_json(const std::string& text) {
  SynthSpec s;
  try {
    const json j = json::parse(text);
    const auto kind = j.at("kind").get<std::string>();
    bool found = false;
    for (auto k : {SynthSpec::Kind::gaussian_iid, SynthSpec::Kind::gaussian_ar1,
                   SynthSpec::Kind::quadratic_coupled,
                   SynthSpec::Kind::seasonal_variance, SynthSpec::Kind::trended}) {
      if (kind == to_string(k)) {
        s.kind = k;
        found = true;
      }
    }
    if (!found) fail(ErrorCode::configuration, "unknown synth kind '" + kind + "'");
    s.length = j.value("T", s.length);
    s.nodes = j.value("N", s.nodes);
    s.period = j.value("period", s.period);
    s.seed = j.value("seed", s.seed);
    s.covariance = j.value("covariance", s.covariance);
    if (j.contains("params")) {
      for (auto& [k, v] : j.at("params").items()) s.params[k] = v.get<double>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::configuration, std::string("malformed synth spec: ") + e.what());
  }
  if (s.kind != SynthSpec::Kind::gaussian_iid && s.kind != SynthSpec::Kind::gaussian_ar1 &&
      s.covariance != "identity") {
    fail(ErrorCode::configuration, "covariance applies to gaussian kinds only");
  }
  if (s.params.count("ratio") && !(s.params.at("ratio") > 0.0)) {
    fail(ErrorCode::configuration, "ratio must be positive");
  }
  return s;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  j["T"] = spec.length;
  j["N"] = spec.nodes;
  j["period"] = spec.period;
  j["seed"] = spec.seed;
  j["covariance"] = spec.covariance;
  j["params"] = spec.params;
  return j.dump();
}

}  // namespace nonlindep
