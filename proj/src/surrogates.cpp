#include "nonlindep/surrogates.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "nonlindep/error.hpp"

namespace nonlindep {

namespace {

// FFTW's planner is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

}  // namespace

struct SurrogateGenerator::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  Plans(std::size_t T, std::size_t bins) {
    // Plans are created on aligned scratch arrays with FFTW_ESTIMATE, which
    // is deterministic; every execution also uses fftw_malloc'd (aligned)
    // buffers so the same codelets run on every call.
    FftwBuffer real(sizeof(double) * T);
    FftwBuffer cplx(sizeof(fftw_complex) * bins);
    const int n = static_cast<int>(T);
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(n, static_cast<double*>(real.ptr),
                                   static_cast<fftw_complex*>(cplx.ptr),
                                   FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(cplx.ptr),
                                   static_cast<double*>(real.ptr),
                                   FFTW_ESTIMATE);
    if (!forward || !inverse) {
      fail(ErrorCode::configuration, "FFTW planning failed");
    }
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
};

SurrogateGenerator::SurrogateGenerator(const TimeSeriesGrid& grid)
    : grid_(&grid),
      length_(grid.length()),
      nodes_(grid.node_count()),
      bins_(grid.length() / 2 + 1),
      spectra_(nodes_ * bins_) {
  if (length_ < 4) {
    fail(ErrorCode::insufficient_data, "FT surrogates need T >= 4");
  }
  plans_ = std::make_unique<Plans>(length_, bins_);
  FftwBuffer real(sizeof(double) * length_);
  FftwBuffer cplx(sizeof(fftw_complex) * bins_);
  auto* in = static_cast<double*>(real.ptr);
  auto* out = static_cast<fftw_complex*>(cplx.ptr);
  for (std::size_t i = 0; i < nodes_; ++i) {
    auto s = grid.series(i);
    std::copy(s.begin(), s.end(), in);
    fftw_execute_dft_r2c(plans_->forward, in, out);
    for (std::size_t k = 0; k < bins_; ++k) {
      spectra_[i * bins_ + k] = {out[k][0], out[k][1]};
    }
  }
}

SurrogateGenerator::~SurrogateGenerator() = default;

std::vector<double> SurrogateGenerator::phases(std::uint64_t stream_seed) const {
  // Rotated bins: 1 .. ceil(T/2) - 1, i.e. all positive frequencies except
  // the Nyquist bin of an even-length series.
  const std::size_t rotated = (length_ - 1) / 2;
  std::vector<double> phi(rotated);
  Rng rng(stream_seed);
  for (auto& p : phi) p = 2.0 * std::numbers::pi * rng.uniform();
  return phi;
}

void SurrogateGenerator::generate_nodes(std::span<const double> phi,
                                        std::size_t first, std::size_t count,
                                        std::span<double> out) const {
  if (phi.size() != (length_ - 1) / 2 || first + count > nodes_ ||
      out.size() < count * length_) {
    fail(ErrorCode::consistency, "surrogate buffer shape mismatch");
  }
  std::vector<std::complex<double>> rotation(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    rotation[k] = std::polar(1.0, phi[k]);
  }
  FftwBuffer real(sizeof(double) * length_);
  FftwBuffer cplx(sizeof(fftw_complex) * bins_);
  auto* time = static_cast<double*>(real.ptr);
  auto* freq = static_cast<fftw_complex*>(cplx.ptr);
  const double scale = 1.0 / static_cast<double>(length_);
  for (std::size_t c = 0; c < count; ++c) {
    const std::complex<double>* spec = spectra_.data() + (first + c) * bins_;
    freq[0][0] = spec[0].real();
    freq[0][1] = 0.0;
    for (std::size_t k = 1; k < bins_; ++k) {
      std::complex<double> z = spec[k];
      if (k - 1 < rotation.size()) z *= rotation[k - 1];
      freq[k][0] = z.real();
      freq[k][1] = z.imag();
    }
    if (length_ % 2 == 0) freq[bins_ - 1][1] = 0.0;
    fftw_execute_dft_c2r(plans_->inverse, freq, time);
    double* dst = out.data() + c * length_;
    for (std::size_t t = 0; t < length_; ++t) dst[t] = time[t] * scale;
  }
}

void SurrogateGenerator::generate(std::uint64_t stream_seed,
                                  std::span<double> out) const {
  const auto phi = phases(stream_seed);
  generate_nodes(phi, 0, nodes_, out);
}

TimeSeriesGrid SurrogateGenerator::surrogate(std::uint64_t stream_seed) const {
  std::vector<double> values(length_ * nodes_);
  generate(stream_seed, values);
  return grid_->with_values(std::move(values));
}

TimeSeriesGrid ft_surrogate(const TimeSeriesGrid& grid,
                            std::uint64_t stream_seed) {
  return SurrogateGenerator(grid).surrogate(stream_seed);
}

std::vector<TimeSeriesGrid> generate_ensemble(const TimeSeriesGrid& grid,
                                              const SurrogateSpec& spec,
                                              int threads) {
  const SurrogateGenerator gen(grid);
  std::vector<TimeSeriesGrid> out(spec.n_surr);
  const auto n = static_cast<std::ptrdiff_t>(spec.n_surr);
#pragma omp parallel for schedule(static) num_threads(std::max(1, threads))
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    out[idx] = gen.surrogate(spec.stream_seed(idx));
  }
  return out;
}

void for_each_surrogate(
    const TimeSeriesGrid& grid, const SurrogateSpec& spec,
    const std::function<void(std::size_t, const TimeSeriesGrid&)>& sink) {
  const SurrogateGenerator gen(grid);
  for (std::size_t k = 0; k < spec.n_surr; ++k) {
    sink(k, gen.surrogate(spec.stream_seed(k)));
  }
}

std::vector<double> amplitude_spectrum(std::span<const double> x) {
  const std::size_t T = x.size();
  const std::size_t bins = T / 2 + 1;
  std::vector<double> amp(bins);
  // Direct O(T^2) evaluation; used for checks, independent of FFTW.
  std::vector<long double> c(T), sn(T);
  for (std::size_t m = 0; m < T; ++m) {
    const long double angle = -2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>(m) / static_cast<long double>(T);
    c[m] = std::cos(angle);
    sn[m] = std::sin(angle);
  }
  for (std::size_t k = 0; k < bins; ++k) {
    long double re = 0.0L, im = 0.0L;
    std::size_t m = 0;
    for (std::size_t t = 0; t < T; ++t) {
      re += static_cast<long double>(x[t]) * c[m];
      im += static_cast<long double>(x[t]) * sn[m];
      m += k;
      if (m >= T) m -= T;
    }
    amp[k] = static_cast<double>(std::sqrt(re * re + im * im));
  }
  return amp;
}

}  // namespace nonlindep
