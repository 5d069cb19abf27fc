#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "nonlindep/grid.hpp"
#include "nonlindep/rng.hpp"

namespace nonlindep {

/// Identifies one reproducible surrogate ensemble.
struct SurrogateSpec {
  std::uint64_t master_seed = 0;
  std::size_t n_surr = 99;

  std::uint64_t stream_seed(std::size_t index) const noexcept {
    return derive_seed(master_seed, index);
  }
  static constexpr const char* derivation() noexcept {
    return kSeedDerivationRule;
  }
};

/// Multivariate Fourier-transform surrogate generator for one grid.
///
/// The forward spectra of all nodes are computed once. Each surrogate draws
/// one phase per positive frequency 1 <= k < T/2 (the DC bin and, for even
/// T, the Nyquist bin are left untouched), rotates every node's coefficient
/// at k by that same phase and transforms back. Amplitude spectra and all
/// cross-spectra, hence every lag covariance and pairwise correlation, are
/// preserved.
///
/// generate() is safe to call concurrently from several threads.
class SurrogateGenerator {
 public:
  explicit SurrogateGenerator(const TimeSeriesGrid& grid);
  ~SurrogateGenerator();
  SurrogateGenerator(const SurrogateGenerator&) = delete;
  SurrogateGenerator& operator=(const SurrogateGenerator&) = delete;

  std::size_t length() const noexcept { return length_; }
  std::size_t node_count() const noexcept { return nodes_; }

  /// Phases drawn for `stream_seed`: one uniform on [0, 2pi) per rotated
  /// frequency, in ascending frequency order.
  std::vector<double> phases(std::uint64_t stream_seed) const;

  /// Writes the surrogate values (column-major by node, T*N entries).
  void generate(std::uint64_t stream_seed, std::span<double> out) const;

  /// Surrogate nodes [first, first + count) only, for blocked consumers.
  void generate_nodes(std::span<const double> phases, std::size_t first,
                      std::size_t count, std::span<double> out) const;

  TimeSeriesGrid surrogate(std::uint64_t stream_seed) const;

 private:
  struct Plans;

  const TimeSeriesGrid* grid_;
  std::size_t length_;
  std::size_t nodes_;
  std::size_t bins_;  // T/2 + 1
  std::vector<std::complex<double>> spectra_;  // node-major, bins_ each
  std::unique_ptr<Plans> plans_;
};

/// Single surrogate of `grid` for a given stream seed.
TimeSeriesGrid ft_surrogate(const TimeSeriesGrid& grid,
                            std::uint64_t stream_seed);

/// All n_surr surrogates; surrogate k uses spec.stream_seed(k). The result
/// does not depend on `threads`.
std::vector<TimeSeriesGrid> generate_ensemble(const TimeSeriesGrid& grid,
                                              const SurrogateSpec& spec,
                                              int threads = 1);

/// Streams the ensemble in index order, handing each surrogate to `sink`
/// before the next is produced.
void for_each_surrogate(
    const TimeSeriesGrid& grid, const SurrogateSpec& spec,
    const std::function<void(std::size_t, const TimeSeriesGrid&)>& sink);

/// |DFT| of a real series, bins 0..T/2.
std::vector<double> amplitude_spectrum(std::span<const double> x);

}  // namespace nonlindep
