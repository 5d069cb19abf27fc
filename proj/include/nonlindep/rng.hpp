#pragma once

#include <cstdint>
#include <random>

namespace nonlindep {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` under `master`:
///   splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15)
/// The golden-ratio increment is odd, so distinct indices give distinct
/// inputs and, splitmix64 being bijective, distinct child seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
  return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

inline constexpr const char* kSeedDerivationRule =
    "stream_seed(k) = splitmix64(master_seed + (k + 1) * 0x9E3779B97F4A7C15); "
    "stream generator = std::mt19937_64(stream_seed); "
    "uniform = (next() >> 11) * 2^-53; normal = Box-Muller";

/// Per-stream generator. Uniform and normal draws are built from raw
/// mt19937_64 output so sequences do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer on [0, bound), bound > 0 (Lemire rejection).
  std::uint64_t below(std::uint64_t bound);

  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nonlindep
