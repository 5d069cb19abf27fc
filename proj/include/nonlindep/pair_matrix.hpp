#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nonlindep {

enum class PairKind : std::uint32_t {
  correlation = 0,
  mi_raw = 1,
  mi_calibrated = 2,
  mi_surr_mean = 3,
  exceed_count = 4,
  significant = 5,  // 0/1 flags
};

const char* to_string(PairKind kind) noexcept;

/// Number of unordered pairs among n nodes.
constexpr std::size_t pair_count(std::size_t n) noexcept {
  return n < 2 ? 0 : n * (n - 1) / 2;
}

/// Condensed index of pair (i, j), i < j:  i*n - i(i+1)/2 + (j - i - 1).
constexpr std::size_t condensed_index(std::size_t i, std::size_t j,
                                      std::size_t n) noexcept {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of condensed_index().
std::pair<std::size_t, std::size_t> condensed_pair(std::size_t index,
                                                   std::size_t n);

/// Condensed upper-triangular store of one per-pair statistic, float32.
class PairMatrix {
 public:
  PairMatrix() = default;
  PairMatrix(std::size_t n, PairKind kind)
      : n_(n), kind_(kind), stat_(pair_count(n), 0.0f) {}
  PairMatrix(std::size_t n, PairKind kind, std::vector<float> stat);

  std::size_t n() const noexcept { return n_; }
  PairKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return stat_.size(); }

  /// Symmetric access; i != j.
  float at(std::size_t i, std::size_t j) const;
  float& operator[](std::size_t k) { return stat_[k]; }
  float operator[](std::size_t k) const { return stat_[k]; }
  const std::vector<float>& data() const noexcept { return stat_; }
  std::vector<float>& data() noexcept { return stat_; }

  friend bool operator==(const PairMatrix&, const PairMatrix&) = default;

 private:
  std::size_t n_ = 0;
  PairKind kind_ = PairKind::correlation;
  std::vector<float> stat_;
};

/// Binary layout, little-endian: "PMAT", u32 version (1), u32 n, u32 kind,
/// then n(n-1)/2 float32 values.
void save_pair_matrix(const PairMatrix& m, const std::filesystem::path& path);
PairMatrix load_pair_matrix(const std::filesystem::path& path);

}  // namespace nonlindep
