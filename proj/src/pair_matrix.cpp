#include "nonlindep/pair_matrix.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nonlindep/error.hpp"

namespace nonlindep {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t le32(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
           (v >> 24);
  }
  return v;
}

}  // namespace

const char* to_string(PairKind kind) noexcept {
  switch (kind) {
    case PairKind::correlation: return "correlation";
    case PairKind::mi_raw: return "mi_raw";
    case PairKind::mi_calibrated: return "mi_calibrated";
    case PairKind::mi_surr_mean: return "mi_surr_mean";
    case PairKind::exceed_count: return "exceed_count";
    case PairKind::significant: return "significant";
  }
  return "?";
}

std::pair<std::size_t, std::size_t> condensed_pair(std::size_t index,
                                                   std::size_t n) {
  if (index >= pair_count(n)) {
    fail(ErrorCode::bounds, "condensed index out of range");
  }
  // Row i starts at i*n - i(i+1)/2; solve for the largest such start <= index.
  const double nn = static_cast<double>(n);
  auto i = static_cast<std::size_t>(
      std::floor((2.0 * nn - 1.0 -
                  std::sqrt((2.0 * nn - 1.0) * (2.0 * nn - 1.0) -
                            8.0 * static_cast<double>(index))) /
                 2.0));
  auto row_start = [n](std::size_t r) { return r * n - r * (r + 1) / 2; };
  while (i > 0 && row_start(i) > index) --i;
  while (i + 1 < n && row_start(i + 1) <= index) ++i;
  return {i, index - row_start(i) + i + 1};
}

PairMatrix::PairMatrix(std::size_t n, PairKind kind, std::vector<float> stat)
    : n_(n), kind_(kind), stat_(std::move(stat)) {
  if (stat_.size() != pair_count(n)) {
    fail(ErrorCode::consistency, "pair matrix payload has wrong length");
  }
}

float PairMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_ || i == j) {
    fail(ErrorCode::bounds, "invalid pair (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
  }
  if (i > j) std::swap(i, j);
  return stat_[condensed_index(i, j, n_)];
}

void save_pair_matrix(const PairMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  if (m.n() > 0xFFFFFFFFu) fail(ErrorCode::configuration, "matrix too large");
  const std::uint32_t header[3] = {le32(kVersion),
                                   le32(static_cast<std::uint32_t>(m.n())),
                                   le32(static_cast<std::uint32_t>(m.kind()))};
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  std::vector<std::uint32_t> raw(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    raw[k] = le32(std::bit_cast<std::uint32_t>(m[k]));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * 4));
  if (!out) fail(ErrorCode::io, "write failed on " + path.string());
}

PairMatrix load_pair_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  char magic[4];
  std::uint32_t header[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorCode::format, path.string() + " is not a PMAT file");
  }
  if (le32(header[0]) != kVersion) {
    fail(ErrorCode::format, "unsupported PMAT version " +
                                std::to_string(le32(header[0])));
  }
  const std::size_t n = le32(header[1]);
  const std::uint32_t kind = le32(header[2]);
  if (kind > static_cast<std::uint32_t>(PairKind::significant)) {
    fail(ErrorCode::format, "unknown PMAT kind " + std::to_string(kind));
  }
  std::vector<std::uint32_t> raw(pair_count(n));
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * 4));
  if (!in) fail(ErrorCode::format, path.string() + " payload is truncated");
  if (in.peek() != std::char_traits<char>::eof()) {
    fail(ErrorCode::format, path.string() + " has trailing bytes");
  }
  std::vector<float> stat(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    stat[k] = std::bit_cast<float>(le32(raw[k]));
  }
  return PairMatrix(n, static_cast<PairKind>(kind), std::move(stat));
}

}  // namespace nonlindep
