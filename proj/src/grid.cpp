#include "nonlindep/grid.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "nonlindep/error.hpp"

namespace nonlindep {

TimeSeriesGrid::TimeSeriesGrid(std::vector<double> values, std::size_t length,
                               std::vector<NodeMeta> nodes, int time_start,
                               int period, std::string label)
    : values_(std::move(values)),
      length_(length),
      nodes_(std::move(nodes)),
      time_start_(time_start),
      period_(period),
      label_(std::move(label)) {
  if (period_ < 1) fail(ErrorCode::configuration, "period must be positive");
  if (time_start_ < 1 || time_start_ > period_) {
    fail(ErrorCode::configuration,
         "time_start must lie in [1, period], got " +
             std::to_string(time_start_));
  }
  if (length_ < 2 * static_cast<std::size_t>(period_)) {
    fail(ErrorCode::insufficient_data,
         "grid needs T >= 2*period samples, got T=" + std::to_string(length_) +
             " with period " + std::to_string(period_));
  }
  if (values_.size() != length_ * nodes_.size()) {
    fail(ErrorCode::consistency,
         "value block holds " + std::to_string(values_.size()) +
             " samples but T*N = " +
             std::to_string(length_ * nodes_.size()));
  }
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!(n.lat >= -90.0 && n.lat <= 90.0) || !(n.lon >= 0.0 && n.lon < 360.0)) {
      std::ostringstream os;
      os << "node " << i << " has invalid coordinates (" << n.lat << ", "
         << n.lon << ")";
      fail(ErrorCode::consistency, os.str());
    }
    if (!seen.emplace(n.lat, n.lon).second) {
      std::ostringstream os;
      os << "duplicate node coordinates (" << n.lat << ", " << n.lon
         << ") at node " << i;
      fail(ErrorCode::consistency, os.str());
    }
  }
  for (std::size_t node = 0; node < nodes_.size(); ++node) {
    for (std::size_t t = 0; t < length_; ++t) {
      if (!std::isfinite(values_[node * length_ + t])) {
        fail(ErrorCode::data, "non-finite value at (t=" + std::to_string(t) +
                                  ", node=" + std::to_string(node) + ")");
      }
    }
  }
}

std::span<const double> TimeSeriesGrid::series(std::size_t node) const {
  if (node >= nodes_.size()) {
    fail(ErrorCode::bounds, "node index " + std::to_string(node) +
                                " out of range for N=" +
                                std::to_string(nodes_.size()));
  }
  return std::span<const double>(values_).subspan(node * length_, length_);
}

TimeSeriesGrid TimeSeriesGrid::with_values(std::vector<double> values) const {
  return TimeSeriesGrid(std::move(values), length_, nodes_, time_start_,
                        period_, label_);
}

void TimeSeriesGrid::require_analyzable() const {
  if (nodes_.size() < 2) {
    fail(ErrorCode::insufficient_data,
         "grid needs at least 2 nodes, got " + std::to_string(nodes_.size()));
  }
}

TimeSeriesGrid drop_poles(const TimeSeriesGrid& grid) {
  std::vector<NodeMeta> kept;
  std::vector<double> values;
  const std::size_t T = grid.length();
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const NodeMeta& n = grid.nodes()[i];
    if (std::abs(n.lat) == 90.0) continue;
    NodeMeta m = n;
    m.index = kept.size();
    kept.push_back(m);
    auto s = grid.series(i);
    values.insert(values.end(), s.begin(), s.end());
  }
  return TimeSeriesGrid(std::move(values), T, std::move(kept),
                        grid.time_start(), grid.period(), grid.label());
}

TimeSeriesGrid concat_time(const TimeSeriesGrid& a, const TimeSeriesGrid& b) {
  if (a.node_count() != b.node_count()) {
    fail(ErrorCode::consistency, "node counts differ: " +
                                     std::to_string(a.node_count()) + " vs " +
                                     std::to_string(b.node_count()));
  }
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    const auto& na = a.nodes()[i];
    const auto& nb = b.nodes()[i];
    if (na.lat != nb.lat || na.lon != nb.lon) {
      fail(ErrorCode::consistency,
           "node lists differ at node " + std::to_string(i));
    }
  }
  if (a.period() != b.period()) {
    fail(ErrorCode::consistency, "grids have different periods");
  }
  const int expected =
      static_cast<int>(a.phase_of(a.length() - 1) + 1) % a.period() + 1;
  if (b.time_start() != expected) {
    fail(ErrorCode::sequencing,
         "second grid starts at calendar phase " +
             std::to_string(b.time_start()) + ", expected " +
             std::to_string(expected));
  }
  const std::size_t Ta = a.length();
  const std::size_t Tb = b.length();
  std::vector<double> values;
  values.reserve((Ta + Tb) * a.node_count());
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    auto sa = a.series(i);
    auto sb = b.series(i);
    values.insert(values.end(), sa.begin(), sa.end());
    values.insert(values.end(), sb.begin(), sb.end());
  }
  return TimeSeriesGrid(std::move(values), Ta + Tb, a.nodes(), a.time_start(),
                        a.period(), a.label());
}

std::vector<NodeMeta> regular_mesh(double step) {
  if (!(step > 0.0)) fail(ErrorCode::configuration, "mesh step must be > 0");
  const auto rows = static_cast<std::size_t>(std::llround(180.0 / step)) + 1;
  const auto cols = static_cast<std::size_t>(std::llround(360.0 / step));
  std::vector<NodeMeta> nodes;
  nodes.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double lat = 90.0 - static_cast<double>(r) * step;
    for (std::size_t c = 0; c < cols; ++c) {
      nodes.push_back({lat, static_cast<double>(c) * step, nodes.size()});
    }
  }
  return nodes;
}

}  // namespace nonlindep
