#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nonlindep {

struct NodeMeta {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [0, 360)
  std::size_t index = 0;

  friend bool operator==(const NodeMeta&, const NodeMeta&) = default;
};

/// T x N block of samples, one column per grid node, with the calendar
/// position of the first sample. Values are stored column-major by node so
/// that series(i) is a contiguous span.
///
/// Construction validates: every value finite, nodes.size() == N, unique
/// (lat, lon), period >= 1 and T >= 2 * period. The node-count floor N >= 2
/// is checked separately by require_analyzable() so that drop_poles() can
/// return an empty grid.
class TimeSeriesGrid {
 public:
  TimeSeriesGrid() = default;
  TimeSeriesGrid(std::vector<double> values, std::size_t length,
                 std::vector<NodeMeta> nodes, int time_start, int period,
                 std::string label);

  std::size_t length() const noexcept { return length_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  int time_start() const noexcept { return time_start_; }
  int period() const noexcept { return period_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<NodeMeta>& nodes() const noexcept { return nodes_; }

  std::span<const double> series(std::size_t node) const;
  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t t, std::size_t node) const {
    return values_[node * length_ + t];
  }

  /// Calendar phase (0-based) of sample t.
  std::size_t phase_of(std::size_t t) const noexcept {
    return (static_cast<std::size_t>(time_start_ - 1) + t) %
           static_cast<std::size_t>(period_);
  }

  /// Copy of this grid's metadata with a replacement value block of the same
  /// shape (validated).
  TimeSeriesGrid with_values(std::vector<double> values) const;

  /// Throws unless N >= 2.
  void require_analyzable() const;

  friend bool operator==(const TimeSeriesGrid&,
                         const TimeSeriesGrid&) = default;

 private:
  std::vector<double> values_;
  std::size_t length_ = 0;
  std::vector<NodeMeta> nodes_;
  int time_start_ = 1;
  int period_ = 12;
  std::string label_;
};

/// Removes every node at |lat| = 90. Never changes T or reorders survivors.
TimeSeriesGrid drop_poles(const TimeSeriesGrid& grid);

/// Stacks b after a in time. Requires identical node lists and b starting on
/// the calendar successor of a's last sample.
TimeSeriesGrid concat_time(const TimeSeriesGrid& a, const TimeSeriesGrid& b);

/// Regular lat/lon mesh, rows from north to south, with `step` degrees of
/// spacing. lat runs over 90, 90 - step, ..., -90 and lon over 0, step, ...
std::vector<NodeMeta> regular_mesh(double step);

}  // namespace nonlindep
