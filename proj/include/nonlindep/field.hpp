#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nonlindep/grid.hpp"

namespace nonlindep {

enum class FieldKind : std::uint8_t {
  mi_mean,
  mi_surr_mean,
  extra_normal,
  extra_normal_relative,
};

const char* to_string(FieldKind kind) noexcept;
FieldKind field_kind_from_string(const std::string& name);

/// Per-node scalar map. Entries whose `defined` flag is false carry no value
/// and are written as empty cells.
struct NodeField {
  FieldKind kind = FieldKind::mi_mean;
  std::vector<NodeMeta> nodes;
  std::vector<double> values;
  std::vector<std::uint8_t> defined;

  std::size_t size() const noexcept { return values.size(); }
  bool is_defined(std::size_t i) const { return defined[i] != 0; }
};

}  // namespace nonlindep
