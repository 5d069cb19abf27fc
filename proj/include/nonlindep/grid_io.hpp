#pragma once

#include <filesystem>
#include <string>

#include "nonlindep/field.hpp"
#include "nonlindep/grid.hpp"

namespace nonlindep {

enum class GridFormat { flatbin, csv };

GridFormat grid_format_from_string(const std::string& name);
const char* to_string(GridFormat format) noexcept;

/// Sidecar path for a data file: "<path>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& data);

/// Reads a grid and its JSON sidecar.
///
/// flatbin: little-endian float32, time-major (all N nodes of t=0 first);
/// the file must be exactly 4*T*N bytes. csv: header "t,node0,...,nodeN-1"
/// followed by T rows. The sidecar carries T, N, period, time_start, label
/// and the node coordinates.
///
/// Errors: malformed header -> format; non-finite sample -> data (names the
/// time and node index); sidecar/payload shape mismatch -> consistency.
TimeSeriesGrid load_grid(const std::filesystem::path& path, GridFormat format);

/// Writes data file and sidecar. flatbin narrows to float32, so the
/// round trip is bit-exact only for float-representable values; csv prints
/// 17 significant digits and is exact for doubles.
///
/// `extra_json` (a JSON object serialized as text) is stored under the
/// sidecar key "source"; used to stamp generator specs and provenance.
void save_grid(const TimeSeriesGrid& grid, const std::filesystem::path& path,
               GridFormat format, const std::string& extra_json = "");

/// NodeField CSV: header "lat,lon,value", one row per node, 9 significant
/// digits, undefined entries as empty cells.
void save_field(const NodeField& field, const std::filesystem::path& path);
NodeField load_field(const std::filesystem::path& path, FieldKind kind);

}  // namespace nonlindep
