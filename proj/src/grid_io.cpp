#include "nonlindep/grid_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nonlindep/error.hpp"

namespace nonlindep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFlatbinTag = "flatbin-f32-le";
constexpr const char* kCsvTag = "csv";

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) |
           (v >> 24);
  }
  return v;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::format, "malformed JSON in " + path.string() + ": " +
                                e.what());
  }
}

struct Header {
  std::size_t T = 0;
  std::size_t N = 0;
  int period = 12;
  int time_start = 1;
  std::string label;
  std::vector<NodeMeta> nodes;
};

Header parse_header(const fs::path& sidecar, const char* expected_tag) {
  const json j = read_json(sidecar);
  Header h;
  try {
    const std::string tag = j.at("format").get<std::string>();
    if (tag != expected_tag) {
      fail(ErrorCode::format, "sidecar " + sidecar.string() +
                                  " declares format '" + tag +
                                  "', expected '" + expected_tag + "'");
    }
    h.T = j.at("T").get<std::size_t>();
    h.N = j.at("N").get<std::size_t>();
    h.period = j.at("period").get<int>();
    h.time_start = j.at("time_start").get<int>();
    h.label = j.value("label", std::string{});
    for (const auto& n : j.at("nodes")) {
      h.nodes.push_back(
          {n.at("lat").get<double>(), n.at("lon").get<double>(), h.nodes.size()});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::format,
         "malformed sidecar " + sidecar.string() + ": " + e.what());
  }
  if (h.nodes.size() != h.N) {
    fail(ErrorCode::consistency,
         "sidecar lists " + std::to_string(h.nodes.size()) +
             " nodes but declares N=" + std::to_string(h.N));
  }
  return h;
}

void check_finite(const std::vector<double>& values, std::size_t T) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k])) {
      fail(ErrorCode::data, "non-finite value at (t=" + std::to_string(k % T) +
                                ", node=" + std::to_string(k / T) + ")");
    }
  }
}

TimeSeriesGrid finish(std::vector<double> values, Header h) {
  check_finite(values, h.T);
  TimeSeriesGrid g(std::move(values), h.T, std::move(h.nodes), h.time_start,
                   h.period, std::move(h.label));
  g.require_analyzable();
  return g;
}

TimeSeriesGrid load_flatbin(const fs::path& path) {
  Header h = parse_header(sidecar_path(path), kFlatbinTag);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes != 4 * h.T * h.N) {
    fail(ErrorCode::consistency,
         path.string() + " holds " + std::to_string(bytes) +
             " bytes, sidecar implies " + std::to_string(4 * h.T * h.N));
  }
  std::vector<std::uint32_t> raw(h.T * h.N);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(bytes));
  if (!in) fail(ErrorCode::io, "short read on " + path.string());
  std::vector<double> values(h.T * h.N);
  for (std::size_t t = 0; t < h.T; ++t) {
    for (std::size_t i = 0; i < h.N; ++i) {
      const float f = std::bit_cast<float>(to_little(raw[t * h.N + i]));
      values[i * h.T + t] = static_cast<double>(f);
    }
  }
  return finish(std::move(values), std::move(h));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, std::size_t t, std::size_t node) {
  if (cell.empty()) {
    fail(ErrorCode::data, "missing value at (t=" + std::to_string(t) +
                              ", node=" + std::to_string(node) + ")");
  }
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    fail(ErrorCode::format, "unparsable value '" + cell + "' at (t=" +
                                std::to_string(t) +
                                ", node=" + std::to_string(node) + ")");
  }
  if (!std::isfinite(v)) {
    fail(ErrorCode::data, "non-finite value at (t=" + std::to_string(t) +
                              ", node=" + std::to_string(node) + ")");
  }
  return v;
}

TimeSeriesGrid load_csv(const fs::path& path) {
  Header h = parse_header(sidecar_path(path), kCsvTag);
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::format, "empty csv file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "t") {
    fail(ErrorCode::format, "csv header must start with 't'");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "node" + std::to_string(i - 1)) {
      fail(ErrorCode::format, "csv header column " + std::to_string(i) +
                                  " should be node" + std::to_string(i - 1));
    }
  }
  if (header.size() - 1 != h.N) {
    fail(ErrorCode::consistency,
         "csv has " + std::to_string(header.size() - 1) +
             " node columns but sidecar declares N=" + std::to_string(h.N));
  }
  std::vector<double> values(h.T * h.N);
  std::size_t t = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (t >= h.T) {
      fail(ErrorCode::consistency,
           "csv has more than T=" + std::to_string(h.T) + " rows");
    }
    const auto cells = split_csv(line);
    if (cells.size() != h.N + 1) {
      fail(ErrorCode::format, "csv row " + std::to_string(t) + " has " +
                                  std::to_string(cells.size()) + " cells");
    }
    for (std::size_t i = 0; i < h.N; ++i) {
      values[i * h.T + t] = parse_double(cells[i + 1], t, i);
    }
    ++t;
  }
  if (t != h.T) {
    fail(ErrorCode::consistency, "csv has " + std::to_string(t) +
                                     " rows, sidecar declares T=" +
                                     std::to_string(h.T));
  }
  return finish(std::move(values), std::move(h));
}

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "write failed on " + path.string());
}

}  // namespace

GridFormat grid_format_from_string(const std::string& name) {
  if (name == "flatbin") return GridFormat::flatbin;
  if (name == "csv") return GridFormat::csv;
  fail(ErrorCode::configuration, "unknown grid format '" + name + "'");
}

const char* to_string(GridFormat format) noexcept {
  return format == GridFormat::flatbin ? "flatbin" : "csv";
}

fs::path sidecar_path(const fs::path& data) {
  return fs::path(data.string() + ".json");
}

TimeSeriesGrid load_grid(const fs::path& path, GridFormat format) {
  if (!fs::exists(path)) fail(ErrorCode::io, "no such file " + path.string());
  if (!fs::exists(sidecar_path(path))) {
    fail(ErrorCode::io, "missing sidecar " + sidecar_path(path).string());
  }
  return format == GridFormat::flatbin ? load_flatbin(path) : load_csv(path);
}

void save_grid(const TimeSeriesGrid& grid, const fs::path& path,
               GridFormat format, const std::string& extra_json) {
  const std::size_t T = grid.length();
  const std::size_t N = grid.node_count();
  json side;
  side["format"] = format == GridFormat::flatbin ? kFlatbinTag : kCsvTag;
  side["T"] = T;
  side["N"] = N;
  side["period"] = grid.period();
  side["time_start"] = grid.time_start();
  side["label"] = grid.label();
  json nodes = json::array();
  for (const auto& n : grid.nodes()) nodes.push_back({{"lat", n.lat}, {"lon", n.lon}});
  side["nodes"] = std::move(nodes);
  if (!extra_json.empty()) side["source"] = json::parse(extra_json);

  if (format == GridFormat::flatbin) {
    std::vector<std::uint32_t> raw(T * N);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < N; ++i) {
        const auto f = static_cast<float>(grid.at(t, i));
        raw[t * N + i] = to_little(std::bit_cast<std::uint32_t>(f));
      }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * 4));
    if (!out) fail(ErrorCode::io, "write failed on " + path.string());
  } else {
    std::string text = "t";
    for (std::size_t i = 0; i < N; ++i) text += ",node" + std::to_string(i);
    text += '\n';
    for (std::size_t t = 0; t < T; ++t) {
      text += std::to_string(t);
      for (std::size_t i = 0; i < N; ++i) {
        text += ',';
        text += format_g(grid.at(t, i), 17);
      }
      text += '\n';
    }
    write_text(path, text);
  }
  write_text(sidecar_path(path), side.dump(1) + "\n");
}

void save_field(const NodeField& field, const fs::path& path) {
  if (field.values.size() != field.nodes.size() ||
      field.defined.size() != field.nodes.size()) {
    fail(ErrorCode::consistency, "field arrays have inconsistent lengths");
  }
  std::string text = "lat,lon,value\n";
  for (std::size_t i = 0; i < field.size(); ++i) {
    text += format_g(field.nodes[i].lat, 9) + "," +
            format_g(field.nodes[i].lon, 9) + ",";
    if (field.is_defined(i)) {
      if (!std::isfinite(field.values[i])) {
        fail(ErrorCode::data,
             "non-finite defined field entry at node " + std::to_string(i));
      }
      text += format_g(field.values[i], 9);
    }
    text += '\n';
  }
  write_text(path, text);
}

NodeField load_field(const fs::path& path, FieldKind kind) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "lat,lon,value") {
    fail(ErrorCode::format, "field csv must start with 'lat,lon,value'");
  }
  NodeField f;
  f.kind = kind;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) {
      fail(ErrorCode::format, "field row " + std::to_string(f.size()) +
                                  " must have 3 cells");
    }
    const std::size_t i = f.size();
    f.nodes.push_back({parse_double(cells[0], 0, i), parse_double(cells[1], 0, i), i});
    if (cells[2].empty()) {
      f.values.push_back(0.0);
      f.defined.push_back(0);
    } else {
      f.values.push_back(parse_double(cells[2], 0, i));
      f.defined.push_back(1);
    }
  }
  return f;
}

}  // namespace nonlindep
