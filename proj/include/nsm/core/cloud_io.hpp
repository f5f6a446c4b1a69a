#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/log.hpp"

namespace nsm {

enum class CloudFormat { xyz, ply_ascii, pcd_ascii };

struct LoadedCloud {
  PointCloud cloud;
  std::size_t dropped = 0;  ///< rows with a non-finite coordinate
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

inline double parse_double_or_throw(std::string_view tok, const std::filesystem::path& path, std::size_t line_no) {
  double v = 0.0;
  if (!parse_double(tok, v)) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + std::string(tok) + "'");
  }
  return v;
}

inline std::size_t parse_count(std::string_view tok, const std::string& what) {
  std::size_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) throw ParseError("bad " + what + ": '" + std::string(tok) + "'");
  return v;
}

/// Shortest text that reads back to exactly the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  return out;
}

class CloudBuilder {
 public:
  void add(double x, double y, double z) {
    const Point p(x, y, z);
    if (is_finite(p)) {
      result_.cloud.points.push_back(p);
    } else {
      ++result_.dropped;
    }
  }
  LoadedCloud finish(const std::filesystem::path& path) {
    if (result_.dropped > 0) {
      log_warn(path.string() + ": dropped " + std::to_string(result_.dropped) + " non-finite point(s)");
    }
    result_.cloud.frame_id = path.stem().string();
    return std::move(result_);
  }

 private:
  LoadedCloud result_;
};

inline LoadedCloud load_xyz(const std::filesystem::path& path) {
  auto in = open_input(path);
  CloudBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = split_ws(view);
    if (tok.empty()) continue;
    if (tok.size() < 3) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    builder.add(parse_double_or_throw(tok[0], path, line_no), parse_double_or_throw(tok[1], path, line_no),
                parse_double_or_throw(tok[2], path, line_no));
  }
  return builder.finish(path);
}

inline LoadedCloud load_ply(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError(path.string() + ": missing 'ply' magic");
  std::size_t vertex_count = 0;
  bool in_vertex = false, seen_vertex = false, seen_format = false;
  std::vector<std::string> vertex_props;
  for (;;) {
    if (!next_line()) throw ParseError(path.string() + ": header not terminated by end_header");
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 3) throw ParseError(path.string() + ": malformed format line");
      if (tok[1] != "ascii") throw ParseError(path.string() + ": unsupported PLY encoding '" + std::string(tok[1]) + "' (ascii only)");
      if (tok[2] != "1.0") throw VersionMismatch(path.string() + ": unsupported PLY version " + std::string(tok[2]));
      seen_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() < 3) throw ParseError(path.string() + ": malformed element line");
      if (tok[1] == "vertex") {
        if (seen_vertex) throw ParseError(path.string() + ": duplicate vertex element");
        vertex_count = parse_count(tok[2], "vertex count");
        in_vertex = seen_vertex = true;
      } else {
        // Other elements are allowed only after the vertex block; their rows are ignored.
        if (!seen_vertex) throw ParseError(path.string() + ": vertex element must come first");
        in_vertex = false;
      }
    } else if (tok[0] == "property") {
      if (tok.size() < 3) throw ParseError(path.string() + ": malformed property line");
      if (in_vertex) {
        if (tok[1] == "list") throw ParseError(path.string() + ": list properties on vertices are not supported");
        vertex_props.emplace_back(tok.back());
      }
    } else {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!seen_format) throw ParseError(path.string() + ": missing format line");
  auto column = [&](const char* name) {
    const auto it = std::find(vertex_props.begin(), vertex_props.end(), name);
    if (it == vertex_props.end()) throw ParseError(path.string() + ": vertex property '" + name + "' missing");
    return static_cast<std::size_t>(it - vertex_props.begin());
  };
  const std::size_t cx = column("x"), cy = column("y"), cz = column("z");

  CloudBuilder builder;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!next_line()) throw ParseError(path.string() + ": expected " + std::to_string(vertex_count) + " vertices, got " + std::to_string(i));
    const auto tok = split_ws(line);
    if (tok.size() < vertex_props.size()) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": too few columns");
    builder.add(parse_double_or_throw(tok[cx], path, line_no), parse_double_or_throw(tok[cy], path, line_no),
                parse_double_or_throw(tok[cz], path, line_no));
  }
  return builder.finish(path);
}

inline LoadedCloud load_pcd(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  std::vector<std::size_t> counts;
  std::size_t points = 0;
  bool have_points = false, have_version = false;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError(path.string() + ": header not terminated by DATA");
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tok = split_ws(view);
    if (tok.empty()) continue;
    const auto key = tok[0];
    if (key == "VERSION") {
      if (tok.size() < 2 || (tok[1] != "0.7" && tok[1] != ".7")) {
        throw VersionMismatch(path.string() + ": unsupported PCD version (0.7 only)");
      }
      have_version = true;
    } else if (key == "FIELDS") {
      for (std::size_t i = 1; i < tok.size(); ++i) fields.emplace_back(tok[i]);
    } else if (key == "COUNT") {
      for (std::size_t i = 1; i < tok.size(); ++i) counts.push_back(parse_count(tok[i], "COUNT"));
    } else if (key == "POINTS") {
      if (tok.size() < 2) throw ParseError(path.string() + ": malformed POINTS");
      points = parse_count(tok[1], "POINTS");
      have_points = true;
    } else if (key == "DATA") {
      if (tok.size() < 2 || tok[1] != "ascii") throw ParseError(path.string() + ": unsupported PCD DATA encoding (ascii only)");
      break;
    } else if (key == "SIZE" || key == "TYPE" || key == "WIDTH" || key == "HEIGHT" || key == "VIEWPOINT") {
      continue;
    } else {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unknown header keyword '" + std::string(key) + "'");
    }
  }
  if (!have_version) throw ParseError(path.string() + ": missing VERSION");
  if (!have_points) throw ParseError(path.string() + ": missing POINTS");
  if (counts.empty()) counts.assign(fields.size(), 1);
  if (counts.size() != fields.size()) throw ParseError(path.string() + ": COUNT and FIELDS disagree");

  std::size_t cx = SIZE_MAX, cy = SIZE_MAX, cz = SIZE_MAX, width = 0;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    if (fields[f] == "x") cx = width;
    if (fields[f] == "y") cy = width;
    if (fields[f] == "z") cz = width;
    width += counts[f];
  }
  if (cx == SIZE_MAX || cy == SIZE_MAX || cz == SIZE_MAX) throw ParseError(path.string() + ": FIELDS must include x y z");

  CloudBuilder builder;
  std::size_t read = 0;
  while (read < points && std::getline(in, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < width) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": too few columns");
    builder.add(parse_double_or_throw(tok[cx], path, line_no), parse_double_or_throw(tok[cy], path, line_no),
                parse_double_or_throw(tok[cz], path, line_no));
    ++read;
  }
  if (read != points) throw ParseError(path.string() + ": expected " + std::to_string(points) + " points, got " + std::to_string(read));
  return builder.finish(path);
}

}  // namespace detail

/// Picks the format from the extension: .ply, .pcd, anything else is xyz.
inline CloudFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".ply") return CloudFormat::ply_ascii;
  if (ext == ".pcd") return CloudFormat::pcd_ascii;
  return CloudFormat::xyz;
}

inline LoadedCloud load_cloud(const std::filesystem::path& path, CloudFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  switch (format) {
    case CloudFormat::xyz: return detail::load_xyz(path);
    case CloudFormat::ply_ascii: return detail::load_ply(path);
    case CloudFormat::pcd_ascii: return detail::load_pcd(path);
  }
  throw ValidationError("unknown cloud format");
}

inline LoadedCloud load_cloud(const std::filesystem::path& path) { return load_cloud(path, format_from_path(path)); }

/// Coordinates are written in shortest round-trip form, so save/load is exact.
inline void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  auto out = detail::open_output(path);
  const auto n = std::to_string(cloud.size());
  switch (format) {
    case CloudFormat::xyz:
      out << "# x y z\n";
      break;
    case CloudFormat::ply_ascii:
      out << "ply\nformat ascii 1.0\nelement vertex " << n
          << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
      break;
    case CloudFormat::pcd_ascii:
      out << "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\n"
             "COUNT 1 1 1\nWIDTH "
          << n << "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " << n << "\nDATA ascii\n";
      break;
  }
  for (const auto& p : cloud.points) {
    out << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' ' << detail::format_double(p.z())
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  save_cloud(cloud, path, format_from_path(path));
}

}  // namespace nsm
