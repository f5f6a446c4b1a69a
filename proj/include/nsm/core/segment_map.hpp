#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsm/core/binary_io.hpp"
#include "nsm/core/error.hpp"
#include "nsm/core/geometry.hpp"
#include "nsm/core/segment_types.hpp"

namespace nsm {

struct MapEntry {
  std::uint32_t segment_id = 0;
  KeyPose key_pose;
  Descriptor descriptor;
  std::vector<Point> points;  ///< optional payload; may be empty
};

/// Target database of described segments plus the parameter fingerprint it was built with.
struct SegmentMap {
  std::vector<MapEntry> entries;
  std::string fingerprint;
  nlohmann::json params = nlohmann::json::object();
  std::string frame_id;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  void validate() const {
    std::set<std::uint32_t> ids;
    for (const auto& e : entries) {
      if (!ids.insert(e.segment_id).second) {
        throw ValidationError("SegmentMap: duplicate segment id " + std::to_string(e.segment_id));
      }
    }
  }
};

/*
 * `.nsm` container:
 *   line 1   "NSMMAP"
 *   line 2   JSON header (single line): version, fingerprint, params, per-entry ids/counts
 *   payload  per entry, little-endian float64:
 *            position[3], orientation[9] row-major, descriptor[66], points[3 * n]
 */
inline constexpr int kMapFormatVersion = 1;
inline constexpr const char* kMapMagic = "NSMMAP";

inline void save_map(const SegmentMap& map, const std::filesystem::path& path) {
  map.validate();
  nlohmann::json header;
  header["format"] = "nsm-map";
  header["version"] = kMapFormatVersion;
  header["descriptor_dim"] = kDescriptorSize;
  header["payload_encoding"] = "f64le";
  header["fingerprint"] = map.fingerprint;
  header["params"] = map.params;
  header["frame_id"] = map.frame_id;
  header["count"] = map.entries.size();
  auto& list = header["entries"] = nlohmann::json::array();
  for (const auto& e : map.entries) {
    list.push_back({{"id", e.segment_id}, {"isotropic", e.key_pose.isotropic}, {"points", e.points.size()}});
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out << kMapMagic << '\n' << header.dump() << '\n';
  for (const auto& e : map.entries) {
    for (int i = 0; i < 3; ++i) binary::write_le(out, e.key_pose.position[i]);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) binary::write_le(out, e.key_pose.orientation(r, c));
    for (double v : e.descriptor.values) binary::write_le(out, v);
    for (const auto& p : e.points)
      for (int i = 0; i < 3; ++i) binary::write_le(out, p[i]);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/**
 * Reads a `.nsm` container. When `expected_fingerprint` is given and differs
 * from the stored one, throws FingerprintMismatch.
 */
inline SegmentMap load_map(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_fingerprint = std::nullopt) {
  if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());

  std::string magic, header_line;
  if (!std::getline(in, magic) || magic != kMapMagic) throw ParseError(path.string() + ": not an .nsm map (bad magic)");
  if (!std::getline(in, header_line)) throw ParseError(path.string() + ": missing map header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": malformed map header: " + e.what());
  }

  SegmentMap map;
  std::vector<std::pair<std::uint32_t, std::size_t>> layout;
  std::vector<bool> isotropic;
  try {
    const int version = header.at("version").get<int>();
    if (version != kMapFormatVersion) {
      throw VersionMismatch(path.string() + ": map format version " + std::to_string(version) + ", expected " +
                            std::to_string(kMapFormatVersion));
    }
    const auto dim = header.at("descriptor_dim").get<std::size_t>();
    if (dim != kDescriptorSize) {
      throw ParseError(path.string() + ": descriptor width " + std::to_string(dim) + ", expected " +
                       std::to_string(kDescriptorSize));
    }
    if (header.value("payload_encoding", "") != "f64le") throw ParseError(path.string() + ": unknown payload encoding");
    map.fingerprint = header.at("fingerprint").get<std::string>();
    map.params = header.value("params", nlohmann::json::object());
    map.frame_id = header.value("frame_id", "");
    for (const auto& e : header.at("entries")) {
      layout.emplace_back(e.at("id").get<std::uint32_t>(), e.at("points").get<std::size_t>());
      isotropic.push_back(e.value("isotropic", false));
    }
    if (header.at("count").get<std::size_t>() != layout.size()) throw ParseError(path.string() + ": entry count mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": malformed map header: " + e.what());
  }

  if (expected_fingerprint && *expected_fingerprint != map.fingerprint) {
    throw FingerprintMismatch(path.string() + ": map was built with parameter fingerprint " + map.fingerprint +
                              " but the active configuration has " + *expected_fingerprint);
  }

  map.entries.reserve(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    MapEntry e;
    e.segment_id = layout[k].first;
    e.key_pose.isotropic = isotropic[k];
    for (int i = 0; i < 3; ++i) e.key_pose.position[i] = binary::read_le<double>(in, "key pose");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) e.key_pose.orientation(r, c) = binary::read_le<double>(in, "key pose");
    for (double& v : e.descriptor.values) v = binary::read_le<double>(in, "descriptor");
    e.points.resize(layout[k].second);
    for (auto& p : e.points)
      for (int i = 0; i < 3; ++i) p[i] = binary::read_le<double>(in, "point payload");
    map.entries.push_back(std::move(e));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path.string() + ": trailing bytes after payload");
  map.validate();
  return map;
}

}  // namespace nsm
