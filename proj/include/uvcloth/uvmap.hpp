#pragma once

// UVMap: square W x H x 3 float grid with a validity mask. Carries body
// positions/velocities/accelerations or garment offsets, plus the [-1,1]
// normalization statistics and both file formats.

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvcloth/math.hpp"

namespace uvc {

struct UvMapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MapSemantic : uint8_t {
  position = 0,      // meters
  velocity = 1,      // meters/frame
  acceleration = 2,  // meters/frame^2
  offset = 3,        // meters
  normalized = 4,    // unitless, in [-1,1]
};

inline const char* semantic_name(MapSemantic s) {
  switch (s) {
    case MapSemantic::position: return "position";
    case MapSemantic::velocity: return "velocity";
    case MapSemantic::acceleration: return "acceleration";
    case MapSemantic::offset: return "offset";
    case MapSemantic::normalized: return "normalized";
  }
  return "?";
}

struct UVMap {
  int width = 0, height = 0;
  MapSemantic semantic = MapSemantic::position;
  std::vector<float> data;    // row-major, 3 channels per pixel
  std::vector<uint8_t> mask;  // 1 = valid

  UVMap() = default;
  UVMap(int w, int h, MapSemantic s) : width(w), height(h), semantic(s) {
    data.assign(static_cast<size_t>(w) * h * 3, 0.0f);
    mask.assign(static_cast<size_t>(w) * h, 0);
  }

  size_t pixel_index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  bool valid(int x, int y) const { return mask[pixel_index(x, y)] != 0; }

  Vec3 at(int x, int y) const {
    size_t i = pixel_index(x, y) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, const Vec3& v) {
    size_t i = pixel_index(x, y) * 3;
    data[i] = static_cast<float>(v.x);
    data[i + 1] = static_cast<float>(v.y);
    data[i + 2] = static_cast<float>(v.z);
    mask[pixel_index(x, y)] = 1;
  }

  int valid_count() const {
    int n = 0;
    for (uint8_t m : mask) n += m;
    return n;
  }
};

inline void validate_uvmap(const UVMap& m) {
  if (m.width != m.height) throw UvMapError("UV maps must be square");
  if (m.data.size() != static_cast<size_t>(m.width) * m.height * 3 ||
      m.mask.size() != static_cast<size_t>(m.width) * m.height)
    throw UvMapError("UV map buffer sizes inconsistent with dimensions");
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      size_t i = m.pixel_index(x, y) * 3;
      for (int c = 0; c < 3; ++c)
        if (!std::isfinite(m.data[i + c])) throw UvMapError("non-finite UV map value");
      if (!m.mask[m.pixel_index(x, y)] &&
          (m.data[i] != 0.0f || m.data[i + 1] != 0.0f || m.data[i + 2] != 0.0f))
        throw UvMapError("invalid pixel holds non-zero value");
    }
}

inline bool same_mask(const UVMap& a, const UVMap& b) {
  return a.width == b.width && a.height == b.height && a.mask == b.mask;
}

// --------------------------------------------------------------------------
// UVM1 binary format: magic, u32 width, u32 height, u8 semantic, f32 data
// (row-major, 3 channels), then the mask as packed bits.

inline void save_uvmap(const UVMap& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UvMapError("cannot write " + path);
  out.write("UVM1", 4);
  uint32_t w = m.width, h = m.height;
  uint8_t sem = static_cast<uint8_t>(m.semantic);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&sem), 1);
  out.write(reinterpret_cast<const char*>(m.data.data()), m.data.size() * sizeof(float));
  std::vector<uint8_t> bits((m.mask.size() + 7) / 8, 0);
  for (size_t i = 0; i < m.mask.size(); ++i)
    if (m.mask[i]) bits[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  out.write(reinterpret_cast<const char*>(bits.data()), bits.size());
  if (!out) throw UvMapError("I/O failure writing " + path);
}

inline UVMap load_uvmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UvMapError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "UVM1", 4) != 0) throw UvMapError(path + ": bad magic");
  uint32_t w = 0, h = 0;
  uint8_t sem = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&sem), 1);
  if (!in || sem > 4) throw UvMapError(path + ": bad header");
  UVMap m(static_cast<int>(w), static_cast<int>(h), static_cast<MapSemantic>(sem));
  in.read(reinterpret_cast<char*>(m.data.data()), m.data.size() * sizeof(float));
  std::vector<uint8_t> bits((m.mask.size() + 7) / 8);
  in.read(reinterpret_cast<char*>(bits.data()), bits.size());
  if (!in) throw UvMapError(path + ": truncated file");
  for (size_t i = 0; i < m.mask.size(); ++i)
    m.mask[i] = (bits[i / 8] >> (i % 8)) & 1u;
  validate_uvmap(m);
  return m;
}

// --------------------------------------------------------------------------
// Normalization to [-1,1], per map semantic, channel-wise.

struct ChannelStats {
  Vec3 min, max;  // componentwise over all valid pixels of the fitted maps
};

// Named stats per map semantic ("body_velocity", "offset_tops", ...).
struct NormStats {
  std::map<std::string, ChannelStats> entries;

  const ChannelStats& at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw UvMapError("no normalization stats for '" + name + "'");
    return it->second;
  }
};

inline ChannelStats fit_norm(const std::vector<const UVMap*>& maps) {
  if (maps.empty()) throw UvMapError("fit_norm: no maps");
  Vec3 mn{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 mx = -mn;
  bool any = false;
  for (const UVMap* m : maps)
    for (int y = 0; y < m->height; ++y)
      for (int x = 0; x < m->width; ++x) {
        if (!m->valid(x, y)) continue;
        Vec3 v = m->at(x, y);
        mn = min3(mn, v);
        mx = max3(mx, v);
        any = true;
      }
  if (!any) throw UvMapError("fit_norm: no valid pixels");
  for (int c = 0; c < 3; ++c)
    if (!(mx[c] > mn[c])) {
      const char* names[3] = {"x", "y", "z"};
      throw UvMapError(std::string("fit_norm: degenerate channel ") + names[c] +
                       " (max == min)");
    }
  return {mn, mx};
}

// x -> 2 (x - min) / (max - min) - 1 per channel; invalid pixels stay zero.
inline UVMap normalize(const UVMap& map, const ChannelStats& stats) {
  UVMap out(map.width, map.height, MapSemantic::normalized);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      if (!map.valid(x, y)) continue;
      Vec3 v = map.at(x, y);
      Vec3 n;
      for (int c = 0; c < 3; ++c)
        n[c] = 2.0 * (v[c] - stats.min[c]) / (stats.max[c] - stats.min[c]) - 1.0;
      out.set(x, y, n);
    }
  return out;
}

inline UVMap denormalize(const UVMap& map, const ChannelStats& stats, MapSemantic out_semantic) {
  if (map.semantic != MapSemantic::normalized)
    throw UvMapError("denormalize: input map is not normalized");
  UVMap out(map.width, map.height, out_semantic);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      if (!map.valid(x, y)) continue;
      Vec3 v = map.at(x, y);
      Vec3 d;
      for (int c = 0; c < 3; ++c)
        d[c] = stats.min[c] + (v[c] + 1.0) * 0.5 * (stats.max[c] - stats.min[c]);
      out.set(x, y, d);
    }
  return out;
}

inline void save_norm_stats(const NormStats& stats, const std::string& path) {
  nlohmann::json j;
  for (const auto& [name, cs] : stats.entries) {
    j[name] = {{"min", {cs.min.x, cs.min.y, cs.min.z}}, {"max", {cs.max.x, cs.max.y, cs.max.z}}};
  }
  std::ofstream out(path);
  if (!out) throw UvMapError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw UvMapError("I/O failure writing " + path);
}

inline NormStats load_norm_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UvMapError("cannot open " + path);
  nlohmann::json j;
  in >> j;
  NormStats stats;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ChannelStats cs;
    for (int c = 0; c < 3; ++c) {
      cs.min[c] = it.value()["min"][c].get<double>();
      cs.max[c] = it.value()["max"][c].get<double>();
    }
    stats.entries[it.key()] = cs;
  }
  return stats;
}

}  // namespace uvc
