#pragma once

// UV layout rasterization (pixel -> surface correspondence) and baking of
// body position / velocity / acceleration maps.

#include <optional>
#include <stdexcept>
#include <vector>

#include "uvcloth/mesh.hpp"
#include "uvcloth/uvmap.hpp"

namespace uvc {

struct BakeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pixel -> (face, barycentric) table for one mesh UV layout.
struct UvTransferMap {
  int width = 0, height = 0;
  int source_vertex_count = 0;  // binding check against posed meshes
  struct PixelBinding {
    int face = -1;  // -1 = invalid pixel
    Vec3 bary;
  };
  std::vector<PixelBinding> pixels;  // row-major

  const PixelBinding& at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  bool valid(int x, int y) const { return at(x, y).face >= 0; }
  int valid_count() const {
    int n = 0;
    for (const auto& p : pixels) n += p.face >= 0;
    return n;
  }
  std::vector<uint8_t> mask() const {
    std::vector<uint8_t> m(pixels.size());
    for (size_t i = 0; i < pixels.size(); ++i) m[i] = pixels[i].face >= 0;
    return m;
  }
};

namespace detail {

// Signed twice-area of uv triangle (a,b,c).
inline double uv_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

}  // namespace detail

// Pixel-center sampling: pixel (x,y) covers UV point ((x+.5)/W, (y+.5)/H).
// Each pixel whose center lies inside a UV triangle stores that face and the
// center's barycentrics. Faces are visited in index order and the first
// (lowest-index) face keeps a contested pixel; contested pixels are counted
// and more than 0.1% of covered pixels being contested is a layout error.
inline UvTransferMap rasterize_uv_layout(const TriMesh& mesh, int width, int height) {
  if (!mesh.has_uv()) throw BakeError("rasterize_uv_layout: mesh has no uv_coords");
  if (width != height) throw BakeError("rasterize_uv_layout: maps must be square");

  UvTransferMap map;
  map.width = width;
  map.height = height;
  map.source_vertex_count = mesh.vertex_count();
  map.pixels.assign(static_cast<size_t>(width) * height, {});

  long long overlap = 0, covered = 0;
  const double eps = 1e-12;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    Vec2 a = mesh.uv_coords[tri[0]], b = mesh.uv_coords[tri[1]], c = mesh.uv_coords[tri[2]];
    double area2 = detail::uv_area2(a, b, c);
    if (std::abs(area2) < 1e-16) continue;  // degenerate in UV space, covers nothing

    double lo_u = std::min({a.x, b.x, c.x}), hi_u = std::max({a.x, b.x, c.x});
    double lo_v = std::min({a.y, b.y, c.y}), hi_v = std::max({a.y, b.y, c.y});
    int x0 = std::max(0, static_cast<int>(std::floor(lo_u * width - 0.5)));
    int x1 = std::min(width - 1, static_cast<int>(std::ceil(hi_u * width - 0.5)));
    int y0 = std::max(0, static_cast<int>(std::floor(lo_v * height - 0.5)));
    int y1 = std::min(height - 1, static_cast<int>(std::ceil(hi_v * height - 0.5)));

    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        Vec2 p{(x + 0.5) / width, (y + 0.5) / height};
        double w0 = detail::uv_area2(b, c, p) / area2;
        double w1 = detail::uv_area2(c, a, p) / area2;
        double w2 = detail::uv_area2(a, b, p) / area2;
        if (w0 < -eps || w1 < -eps || w2 < -eps) continue;
        auto& px = map.pixels[static_cast<size_t>(y) * width + x];
        if (px.face >= 0) {
          // pixel centers grazing a shared edge legitimately satisfy two
          // faces; only an interior double-claim counts as layout overlap
          if (w0 > 1e-9 && w1 > 1e-9 && w2 > 1e-9) ++overlap;
          continue;
        }
        px.face = f;
        px.bary = {w0, w1, w2};
        ++covered;
      }
  }
  if (covered > 0 && overlap * 1000 > covered)
    throw BakeError("rasterize_uv_layout: overlapping UV layout (" + std::to_string(overlap) +
                    " contested of " + std::to_string(covered) + " covered pixels)");
  return map;
}

// I(u,v) = interpolated posed surface position at each valid pixel.
inline UVMap bake_positions(const UvTransferMap& transfer, const TriMesh& posed) {
  if (posed.vertex_count() != transfer.source_vertex_count)
    throw BakeError("bake_positions: vertex count mismatch");
  UVMap out(transfer.width, transfer.height, MapSemantic::position);
  for (int y = 0; y < transfer.height; ++y)
    for (int x = 0; x < transfer.width; ++x) {
      const auto& px = transfer.at(x, y);
      if (px.face < 0) continue;
      out.set(x, y, barycentric_point(posed, px.face, px.bary));
    }
  return out;
}

namespace detail {

inline UVMap finite_difference_map(const UVMap& cur, const UVMap& prev, MapSemantic semantic,
                                   const char* op) {
  if (!same_mask(cur, prev)) throw BakeError(std::string(op) + ": mask mismatch");
  UVMap out(cur.width, cur.height, semantic);
  out.mask = cur.mask;
  for (size_t i = 0; i < cur.data.size(); ++i) out.data[i] = cur.data[i] - prev.data[i];
  return out;
}

}  // namespace detail

// v_k = p_k - p_{k-1}, meters/frame.
inline UVMap velocity_map(const UVMap& pos_k, const UVMap& pos_km1) {
  return detail::finite_difference_map(pos_k, pos_km1, MapSemantic::velocity, "velocity_map");
}

// a_k = v_k - v_{k-1}, meters/frame^2.
inline UVMap acceleration_map(const UVMap& vel_k, const UVMap& vel_km1) {
  return detail::finite_difference_map(vel_k, vel_km1, MapSemantic::acceleration,
                                       "acceleration_map");
}

}  // namespace uvc
