#pragma once

// Body <-> cloth correspondence. Built once in T-pose:
//  - per body pixel, a normal ray into the garment (offset baking),
//  - per garment vertex, an inward ray onto the body (arbitrary-garment
//    binding), with reconstruction = posed body point + sampled offset.

#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvcloth/mesh.hpp"
#include "uvcloth/raycast.hpp"
#include "uvcloth/uvbake.hpp"
#include "uvcloth/uvmap.hpp"

namespace uvc {

struct TransferError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class GarmentTemplate : uint8_t { tops = 0, bottoms = 1, dress = 2 };

inline const char* template_name(GarmentTemplate t) {
  switch (t) {
    case GarmentTemplate::tops: return "tops";
    case GarmentTemplate::bottoms: return "bottoms";
    case GarmentTemplate::dress: return "dress";
  }
  return "?";
}

// Farther hits are almost certainly the far side of the body/garment.
inline constexpr double kMaxCorrespondenceDistance = 0.5;

// Per-body-pixel ray hit into the garment rest mesh.
struct BodyToClothTransfer {
  GarmentTemplate template_id = GarmentTemplate::tops;
  int width = 0, height = 0;
  int body_vertex_count = 0;
  int garment_vertex_count = 0;
  struct PixelHit {
    int face = -1;  // garment face, -1 = miss (permanently invalid pixel)
    Vec3 bary;
    double distance = 0.0;
  };
  std::vector<PixelHit> pixels;

  const PixelHit& at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  bool hit(int x, int y) const { return at(x, y).face >= 0; }
  int hit_count() const {
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

// For each valid body pixel, casts a ray from the interpolated surface point
// along the interpolated outward normal; the nearest garment hit within
// kMaxCorrespondenceDistance is kept, everything else stays a miss. For the
// dress template the body must be the dress proxy.
inline BodyToClothTransfer compute_body_to_cloth(const TriMesh& body_tpose,
                                                 const UvTransferMap& body_uv,
                                                 const TriMesh& garment_tpose,
                                                 GarmentTemplate template_id) {
  if (body_tpose.vertex_count() != body_uv.source_vertex_count)
    throw TransferError("compute_body_to_cloth: body does not match uv transfer map");
  if (body_tpose.vertex_normals.empty())
    throw TransferError("compute_body_to_cloth: body mesh lacks normals");

  Bvh bvh = build_bvh(garment_tpose);
  BodyToClothTransfer out;
  out.template_id = template_id;
  out.width = body_uv.width;
  out.height = body_uv.height;
  out.body_vertex_count = body_tpose.vertex_count();
  out.garment_vertex_count = garment_tpose.vertex_count();
  out.pixels.assign(body_uv.pixels.size(), {});

  for (int y = 0; y < body_uv.height; ++y)
    for (int x = 0; x < body_uv.width; ++x) {
      const auto& px = body_uv.at(x, y);
      if (px.face < 0) continue;
      Ray ray{barycentric_point(body_tpose, px.face, px.bary),
              barycentric_normal(body_tpose, px.face, px.bary)};
      auto hit = intersect(bvh, garment_tpose, ray, kRayTMin, kMaxCorrespondenceDistance);
      if (!hit) continue;
      out.pixels[static_cast<size_t>(y) * out.width + x] = {hit->face_index, hit->barycentric,
                                                            hit->distance};
    }
  return out;
}

// I(u,v) = (garment surface point) - (body surface point) at frame meshes,
// evaluated through the T-pose correspondences. Miss pixels stay invalid.
inline UVMap bake_offsets(const BodyToClothTransfer& t_bc, const TriMesh& body_frame,
                          const TriMesh& garment_frame, const UvTransferMap& body_uv) {
  if (body_frame.vertex_count() != t_bc.body_vertex_count ||
      body_frame.vertex_count() != body_uv.source_vertex_count)
    throw TransferError("bake_offsets: body vertex count mismatch");
  if (garment_frame.vertex_count() != t_bc.garment_vertex_count)
    throw TransferError("bake_offsets: garment vertex count mismatch");
  if (t_bc.width != body_uv.width || t_bc.height != body_uv.height)
    throw TransferError("bake_offsets: resolution mismatch");

  UVMap out(t_bc.width, t_bc.height, MapSemantic::offset);
  for (int y = 0; y < t_bc.height; ++y)
    for (int x = 0; x < t_bc.width; ++x) {
      const auto& hit = t_bc.at(x, y);
      if (hit.face < 0) continue;
      Vec3 cloth = barycentric_point(garment_frame, hit.face, hit.bary);
      Vec3 body = barycentric_point(body_frame, body_uv.at(x, y).face, body_uv.at(x, y).bary);
      out.set(x, y, cloth - body);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Arbitrary-garment binding

enum class BindKind : uint8_t {
  ray = 0,       // inward normal ray hit the body
  fallback = 1,  // nearest-point projection (normal ray missed)
  unbound = 2,   // nothing within range; vertex rides the body point-free
};

struct GarmentBinding {
  TriMesh garment;       // rest-pose garment (topology + positions)
  int body_vertex_count = 0;
  struct VertexBind {
    Vec2 uv;             // body UV coordinate of the bound point
    int body_face = -1;
    Vec3 bary;
    double distance = 0.0;
    BindKind kind = BindKind::unbound;
  };
  std::vector<VertexBind> verts;

  double bound_fraction() const {
    if (verts.empty()) return 0.0;
    int n = 0;
    for (const auto& v : verts) n += v.kind != BindKind::unbound;
    return static_cast<double>(n) / verts.size();
  }
  int fallback_count() const {
    int n = 0;
    for (const auto& v : verts) n += v.kind == BindKind::fallback;
    return n;
  }
};

namespace detail {

// Barycentrics of point p (assumed on/near the triangle plane).
inline Vec3 triangle_barycentrics(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
  double d00 = dot(v0, v0), d01 = dot(v0, v1), d11 = dot(v1, v1);
  double d20 = dot(v2, v0), d21 = dot(v2, v1);
  double denom = d00 * d11 - d01 * d01;
  if (std::abs(denom) < 1e-18) return {1, 0, 0};
  double v = (d11 * d20 - d01 * d21) / denom;
  double w = (d00 * d21 - d01 * d20) / denom;
  return {1.0 - v - w, v, w};
}

struct NearestPoint {
  int face = -1;
  Vec3 point;
  double distance = std::numeric_limits<double>::max();
};

inline NearestPoint nearest_point_on_mesh(const TriMesh& mesh, const Vec3& p) {
  NearestPoint best;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.faces[f];
    Vec3 q = closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                       mesh.vertices[t[2]]);
    double d = distance(p, q);
    if (d < best.distance) best = {f, q, d};
  }
  return best;
}

inline Vec2 interpolate_uv(const TriMesh& mesh, int face, const Vec3& bary) {
  const auto& t = mesh.faces[face];
  return {mesh.uv_coords[t[0]].x * bary.x + mesh.uv_coords[t[1]].x * bary.y +
              mesh.uv_coords[t[2]].x * bary.z,
          mesh.uv_coords[t[0]].y * bary.x + mesh.uv_coords[t[1]].y * bary.y +
              mesh.uv_coords[t[2]].y * bary.z};
}

}  // namespace detail

// Binds every garment vertex to the T-pose body by casting along the inward
// vertex normal; misses fall back to nearest-point projection (flagged).
// Fails when fewer than 95% of vertices can be bound at all.
inline GarmentBinding bind_garment(const TriMesh& garment, const TriMesh& body_tpose,
                                   const UvTransferMap& body_uv) {
  if (body_tpose.vertex_count() != body_uv.source_vertex_count)
    throw TransferError("bind_garment: body does not match uv transfer map");
  if (!body_tpose.has_uv()) throw TransferError("bind_garment: body mesh lacks uv_coords");

  TriMesh g = garment.vertex_normals.empty() ? compute_vertex_normals(garment) : garment;
  Bvh bvh = build_bvh(body_tpose);

  GarmentBinding binding;
  binding.garment = g;
  binding.body_vertex_count = body_tpose.vertex_count();
  binding.verts.resize(g.vertex_count());

  for (int v = 0; v < g.vertex_count(); ++v) {
    auto& rec = binding.verts[v];
    Ray ray{g.vertices[v], -g.vertex_normals[v]};
    auto hit = intersect(bvh, body_tpose, ray, kRayTMin, kMaxCorrespondenceDistance);
    if (hit) {
      rec.kind = BindKind::ray;
      rec.body_face = hit->face_index;
      rec.bary = hit->barycentric;
      rec.distance = hit->distance;
    } else {
      auto near = detail::nearest_point_on_mesh(body_tpose, g.vertices[v]);
      if (near.face >= 0 && near.distance <= kMaxCorrespondenceDistance) {
        rec.kind = BindKind::fallback;
        rec.body_face = near.face;
        const auto& t = body_tpose.faces[near.face];
        rec.bary = detail::triangle_barycentrics(near.point, body_tpose.vertices[t[0]],
                                                 body_tpose.vertices[t[1]],
                                                 body_tpose.vertices[t[2]]);
        rec.distance = near.distance;
      } else {
        rec.kind = BindKind::unbound;
        continue;
      }
    }
    rec.uv = detail::interpolate_uv(body_tpose, rec.body_face, rec.bary);
  }

  if (binding.bound_fraction() < 0.95)
    throw TransferError("bind_garment: only " + std::to_string(binding.bound_fraction() * 100.0) +
                        "% of vertices bound; garment incompatible with template coverage");
  return binding;
}

// Mask-aware bilinear sample of an offset map at a UV coordinate. Invalid
// neighbors are excluded and the weights renormalized; when all four are
// invalid the nearest valid pixel within a Chebyshev radius of 3 is used.
inline std::optional<Vec3> sample_offset(const UVMap& map, const Vec2& uv) {
  const int w = map.width, h = map.height;
  double gx = uv.x * w - 0.5, gy = uv.y * h - 0.5;
  int x0 = static_cast<int>(std::floor(gx)), y0 = static_cast<int>(std::floor(gy));
  double fx = gx - x0, fy = gy - y0;

  Vec3 acc{0, 0, 0};
  double wsum = 0.0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      int x = std::clamp(x0 + dx, 0, w - 1), y = std::clamp(y0 + dy, 0, h - 1);
      if (!map.valid(x, y)) continue;
      double weight = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      acc += map.at(x, y) * weight;
      wsum += weight;
    }
  if (wsum > 1e-12) return acc / wsum;

  // all four neighbors invalid: ring search for the nearest valid pixel
  int cx = std::clamp(static_cast<int>(std::floor(uv.x * w)), 0, w - 1);
  int cy = std::clamp(static_cast<int>(std::floor(uv.y * h)), 0, h - 1);
  int best_x = -1, best_y = -1;
  double best_d2 = std::numeric_limits<double>::max();
  for (int r = 1; r <= 3 && best_x < 0; ++r)
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x) {
        if (std::max(std::abs(x - cx), std::abs(y - cy)) != r) continue;
        if (x < 0 || x >= w || y < 0 || y >= h || !map.valid(x, y)) continue;
        double d2 = (x - gx) * (x - gx) + (y - gy) * (y - gy);
        if (d2 < best_d2) {
          best_d2 = d2;
          best_x = x;
          best_y = y;
        }
      }
  if (best_x >= 0) return map.at(best_x, best_y);
  return std::nullopt;
}

// Vertex = posed body point + offset sampled at the bound UV coordinate.
// Vertices with no usable offset (or unbound) keep the body point (or their
// rest position) and are reported in `unresolved` when provided.
inline TriMesh reconstruct_garment(const GarmentBinding& binding, const TriMesh& body_frame,
                                   const UVMap& offsets, std::vector<int>* unresolved = nullptr) {
  if (offsets.semantic != MapSemantic::offset)
    throw TransferError("reconstruct_garment: offsets must be denormalized (offset semantic)");
  if (body_frame.vertex_count() != binding.body_vertex_count)
    throw TransferError("reconstruct_garment: body vertex count mismatch");

  TriMesh out = binding.garment;
  for (int v = 0; v < out.vertex_count(); ++v) {
    const auto& rec = binding.verts[v];
    if (rec.kind == BindKind::unbound) {
      if (unresolved) unresolved->push_back(v);
      continue;  // keeps the rest position
    }
    Vec3 body_point = barycentric_point(body_frame, rec.body_face, rec.bary);
    auto offset = sample_offset(offsets, rec.uv);
    if (!offset) {
      if (unresolved) unresolved->push_back(v);
      out.vertices[v] = body_point;
      continue;
    }
    out.vertices[v] = body_point + *offset;
  }
  out = compute_vertex_normals(out);
  return out;
}

// ---------------------------------------------------------------------------
// GBD1 sidecar: per-vertex binding records, reattached to the garment OBJ.

inline void save_binding(const GarmentBinding& b, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TransferError("cannot write " + path);
  out.write("GBD1", 4);
  uint32_t nv = static_cast<uint32_t>(b.verts.size());
  uint32_t body_nv = static_cast<uint32_t>(b.body_vertex_count);
  out.write(reinterpret_cast<const char*>(&nv), 4);
  out.write(reinterpret_cast<const char*>(&body_nv), 4);
  for (const auto& r : b.verts) {
    double rec[7] = {r.uv.x, r.uv.y, r.bary.x, r.bary.y, r.bary.z, r.distance,
                     static_cast<double>(r.body_face)};
    uint8_t kind = static_cast<uint8_t>(r.kind);
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
    out.write(reinterpret_cast<const char*>(&kind), 1);
  }
  if (!out) throw TransferError("I/O failure writing " + path);
}

inline GarmentBinding load_binding(const std::string& path, const TriMesh& garment) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TransferError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GBD1", 4) != 0) throw TransferError(path + ": bad magic");
  uint32_t nv = 0, body_nv = 0;
  in.read(reinterpret_cast<char*>(&nv), 4);
  in.read(reinterpret_cast<char*>(&body_nv), 4);
  if (!in || nv != static_cast<uint32_t>(garment.vertex_count()))
    throw TransferError(path + ": vertex count does not match garment mesh");
  GarmentBinding b;
  b.garment = garment;
  b.body_vertex_count = static_cast<int>(body_nv);
  b.verts.resize(nv);
  for (auto& r : b.verts) {
    double rec[7];
    uint8_t kind;
    in.read(reinterpret_cast<char*>(rec), sizeof rec);
    in.read(reinterpret_cast<char*>(&kind), 1);
    if (!in) throw TransferError(path + ": truncated file");
    r.uv = {rec[0], rec[1]};
    r.bary = {rec[2], rec[3], rec[4]};
    r.distance = rec[5];
    r.body_face = static_cast<int>(rec[6]);
    r.kind = static_cast<BindKind>(kind);
  }
  return b;
}

}  // namespace uvc
