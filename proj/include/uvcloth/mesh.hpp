#pragma once

// Indexed triangle mesh: the geometry carrier for bodies, garments and
// reconstruction output.

#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uvcloth/math.hpp"

namespace uvc {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TriMesh {
  std::vector<Vec3> vertices;                 // positions, meters
  std::vector<std::array<int, 3>> faces;      // vertex index triples
  std::vector<Vec3> vertex_normals;           // unit vectors, same length as vertices
  std::vector<Vec2> uv_coords;                // optional, per-vertex, in [0,1]^2; empty if absent

  bool has_uv() const { return !uv_coords.empty(); }
  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

inline Vec3 face_normal_unnormalized(const TriMesh& m, int f) {
  const auto& t = m.faces[f];
  return cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
}

inline double face_area(const TriMesh& m, int f) {
  return 0.5 * length(face_normal_unnormalized(m, f));
}

inline double surface_area(const TriMesh& m) {
  double a = 0.0;
  for (int f = 0; f < m.face_count(); ++f) a += face_area(m, f);
  return a;
}

inline Aabb bounds(const TriMesh& m) {
  Aabb b;
  for (const Vec3& v : m.vertices) b.grow(v);
  return b;
}

inline Vec3 barycentric_point(const TriMesh& m, int face, const Vec3& bary) {
  const auto& t = m.faces[face];
  return m.vertices[t[0]] * bary.x + m.vertices[t[1]] * bary.y + m.vertices[t[2]] * bary.z;
}

inline Vec3 barycentric_normal(const TriMesh& m, int face, const Vec3& bary) {
  const auto& t = m.faces[face];
  return normalized(m.vertex_normals[t[0]] * bary.x + m.vertex_normals[t[1]] * bary.y +
                    m.vertex_normals[t[2]] * bary.z);
}

// Checks every TriMesh invariant; throws MeshError naming the first violation.
inline void validate_mesh(const TriMesh& m) {
  const int nv = m.vertex_count();
  for (int f = 0; f < m.face_count(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int idx = m.faces[f][c];
      if (idx < 0 || idx >= nv)
        throw MeshError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                        " outside vertex count " + std::to_string(nv));
    }
    if (face_area(m, f) <= 1e-12)
      throw MeshError("face " + std::to_string(f) + " is degenerate (area <= 1e-12 m^2)");
  }
  if (!m.vertex_normals.empty()) {
    if (static_cast<int>(m.vertex_normals.size()) != nv)
      throw MeshError("vertex_normals length does not match vertex count");
    for (int i = 0; i < nv; ++i) {
      double len = length(m.vertex_normals[i]);
      if (std::abs(len - 1.0) > 1e-6)
        throw MeshError("vertex " + std::to_string(i) + " normal length " + std::to_string(len) +
                        " not unit");
    }
  }
  if (m.has_uv()) {
    if (static_cast<int>(m.uv_coords.size()) != nv)
      throw MeshError("uv_coords length does not match vertex count");
    for (int i = 0; i < nv; ++i) {
      const Vec2& uv = m.uv_coords[i];
      if (!(uv.x >= 0.0 && uv.x <= 1.0 && uv.y >= 0.0 && uv.y <= 1.0))
        throw MeshError("uv coordinate of vertex " + std::to_string(i) + " outside [0,1]^2");
    }
  }
}

// Area-weighted vertex normals. Isolated vertices (no incident face) get +Z
// and their indices are appended to `isolated` when provided.
inline TriMesh compute_vertex_normals(const TriMesh& mesh, std::vector<int>* isolated = nullptr) {
  TriMesh out = mesh;
  out.vertex_normals.assign(mesh.vertices.size(), Vec3{0, 0, 0});
  for (int f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = face_normal_unnormalized(mesh, f);  // magnitude = 2*area, gives area weighting
    for (int c = 0; c < 3; ++c) out.vertex_normals[mesh.faces[f][c]] += n;
  }
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    double len = length(out.vertex_normals[i]);
    if (len < 1e-20) {
      out.vertex_normals[i] = Vec3{0, 0, 1};
      if (isolated) isolated->push_back(i);
    } else {
      out.vertex_normals[i] = out.vertex_normals[i] / len;
    }
  }
  return out;
}

// Fan triangulation of a polygon given as an index loop: (0,1,2), (0,2,3), ...
inline void fan_triangulate(const std::vector<int>& loop, std::vector<std::array<int, 3>>& out) {
  for (size_t i = 1; i + 1 < loop.size(); ++i)
    out.push_back({loop[0], loop[static_cast<int>(i)], loop[static_cast<int>(i) + 1]});
}

// Groups vertices sharing a 3D position (e.g. duplicated UV-seam columns) and
// averages their normals so the seam is shading-continuous.
inline void weld_normals_by_position(TriMesh& mesh) {
  struct KeyHash {
    size_t operator()(const std::array<long long, 3>& k) const {
      size_t h = 1469598103934665603ull;
      for (long long v : k) {
        h ^= static_cast<size_t>(v);
        h *= 1099511628211ull;
      }
      return h;
    }
  };
  std::unordered_map<std::array<long long, 3>, std::vector<int>, KeyHash> groups;
  const double scale = 1e9;  // positions are exact duplicates; quantization just builds the key
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& p = mesh.vertices[i];
    groups[{static_cast<long long>(std::llround(p.x * scale)),
            static_cast<long long>(std::llround(p.y * scale)),
            static_cast<long long>(std::llround(p.z * scale))}].push_back(i);
  }
  for (const auto& [key, idxs] : groups) {
    if (idxs.size() < 2) continue;
    Vec3 sum{0, 0, 0};
    for (int i : idxs) sum += mesh.vertex_normals[i];
    Vec3 n = normalized(sum);
    if (length(n) > 0.5)
      for (int i : idxs) mesh.vertex_normals[i] = n;
  }
}

}  // namespace uvc
