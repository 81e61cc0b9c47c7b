#pragma once

// Shared fixtures for the unit suite: deterministic RNG, simple parametric
// meshes, and temp-file scratch paths.

#include <filesystem>
#include <random>
#include <string>

#include "uvcloth/body.hpp"
#include "uvcloth/mesh.hpp"

namespace testutil {

using uvc::TriMesh;
using uvc::Vec2;
using uvc::Vec3;

inline std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "uvcloth_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

// Sphere tessellated as a ring grid: exactly 2 * slices * (rows - 1) faces.
inline TriMesh make_sphere(double radius, int slices = 25, int rows = 11,
                           const Vec3& center = {0, 0, 0}) {
  TriMesh m;
  uvc::detail::append_ellipsoid(m, center, radius, radius, radius, slices, rows,
                                uvc::detail::ChartRect{0.02, 0.02, 0.98, 0.98});
  m = uvc::compute_vertex_normals(m);
  uvc::weld_normals_by_position(m);
  return m;
}

// Flat cloth grid in the XZ plane at height y, (nx+1)*(nz+1) vertices,
// 2*nx*nz faces, spanning [0,sx] x [0,sz].
inline TriMesh make_grid(int nx, int nz, double sx, double sz, double y = 0.0) {
  TriMesh m;
  for (int iz = 0; iz <= nz; ++iz)
    for (int ix = 0; ix <= nx; ++ix) {
      m.vertices.push_back({sx * ix / nx, y, sz * iz / nz});
      m.uv_coords.push_back({0.02 + 0.96 * ix / nx, 0.02 + 0.96 * iz / nz});
    }
  auto vid = [&](int ix, int iz) { return iz * (nx + 1) + ix; };
  for (int iz = 0; iz < nz; ++iz)
    for (int ix = 0; ix < nx; ++ix) {
      m.faces.push_back({vid(ix, iz), vid(ix + 1, iz), vid(ix + 1, iz + 1)});
      m.faces.push_back({vid(ix, iz), vid(ix + 1, iz + 1), vid(ix, iz + 1)});
    }
  return uvc::compute_vertex_normals(m);
}

inline Vec3 random_unit_vector(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v{n(rng), n(rng), n(rng)};
  while (uvc::length(v) < 1e-6) v = {n(rng), n(rng), n(rng)};
  return uvc::normalized(v);
}

}  // namespace testutil
