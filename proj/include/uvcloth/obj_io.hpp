#pragma once

// Wavefront OBJ subset: v / vt / vn / f records, ASCII, 1-based indices.
// Polygon faces are fan-triangulated on load. Materials and groups are ignored.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uvcloth/mesh.hpp"

namespace uvc {

struct ObjParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline ObjParseError parse_error(const std::string& path, int line, const std::string& what) {
  return ObjParseError(path + ":" + std::to_string(line) + ": " + what);
}

// "3", "3/1", "3//2", "3/1/2" -> indices (0 where absent).
inline bool split_face_corner(const std::string& tok, int& vi, int& ti, int& ni) {
  vi = ti = ni = 0;
  int* slots[3] = {&vi, &ti, &ni};
  size_t begin = 0;
  int part = 0;
  while (begin <= tok.size()) {
    size_t end = tok.find('/', begin);
    if (end == std::string::npos) end = tok.size();
    if (part >= 3) return false;
    if (end > begin) {
      auto [ptr, ec] = std::from_chars(tok.data() + begin, tok.data() + end, *slots[part]);
      if (ec != std::errc() || ptr != tok.data() + end) return false;
    }
    ++part;
    if (end == tok.size()) break;
    begin = end + 1;
  }
  return part >= 1;
}

}  // namespace detail

// Loads an OBJ file into a validated TriMesh. Per-vertex vt/vn records are
// adopted only when their index space is aligned with the vertex indices
// (which is how save_mesh writes them); otherwise normals are recomputed and
// uvs dropped.
inline TriMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<Vec3> positions, normals;
  std::vector<Vec2> uvs;
  struct Corner { int v, t, n; };
  std::vector<std::vector<Corner>> polys;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string tag;
    is >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(is >> p.x >> p.y >> p.z)) throw detail::parse_error(path, lineno, "malformed v record");
      positions.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(is >> t.x >> t.y)) throw detail::parse_error(path, lineno, "malformed vt record");
      uvs.push_back(t);
    } else if (tag == "vn") {
      Vec3 n;
      if (!(is >> n.x >> n.y >> n.z)) throw detail::parse_error(path, lineno, "malformed vn record");
      normals.push_back(n);
    } else if (tag == "f") {
      std::vector<Corner> poly;
      std::string tok;
      while (is >> tok) {
        Corner c;
        if (!detail::split_face_corner(tok, c.v, c.t, c.n))
          throw detail::parse_error(path, lineno, "malformed face corner '" + tok + "'");
        if (c.v == 0) throw detail::parse_error(path, lineno, "face index 0 (OBJ is 1-based)");
        if (c.v < 0) c.v = static_cast<int>(positions.size()) + c.v + 1;  // relative index
        if (c.v < 1 || c.v > static_cast<int>(positions.size()))
          throw detail::parse_error(path, lineno,
                                    "face index " + std::to_string(c.v) + " out of range");
        poly.push_back(c);
      }
      if (poly.size() < 3) throw detail::parse_error(path, lineno, "face with fewer than 3 corners");
      polys.push_back(std::move(poly));
    }
    // other tags (o, g, s, usemtl, mtllib, ...) ignored
  }

  TriMesh mesh;
  mesh.vertices = positions;

  bool uv_aligned = !uvs.empty() && uvs.size() == positions.size();
  bool n_aligned = !normals.empty() && normals.size() == positions.size();
  for (const auto& poly : polys) {
    for (const auto& c : poly) {
      if (c.t != 0 && c.t != c.v) uv_aligned = false;
      if (c.n != 0 && c.n != c.v) n_aligned = false;
    }
  }

  for (const auto& poly : polys) {
    std::vector<int> loop;
    loop.reserve(poly.size());
    for (const auto& c : poly) loop.push_back(c.v - 1);
    fan_triangulate(loop, mesh.faces);
  }

  if (uv_aligned) mesh.uv_coords = uvs;
  if (n_aligned) {
    mesh.vertex_normals = normals;
    for (auto& n : mesh.vertex_normals) n = normalized(n);
  } else {
    mesh = compute_vertex_normals(mesh);
  }
  validate_mesh(mesh);
  return mesh;
}

// Writes v/vt/vn/f records at 9 significant digits, 1-based aligned indices.
inline void save_mesh(const TriMesh& mesh, const std::string& path) {
  validate_mesh(mesh);
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path);
  for (const Vec3& v : mesh.vertices) std::fprintf(f, "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
  for (const Vec2& t : mesh.uv_coords) std::fprintf(f, "vt %.9g %.9g\n", t.x, t.y);
  for (const Vec3& n : mesh.vertex_normals) std::fprintf(f, "vn %.9g %.9g %.9g\n", n.x, n.y, n.z);
  const bool has_t = mesh.has_uv();
  const bool has_n = !mesh.vertex_normals.empty();
  for (const auto& face : mesh.faces) {
    if (has_t && has_n)
      std::fprintf(f, "f %d/%d/%d %d/%d/%d %d/%d/%d\n", face[0] + 1, face[0] + 1, face[0] + 1,
                   face[1] + 1, face[1] + 1, face[1] + 1, face[2] + 1, face[2] + 1, face[2] + 1);
    else if (has_n)
      std::fprintf(f, "f %d//%d %d//%d %d//%d\n", face[0] + 1, face[0] + 1, face[1] + 1,
                   face[1] + 1, face[2] + 1, face[2] + 1);
    else
      std::fprintf(f, "f %d %d %d\n", face[0] + 1, face[1] + 1, face[2] + 1);
  }
  bool bad = std::ferror(f) != 0;
  if (std::fclose(f) != 0) bad = true;
  if (bad) throw IoError("I/O failure writing " + path);
}

}  // namespace uvc
