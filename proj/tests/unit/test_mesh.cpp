#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "uvcloth/mesh.hpp"
#include "uvcloth/obj_io.hpp"
#include "test_helpers.hpp"

using namespace uvc;
using testutil::temp_path;

namespace {

TriMesh unit_cube() {
  TriMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                     {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return compute_vertex_normals(m);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("load_mesh parses the smallest valid mesh") {
  auto path = temp_path("tri.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  TriMesh m = load_mesh(path);
  CHECK(m.vertex_count() == 3);
  CHECK(m.face_count() == 1);
  CHECK(m.vertex_normals.size() == 3);
}

TEST_CASE("load_mesh fan-triangulates quads") {
  auto path = temp_path("quad.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  TriMesh m = load_mesh(path);
  REQUIRE(m.face_count() == 2);
  CHECK(m.faces[0] == std::array<int, 3>{0, 1, 2});
  CHECK(m.faces[1] == std::array<int, 3>{0, 2, 3});
}

TEST_CASE("load_mesh rejects 0-based face indices with a line number") {
  auto path = temp_path("bad0.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
  try {
    load_mesh(path);
    FAIL("expected parse error");
  } catch (const ObjParseError& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    CHECK(std::string(e.what()).find("1-based") != std::string::npos);
  }
}

TEST_CASE("load_mesh reports malformed records with line numbers") {
  auto path = temp_path("badv.obj");
  write_file(path, "v 0 0\n");
  REQUIRE_THROWS_AS(load_mesh(path), ObjParseError);
}

TEST_CASE("save/load round trip preserves the cube") {
  TriMesh cube = unit_cube();
  auto path = temp_path("cube.obj");
  save_mesh(cube, path);
  TriMesh back = load_mesh(path);
  REQUIRE(back.face_count() == 12);
  REQUIRE(back.vertex_count() == 8);
  for (int v = 0; v < 8; ++v) CHECK(distance(back.vertices[v], cube.vertices[v]) < 1e-7);
  CHECK(back.faces == cube.faces);
}

TEST_CASE("round trip is bit-stable after one decimal round trip") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TriMesh m;
  for (int i = 0; i < 3; ++i) m.vertices.push_back({u(rng), u(rng), u(rng)});
  m.faces.push_back({0, 1, 2});
  m = compute_vertex_normals(m);

  auto p1 = temp_path("rt1.obj"), p2 = temp_path("rt2.obj");
  save_mesh(m, p1);
  TriMesh once = load_mesh(p1);
  save_mesh(once, p2);
  TriMesh twice = load_mesh(p2);
  for (int v = 0; v < 3; ++v) {
    CHECK(once.vertices[v].x == twice.vertices[v].x);
    CHECK(once.vertices[v].y == twice.vertices[v].y);
    CHECK(once.vertices[v].z == twice.vertices[v].z);
  }
}

TEST_CASE("save_mesh writes vt records when uvs are present") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  m.uv_coords = {{0, 0}, {1, 0}, {0, 1}};
  m = compute_vertex_normals(m);
  auto path = temp_path("uv.obj");
  save_mesh(m, path);

  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("vt ") != std::string::npos);
  TriMesh back = load_mesh(path);
  REQUIRE(back.has_uv());
  CHECK(back.uv_coords[2].y == 1.0);
}

TEST_CASE("save_mesh fails cleanly on an unwritable path") {
  REQUIRE_THROWS_AS(save_mesh(unit_cube(), "/nonexistent-dir/x.obj"), IoError);
}

TEST_CASE("flat square gets +Z normals") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  m = compute_vertex_normals(m);
  for (const Vec3& n : m.vertex_normals) CHECK(distance(n, {0, 0, 1}) < 1e-12);
}

TEST_CASE("single triangle vertex normals equal the face normal") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}};
  m.faces = {{0, 1, 2}};
  m = compute_vertex_normals(m);
  Vec3 fn = normalized(face_normal_unnormalized(m, 0));
  for (const Vec3& n : m.vertex_normals) CHECK(distance(n, fn) < 1e-12);
}

TEST_CASE("sphere normals agree with the analytic direction") {
  TriMesh sphere = testutil::make_sphere(1.0);
  double worst = 0.0;
  for (int v = 0; v < sphere.vertex_count(); ++v) {
    double c = std::clamp(dot(sphere.vertex_normals[v], normalized(sphere.vertices[v])), -1.0, 1.0);
    worst = std::max(worst, std::acos(c));
  }
  CHECK(worst < 5.0 * M_PI / 180.0);
}

TEST_CASE("isolated vertices get +Z and a warning") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}};
  m.faces = {{0, 1, 2}};
  std::vector<int> isolated;
  m = compute_vertex_normals(m, &isolated);
  REQUIRE(isolated == std::vector<int>{3});
  CHECK(m.vertex_normals[3] == Vec3{0, 0, 1});
}

TEST_CASE("compute_vertex_normals output is always unit length") {
  TriMesh sphere = testutil::make_sphere(0.37, 13, 7);
  for (const Vec3& n : sphere.vertex_normals) CHECK(std::abs(length(n) - 1.0) < 1e-6);
}

TEST_CASE("validate_mesh names the violated invariant") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 5}};
  REQUIRE_THROWS_WITH(validate_mesh(m), Catch::Matchers::ContainsSubstring("outside vertex count"));

  m.faces = {{0, 1, 1}};
  REQUIRE_THROWS_WITH(validate_mesh(m), Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("fan triangulation preserves convex polygon area") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + trial % 6;
    // convex polygon: sorted angles with random radii smoothed toward a circle
    std::vector<Vec3> pts;
    double r = u(rng);
    for (int i = 0; i < n; ++i) {
      double a = 2 * M_PI * i / n;
      pts.push_back({r * std::cos(a), r * std::sin(a), 0.3});
    }
    double shoelace = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec3 &p = pts[i], &q = pts[(i + 1) % n];
      shoelace += p.x * q.y - q.x * p.y;
    }
    shoelace = 0.5 * std::abs(shoelace);

    TriMesh m;
    m.vertices = pts;
    std::vector<int> loop(n);
    for (int i = 0; i < n; ++i) loop[i] = i;
    fan_triangulate(loop, m.faces);
    CHECK(std::abs(surface_area(m) - shoelace) <= 1e-9 * shoelace);
  }
}
