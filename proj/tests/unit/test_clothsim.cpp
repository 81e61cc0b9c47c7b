#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "uvcloth/actions.hpp"
#include "uvcloth/clothsim.hpp"
#include "uvcloth/garments.hpp"
#include "test_helpers.hpp"

using namespace uvc;

namespace {

double total_energy(const ClothState& s, const SpringSet& springs, const SimParams& p) {
  double e = 0.0;
  for (int v = 0; v < s.vertex_count(); ++v)
    e += 0.5 * springs.vertex_mass[v] * length_sq(s.velocities[v]);
  auto spring_energy = [&](const std::vector<Spring>& set, double k) {
    for (const Spring& sp : set) {
      double len = distance(s.positions[sp.i], s.positions[sp.j]);
      e += 0.5 * k * (len - sp.rest) * (len - sp.rest);
    }
  };
  // valid when stretch and compression stiffness agree (the test sets them equal)
  spring_energy(springs.structural, p.garment.structural_stiffness);
  spring_energy(springs.shear, p.garment.shear_stiffness);
  spring_energy(springs.bending, p.garment.bending_stiffness);
  return e;
}

}  // namespace

TEST_CASE("a two-triangle quad yields 5 structural springs and one cross pair") {
  TriMesh quad;
  quad.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}};
  quad.faces = {{0, 1, 2}, {0, 2, 3}};
  quad = compute_vertex_normals(quad);

  SpringSet s = build_springs(quad, SimParams{});
  CHECK(s.structural.size() == 5);
  REQUIRE(s.shear.size() == 1);   // flat rest configuration -> the cross pair shears
  REQUIRE(s.bending.size() == 1); // and also resists folding
  CHECK(s.shear[0].i == std::min(1, 3));
  CHECK(s.shear[0].j == std::max(1, 3));
  CHECK(s.bending[0].i == s.shear[0].i);
  CHECK(s.bending[0].j == s.shear[0].j);
}

TEST_CASE("10x10 grid spring counts match the combinatorial formula") {
  TriMesh grid = testutil::make_grid(9, 9, 0.5, 0.5);  // 10x10 vertices, 81 cells
  SpringSet s = build_springs(grid, SimParams{});
  CHECK(s.structural.size() == 2 * 10 * 9 + 81);  // axis edges + one diagonal per cell
  // internal edges: (3*162 - 36)/2 = 225 cross pairs, all planar at rest
  CHECK(s.bending.size() == 225);
  CHECK(s.shear.size() == 225);
}

TEST_CASE("duplicate faces do not duplicate springs") {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 1, 2}};
  SpringSet s = build_springs(m, SimParams{});
  CHECK(s.structural.size() == 3);
}

TEST_CASE("empty meshes are rejected") {
  TriMesh m;
  m.vertices = {{0, 0, 0}};
  REQUIRE_THROWS_AS(build_springs(m, SimParams{}), SimError);
}

TEST_CASE("a stretched spring pulls both endpoints with Hooke's force") {
  SimParams params;
  params.garment.structural_stiffness = 50.0;
  params.garment.damping = 0.0;

  SpringSet springs;
  springs.structural.push_back({0, 1, 1.0});
  springs.vertex_mass = {0.01, 0.01};

  ClothState state;
  state.positions = {{0, 0, 0}, {1.1, 0, 0}};  // stretched 10%
  state.velocities = {{0, 0, 0}, {0, 0, 0}};
  state.pinned = {0, 0};

  std::vector<Vec3> forces(2);
  accumulate_internal_forces(state, springs, params, forces);
  CHECK(distance(forces[0], -forces[1]) < 1e-12);
  CHECK(length(forces[0]) == Catch::Approx(50.0 * 0.1 * 1.0).margin(1e-9));
  CHECK(forces[0].x > 0);  // pulled towards the other endpoint
}

TEST_CASE("internal forces sum to zero") {
  TriMesh grid = testutil::make_grid(7, 7, 0.4, 0.4);
  SimParams params;
  SpringSet springs = build_springs(grid, params);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  ClothState state = make_cloth_state(grid);
  for (int v = 0; v < state.vertex_count(); ++v) {
    state.positions[v] += Vec3{u(rng), u(rng), u(rng)};
    state.velocities[v] = {u(rng), u(rng), u(rng)};
  }

  std::vector<Vec3> forces(state.vertex_count());
  accumulate_internal_forces(state, springs, params, forces);
  Vec3 sum{0, 0, 0};
  for (const Vec3& f : forces) sum += f;
  CHECK(length(sum) < 1e-9);
}

TEST_CASE("energy drifts less than 1% without dissipation") {
  TriMesh grid = testutil::make_grid(8, 8, 0.4, 0.4);
  SimParams params;  // keeps the default dt
  params.garment.structural_stiffness = 0.1;
  params.garment.shear_stiffness = 0.1;
  params.garment.bending_stiffness = 0.1;
  params.garment.compression_stiffness = 0.1;  // equal k so potential energy is well-defined
  params.garment.damping = 0.0;
  params.garment.areal_density = 2.5;
  params.world.gravity = {0, 0, 0};
  params.world.air_drag = 0.0;
  params.solver.substeps = 1;

  SpringSet springs = build_springs(grid, params);
  ClothState state = make_cloth_state(grid);
  for (auto& p : state.positions) p = p * 1.08;  // initial stretch

  double e0 = total_energy(state, springs, params);
  REQUIRE(e0 > 0.0);
  for (int i = 0; i < 1000; ++i) state = step(state, springs, params, {});
  double e1 = total_energy(state, springs, params);
  CHECK(std::abs(e1 - e0) / e0 < 0.01);
}

TEST_CASE("pinned vertices are bit-stationary") {
  TriMesh grid = testutil::make_grid(6, 6, 0.3, 0.3);
  SimParams params;
  SpringSet springs = build_springs(grid, params);
  ClothState state = make_cloth_state(grid);
  for (int x = 0; x <= 6; ++x) state.pinned[x] = 1;  // first row

  std::vector<Vec3> before;
  for (int x = 0; x <= 6; ++x) before.push_back(state.positions[x]);
  for (int i = 0; i < 50; ++i) state = step(state, springs, params, {});
  for (int x = 0; x <= 6; ++x) {
    CHECK(state.positions[x] == before[x]);
    CHECK(state.velocities[x] == Vec3{0, 0, 0});
  }
}

TEST_CASE("vertices are projected out of capsules") {
  TriMesh grid = testutil::make_grid(4, 4, 0.3, 0.3);
  SimParams params;
  SpringSet springs = build_springs(grid, params);
  ClothState state = make_cloth_state(grid);

  Capsule capsule{{0.15, -0.2, 0.15}, {0.15, 0.2, 0.15}, 0.1};
  state.positions[12] = {0.15, 0.0, 0.15};  // dead inside the capsule

  state = step(state, springs, params, {capsule});
  for (int v = 0; v < state.vertex_count(); ++v) {
    Vec3 q = closest_point_on_segment(state.positions[v], capsule.a, capsule.b);
    CHECK(distance(state.positions[v], q) >=
          capsule.radius + params.solver.collision_thickness - 1e-6);
  }
}

TEST_CASE("cloth pinned along the top edge settles under gravity") {
  TriMesh grid = testutil::make_grid(8, 8, 0.4, 0.4);
  SimParams params;
  params.garment.damping = 0.35;
  params.world.air_drag = 2.5;
  SpringSet springs = build_springs(grid, params);

  ClothState state = make_cloth_state(grid);
  for (int x = 0; x <= 8; ++x) state.pinned[x] = 1;

  for (int i = 0; i < 1200; ++i) state = step(state, springs, params, {});

  double vmax = 0.0;
  for (const Vec3& v : state.velocities) vmax = std::max(vmax, length(v));
  CHECK(vmax < 1e-4);

  // residual net force on free vertices (gravity + drag + springs)
  std::vector<Vec3> forces(state.vertex_count());
  for (int v = 0; v < state.vertex_count(); ++v)
    forces[v] = params.world.gravity * springs.vertex_mass[v] -
                state.velocities[v] * (params.world.air_drag * springs.vertex_mass[v]);
  accumulate_internal_forces(state, springs, params, forces);
  for (int v = 0; v < state.vertex_count(); ++v)
    if (!state.pinned[v]) CHECK(length(forces[v]) < 1e-3);
}

TEST_CASE("the explosion guard names the offending vertex") {
  TriMesh grid = testutil::make_grid(3, 3, 0.2, 0.2);
  SimParams params;
  SpringSet springs = build_springs(grid, params);
  ClothState state = make_cloth_state(grid);
  state.velocities[5] = {1e9, 0, 0};
  try {
    step(state, springs, params, {});
    FAIL("expected explosion guard");
  } catch (const SimError& e) {
    CHECK(std::string(e.what()).find("vertex") != std::string::npos);
  }
}

TEST_CASE("simulated sequences are deterministic and sized per frame") {
  BodyModel body = build_procedural_body();
  TriMesh dress = make_dress_garment(body);
  MotionSequence motion = synthesize_motion(body.skeleton, "sway", 6, 30.0);
  SimParams params;

  auto a = simulate_sequence(dress, body, motion, params);
  auto b = simulate_sequence(dress, body, motion, params);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  for (size_t k = 0; k < a.size(); ++k)
    for (int v = 0; v < a[k].vertex_count(); ++v) CHECK(a[k].vertices[v] == b[k].vertices[v]);
}

TEST_CASE("cloth on a static body comes to rest") {
  BodyModel body = build_procedural_body();
  TriMesh tops = make_tops_garment(body);
  MotionSequence motion = synthesize_motion(body.skeleton, "static_unknown_action", 60, 30.0);
  for (auto& f : motion.frames) {  // force a fully static pose
    f.root_translation = {0, 0, 0};
    for (auto& q : f.rotations) q = Quat{};
  }
  SimParams params;
  params.world.air_drag = 4.0;     // settle fast; the check is about convergence
  params.garment.damping = 0.3;
  auto frames = simulate_sequence(tops, body, motion, params);

  double moved = 0.0;
  for (int v = 0; v < frames[59].vertex_count(); ++v)
    moved = std::max(moved, distance(frames[59].vertices[v], frames[58].vertices[v]));
  CHECK(moved < 1e-4);
}
