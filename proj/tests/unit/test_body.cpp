#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "uvcloth/body.hpp"
#include "uvcloth/raycast.hpp"
#include "test_helpers.hpp"

using namespace uvc;

TEST_CASE("default body height is close to 1.7 m") {
  BodyModel body = build_procedural_body();
  Aabb b = bounds(body.tpose);
  double height = b.hi.y - b.lo.y;
  CHECK(height >= 1.65);
  CHECK(height <= 1.75);
  CHECK(body.vertex_count() >= 3000);
  CHECK(body.vertex_count() <= 8000);
}

TEST_CASE("leg scale multiplies leg bone lengths exactly") {
  BodyModel base = build_procedural_body();
  ShapeParams shape;
  shape.legs = 1.2;
  BodyModel scaled = build_procedural_body(shape);
  for (const char* name : {"upper_leg_l", "lower_leg_l", "upper_leg_r", "lower_leg_r"}) {
    const Bone& a = base.skeleton.bones[base.skeleton.find(name)];
    const Bone& b = scaled.skeleton.bones[scaled.skeleton.find(name)];
    double la = distance(a.rest_head, a.rest_tail);
    double lb = distance(b.rest_head, b.rest_tail);
    CHECK(std::abs(lb - 1.2 * la) < 1e-12);
  }
}

TEST_CASE("body construction is deterministic") {
  BodyModel a = build_procedural_body();
  BodyModel b = build_procedural_body();
  REQUIRE(a.vertex_count() == b.vertex_count());
  for (int v = 0; v < a.vertex_count(); ++v) CHECK(a.tpose.vertices[v] == b.tpose.vertices[v]);
}

TEST_CASE("out-of-range shape parameters are rejected") {
  ShapeParams s;
  s.arms = 2.5;
  REQUIRE_THROWS_AS(build_procedural_body(s), BodyError);
  s.arms = 0.2;
  REQUIRE_THROWS_AS(build_procedural_body(s), BodyError);
}

TEST_CASE("body surface normals point away from the nearest bone") {
  BodyModel body = build_procedural_body();
  int outward = 0, total = 0;
  for (int v = 0; v < body.vertex_count(); ++v) {
    const Vec3& p = body.tpose.vertices[v];
    double best = std::numeric_limits<double>::max();
    Vec3 axis_point;
    for (const Bone& b : body.skeleton.bones) {
      Vec3 q = closest_point_on_segment(p, b.rest_head, b.rest_tail);
      if (distance(p, q) < best) {
        best = distance(p, q);
        axis_point = q;
      }
    }
    if (best < 1e-6) continue;  // pole on the axis
    ++total;
    outward += dot(body.tpose.vertex_normals[v], normalized(p - axis_point)) > 0.0;
  }
  // joint overlaps can locally disagree; the surface as a whole must face out
  CHECK(outward > 0.97 * total);
}

TEST_CASE("skin weights are a partition of unity with at most 4 bones") {
  BodyModel body = build_procedural_body();
  for (const auto& ws : body.skin_weights) {
    REQUIRE(!ws.empty());
    REQUIRE(ws.size() <= 4);
    double sum = 0.0;
    for (const auto& w : ws) {
      CHECK(w.weight >= 0.0);
      sum += w.weight;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("identity pose reproduces the template") {
  BodyModel body = build_procedural_body();
  TriMesh posed = pose_body(body, identity_pose(body.skeleton));
  for (int v = 0; v < body.vertex_count(); ++v)
    CHECK(distance(posed.vertices[v], body.tpose.vertices[v]) < 1e-9);
}

TEST_CASE("root rotation moves the body rigidly") {
  BodyModel body = build_procedural_body();
  PoseFrame pose = identity_pose(body.skeleton);
  Quat rot = Quat::axis_angle({0, 1, 0}, 0.83);
  pose.rotations[0] = rot;
  pose.root_translation = {0.3, -0.1, 0.7};
  Vec3 pivot = body.skeleton.bones[0].rest_head;

  TriMesh posed = pose_body(body, pose);
  for (int v = 0; v < body.vertex_count(); ++v) {
    Vec3 expected = pose.root_translation + pivot + rot.rotate(body.tpose.vertices[v] - pivot);
    CHECK(distance(posed.vertices[v], expected) < 1e-9);
  }
}

TEST_CASE("90 degree elbow bend rotates forearm-only vertices about the elbow") {
  BodyModel body = build_procedural_body();
  int forearm = body.skeleton.find("lower_arm_l");
  REQUIRE(forearm >= 0);
  Vec3 elbow = body.skeleton.bones[forearm].rest_head;

  PoseFrame pose = identity_pose(body.skeleton);
  Quat rot = Quat::axis_angle({0, 0, 1}, M_PI / 2.0);
  pose.rotations[forearm] = rot;
  TriMesh posed = pose_body(body, pose);

  int pure = 0;
  for (int v = 0; v < body.vertex_count(); ++v) {
    const auto& ws = body.skin_weights[v];
    if (ws.size() != 1 || ws[0].bone != forearm) continue;
    ++pure;
    Vec3 expected = elbow + rot.rotate(body.tpose.vertices[v] - elbow);
    CHECK(distance(posed.vertices[v], expected) < 1e-9);
  }
  CHECK(pure > 20);  // wrist-end vertices are far from every other bone
}

TEST_CASE("pose application validates the rotation count") {
  BodyModel body = build_procedural_body();
  PoseFrame pose = identity_pose(body.skeleton);
  pose.rotations.pop_back();
  REQUIRE_THROWS_AS(pose_body(body, pose), BodyError);
}

TEST_CASE("dress proxy adds the leg bridge without touching the body") {
  BodyModel body = build_procedural_body();
  std::vector<Vec3> before = body.tpose.vertices;
  BodyModel proxy = build_dress_proxy(body);

  CHECK(proxy.vertex_count() > body.vertex_count());
  CHECK(body.tpose.vertices == before);
  for (int v = 0; v < body.vertex_count(); ++v)
    CHECK(proxy.tpose.vertices[v] == body.tpose.vertices[v]);

  // ray between the legs at mid-thigh height toward -X, just in front of the legs
  int ul = body.skeleton.find("upper_leg_l");
  const Bone& leg = body.skeleton.bones[ul];
  double mid_y = 0.5 * (leg.rest_head.y + leg.rest_tail.y);
  Ray ray{{0.0, mid_y, leg.radius + 0.015}, {-1, 0, 0}};

  Bvh plain_bvh = build_bvh(body.tpose);
  Bvh proxy_bvh = build_bvh(proxy.tpose);
  CHECK_FALSE(intersect(plain_bvh, body.tpose, ray, 1e-6, 1.0).has_value());
  CHECK(intersect(proxy_bvh, proxy.tpose, ray, 1e-6, 1.0).has_value());
}

TEST_CASE("bridge seam has no cracks wider than 1 mm") {
  BodyModel body = build_procedural_body();
  BodyModel proxy = build_dress_proxy(body);
  int ul = body.skeleton.find("upper_leg_l"), ur = body.skeleton.find("upper_leg_r");
  const Bone& left = body.skeleton.bones[ul];
  const Bone& right = body.skeleton.bones[ur];
  double sx = std::abs(left.rest_head.x) + 0.005;

  // bridge vertices near the +-X extremes must lie inside (or within 1 mm of)
  // the leg capsules: the seam is sealed by penetration
  int checked = 0;
  for (int v = body.vertex_count(); v < proxy.vertex_count(); ++v) {
    const Vec3& p = proxy.tpose.vertices[v];
    if (std::abs(p.x) < 0.8 * sx) continue;
    const Bone& bone = p.x > 0 ? left : right;
    double d = distance(p, closest_point_on_segment(p, bone.rest_head, bone.rest_tail));
    CHECK(d <= bone.radius + 1e-3);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("motion round trip is stable at 9 significant digits") {
  BodyModel body = build_procedural_body();
  MotionSequence m;
  for (const Bone& b : body.skeleton.bones) m.bone_names.push_back(b.name);
  m.frame_rate = 30.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 6; ++k) {
    PoseFrame f;
    f.root_translation = {u(rng), u(rng), u(rng)};
    for (size_t b = 0; b < m.bone_names.size(); ++b)
      f.rotations.push_back(normalized(Quat{1.0 + u(rng), u(rng), u(rng), u(rng)}));
    m.frames.push_back(f);
  }

  auto p1 = testutil::temp_path("motion1.txt"), p2 = testutil::temp_path("motion2.txt");
  save_motion(m, p1);
  MotionSequence once = load_motion(p1);
  save_motion(once, p2);
  MotionSequence twice = load_motion(p2);
  REQUIRE(once.frame_count() == 6);
  for (int k = 0; k < 6; ++k)
    for (size_t b = 0; b < m.bone_names.size(); ++b) {
      CHECK(once.frames[k].rotations[b].w == twice.frames[k].rotations[b].w);
      CHECK(once.frames[k].rotations[b].x == twice.frames[k].rotations[b].x);
    }
}

TEST_CASE("5-frame identity motion loads as identity") {
  auto path = testutil::temp_path("ident.txt");
  {
    std::ofstream out(path);
    out << "bones: pelvis torso\nfps: 30\n";
    for (int k = 0; k < 5; ++k) out << "0 0 0 1 0 0 0 1 0 0 0\n";
  }
  MotionSequence m = load_motion(path);
  REQUIRE(m.frame_count() == 5);
  for (const auto& f : m.frames)
    for (const auto& q : f.rotations) {
      CHECK(q.w == 1.0);
      CHECK(q.x == 0.0);
    }
}

TEST_CASE("malformed motion lines are rejected") {
  auto path = testutil::temp_path("badmotion.txt");
  {
    std::ofstream out(path);
    out << "bones: pelvis\nfps: 30\n";
    for (int k = 0; k < 5; ++k) out << "0 0 0 1 0 0\n";  // 3-component rotation
  }
  REQUIRE_THROWS_AS(load_motion(path), MotionError);
}

TEST_CASE("too-short motions are rejected") {
  auto path = testutil::temp_path("short.txt");
  {
    std::ofstream out(path);
    out << "bones: pelvis\nfps: 30\n0 0 0 1 0 0 0\n";
  }
  REQUIRE_THROWS_AS(load_motion(path), MotionError);
}

TEST_CASE("unknown bone names fail at pose mapping") {
  BodyModel body = build_procedural_body();
  MotionSequence m;
  m.bone_names = {"no_such_bone"};
  m.frame_rate = 30;
  for (int k = 0; k < 5; ++k) {
    PoseFrame f;
    f.rotations = {Quat{}};
    m.frames.push_back(f);
  }
  REQUIRE_THROWS_AS(motion_frame_pose(m, body.skeleton, 0), BodyError);
}
