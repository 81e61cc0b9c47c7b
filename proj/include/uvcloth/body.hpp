#pragma once

// Procedural parametric skinned body: capsule-per-bone humanoid with a packed
// rectangular UV atlas, linear blend skinning, and the dress proxy variant
// whose inter-leg gap is bridged by an ellipsoid.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvcloth/mesh.hpp"
#include "uvcloth/motion.hpp"

namespace uvc {

struct BodyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Bone {
  std::string name;
  int parent = -1;          // index into Skeleton::bones, < own index
  Vec3 rest_head, rest_tail;  // T-pose, meters
  double radius = 0.05;     // capsule radius of the body part
};

struct Skeleton {
  std::vector<Bone> bones;

  int bone_count() const { return static_cast<int>(bones.size()); }
  int find(const std::string& name) const {
    for (int i = 0; i < bone_count(); ++i)
      if (bones[i].name == name) return i;
    return -1;
  }
};

inline void validate_skeleton(const Skeleton& s) {
  int roots = 0;
  for (int i = 0; i < s.bone_count(); ++i) {
    const Bone& b = s.bones[i];
    if (b.parent < 0)
      ++roots;
    else if (b.parent >= i)
      throw BodyError("bone " + b.name + " parent not earlier in list");
    if (distance(b.rest_head, b.rest_tail) <= 1e-4)
      throw BodyError("bone " + b.name + " shorter than 1e-4 m");
  }
  if (roots != 1) throw BodyError("skeleton must have exactly one root");
}

struct SkinWeight {
  int bone;
  double weight;
};

// Per-segment scale factors, all default 1.0, valid range [0.5, 2.0].
struct ShapeParams {
  double torso = 1.0;
  double arms = 1.0;
  double legs = 1.0;
  double neck = 1.0;
  double girth = 1.0;  // scales capsule radii
};

struct BodyModel {
  TriMesh tpose;                                 // template mesh with UV atlas
  Skeleton skeleton;
  std::vector<std::vector<SkinWeight>> skin_weights;  // per vertex, <= 4 bones, sums to 1
  ShapeParams shape;
  bool has_leg_bridge = false;                   // true for the dress proxy

  int vertex_count() const { return tpose.vertex_count(); }
};

inline void validate_body(const BodyModel& body) {
  validate_skeleton(body.skeleton);
  if (body.skin_weights.size() != body.tpose.vertices.size())
    throw BodyError("skin weight table size mismatch");
  for (size_t v = 0; v < body.skin_weights.size(); ++v) {
    const auto& ws = body.skin_weights[v];
    if (ws.empty() || ws.size() > 4)
      throw BodyError("vertex " + std::to_string(v) + " has " + std::to_string(ws.size()) +
                      " bone influences (must be 1..4)");
    double sum = 0.0;
    for (const auto& w : ws) {
      if (w.weight < 0.0) throw BodyError("negative skin weight");
      if (w.bone < 0 || w.bone >= body.skeleton.bone_count())
        throw BodyError("skin weight references unknown bone");
      sum += w.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw BodyError("vertex " + std::to_string(v) + " weights sum to " + std::to_string(sum));
  }
}

// ---------------------------------------------------------------------------
// Capsule / quadric mesh generation with one rectangular UV chart per part.

namespace detail {

struct ChartRect {
  double u0, v0, u1, v1;
  double u(double s) const { return u0 + (u1 - u0) * s; }
  double v(double s) const { return v0 + (v1 - v0) * s; }
};

// 4x3 atlas grid; chart `cell` (0..11) inset so neighboring charts never touch.
inline ChartRect atlas_cell(int cell) {
  const double mu = 0.012, mv = 0.016;
  int cx = cell % 4, cy = cell / 4;
  return {cx * 0.25 + mu, cy * (1.0 / 3.0) + mv, (cx + 1) * 0.25 - mu, (cy + 1) * (1.0 / 3.0) - mv};
}

struct RingSpec {
  Vec3 center;
  double r1, r2;  // radii along the two frame axes (equal for circular rings)
  double v;       // chart-relative v in [0,1]
};

// Emits a closed surface of revolution-style grid: bottom pole, rings (with a
// duplicated seam column so the chart stays rectangular), top pole.
inline void append_ring_surface(TriMesh& mesh, const Vec3& pole_bottom, const Vec3& pole_top,
                                const std::vector<RingSpec>& rings, const Vec3& e1, const Vec3& e2,
                                int slices, const ChartRect& chart) {
  const int base = mesh.vertex_count();
  const int cols = slices + 1;
  const int nrings = static_cast<int>(rings.size());

  mesh.vertices.push_back(pole_bottom);
  mesh.uv_coords.push_back({chart.u(0.5), chart.v(0.0)});
  for (const RingSpec& ring : rings) {
    for (int j = 0; j <= slices; ++j) {
      double theta = 2.0 * M_PI * (j % slices) / slices;  // seam column repeats position
      Vec3 p = ring.center + e1 * (ring.r1 * std::cos(theta)) + e2 * (ring.r2 * std::sin(theta));
      mesh.vertices.push_back(p);
      mesh.uv_coords.push_back({chart.u(static_cast<double>(j) / slices), chart.v(ring.v)});
    }
  }
  mesh.vertices.push_back(pole_top);
  mesh.uv_coords.push_back({chart.u(0.5), chart.v(1.0)});

  auto ring_vertex = [&](int ring, int col) { return base + 1 + ring * cols + col; };
  const int top = base + 1 + nrings * cols;

  for (int j = 0; j < slices; ++j)
    mesh.faces.push_back({base, ring_vertex(0, j), ring_vertex(0, j + 1)});
  for (int i = 0; i + 1 < nrings; ++i)
    for (int j = 0; j < slices; ++j) {
      mesh.faces.push_back({ring_vertex(i, j), ring_vertex(i + 1, j), ring_vertex(i + 1, j + 1)});
      mesh.faces.push_back({ring_vertex(i, j), ring_vertex(i + 1, j + 1), ring_vertex(i, j + 1)});
    }
  for (int j = 0; j < slices; ++j)
    mesh.faces.push_back({top, ring_vertex(nrings - 1, j + 1), ring_vertex(nrings - 1, j)});
}

// Perpendicular frame for an axis direction. (e1, e2, axis) is left-handed,
// which is what append_ring_surface needs for outward-facing windings.
inline void axis_frame(const Vec3& axis, Vec3& e1, Vec3& e2) {
  Vec3 up = std::abs(axis.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
  e1 = normalized(cross(up, axis));
  e2 = cross(e1, axis);
}

inline void append_capsule(TriMesh& mesh, const Vec3& a, const Vec3& b, double radius, int slices,
                           int cap_rows, int cyl_rows, const ChartRect& chart) {
  Vec3 axis = normalized(b - a);
  Vec3 e1, e2;
  axis_frame(axis, e1, e2);
  const double len = distance(a, b);

  // profile arc length: r*(pi/2) per cap + len of cylinder, used for even v spacing
  const double cap_arc = radius * M_PI * 0.5;
  const double total = 2.0 * cap_arc + len;

  std::vector<RingSpec> rings;
  for (int i = 1; i <= cap_rows; ++i) {  // bottom cap, pole excluded
    double phi = (M_PI * 0.5) * i / cap_rows;
    double s = -radius * std::cos(phi);
    double arc = cap_arc * i / cap_rows;
    rings.push_back({a + axis * s, radius * std::sin(phi), radius * std::sin(phi), arc / total});
  }
  for (int i = 1; i < cyl_rows; ++i) {
    double s = len * i / cyl_rows;
    rings.push_back({a + axis * s, radius, radius, (cap_arc + s) / total});
  }
  for (int i = 0; i <= cap_rows; ++i) {  // top cap, pole excluded
    double phi = (M_PI * 0.5) * i / cap_rows;
    double s = len + radius * std::sin(phi);
    double arc = cap_arc + len + cap_arc * i / cap_rows;
    if (i == cap_rows) break;  // pole handled by append_ring_surface
    rings.push_back({a + axis * s, radius * std::cos(phi), radius * std::cos(phi), arc / total});
  }
  append_ring_surface(mesh, a - axis * radius, b + axis * radius, rings, e1, e2, slices, chart);
}

inline void append_ellipsoid(TriMesh& mesh, const Vec3& center, double sx, double sy, double sz,
                             int slices, int rows, const ChartRect& chart) {
  std::vector<RingSpec> rings;
  for (int i = 1; i < rows; ++i) {
    double phi = M_PI * i / rows;  // 0 at bottom pole
    double y = -sy * std::cos(phi);
    rings.push_back({center + Vec3{0, y, 0}, sx * std::sin(phi), sz * std::sin(phi),
                     static_cast<double>(i) / rows});
  }
  append_ring_surface(mesh, center - Vec3{0, sy, 0}, center + Vec3{0, sy, 0}, rings, Vec3{1, 0, 0},
                      Vec3{0, 0, 1}, slices, chart);
}

inline double segment_distance(const Vec3& p, const Bone& bone) {
  return distance(p, closest_point_on_segment(p, bone.rest_head, bone.rest_tail));
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Skeleton make_default_skeleton(const ShapeParams& shape) {
  auto seg = [&](const std::string& name, int parent, Vec3 head, Vec3 dir, double len,
                 double radius) {
    return Bone{name, parent, head, head + dir * len, radius * shape.girth};
  };
  Skeleton s;
  const double torso_len = 0.29 * shape.torso;
  const double neck_len = 0.18 * shape.neck;
  const double uarm = 0.29 * shape.arms, larm = 0.27 * shape.arms;
  const double uleg = 0.47 * shape.legs, lleg = 0.49 * shape.legs;

  s.bones.push_back(seg("pelvis", -1, {0, 1.00, 0}, {0, 1, 0}, 0.15, 0.13));          // 0
  s.bones.push_back(seg("torso", 0, {0, 1.15, 0}, {0, 1, 0}, torso_len, 0.15));       // 1
  Vec3 torso_tail = s.bones[1].rest_tail;
  s.bones.push_back(seg("neck", 1, torso_tail, {0, 1, 0}, neck_len, 0.08));           // 2
  double shoulder_y = s.bones[1].rest_head.y + 0.862 * torso_len;
  s.bones.push_back(seg("upper_arm_l", 1, {0.16, shoulder_y, 0}, {1, 0, 0}, uarm, 0.050));   // 3
  s.bones.push_back(seg("lower_arm_l", 3, s.bones[3].rest_tail, {1, 0, 0}, larm, 0.042));    // 4
  s.bones.push_back(seg("upper_arm_r", 1, {-0.16, shoulder_y, 0}, {-1, 0, 0}, uarm, 0.050)); // 5
  s.bones.push_back(seg("lower_arm_r", 5, s.bones[5].rest_tail, {-1, 0, 0}, larm, 0.042));   // 6
  s.bones.push_back(seg("upper_leg_l", 0, {0.10, 1.02, 0}, {0, -1, 0}, uleg, 0.085));        // 7
  s.bones.push_back(seg("lower_leg_l", 7, s.bones[7].rest_tail, {0, -1, 0}, lleg, 0.060));   // 8
  s.bones.push_back(seg("upper_leg_r", 0, {-0.10, 1.02, 0}, {0, -1, 0}, uleg, 0.085));       // 9
  s.bones.push_back(seg("lower_leg_r", 9, s.bones[9].rest_tail, {0, -1, 0}, lleg, 0.060));   // 10
  validate_skeleton(s);
  return s;
}

namespace detail {

// Bones allowed to influence vertices generated for `bone`: itself, its
// parent, and its children. Keeps the two legs from grabbing each other.
inline std::vector<int> influence_candidates(const Skeleton& s, int bone) {
  std::vector<int> out{bone};
  if (s.bones[bone].parent >= 0) out.push_back(s.bones[bone].parent);
  for (int i = 0; i < s.bone_count(); ++i)
    if (s.bones[i].parent == bone) out.push_back(i);
  return out;
}

inline std::vector<SkinWeight> falloff_weights(const Skeleton& s, const Vec3& p,
                                               const std::vector<int>& candidates) {
  std::vector<SkinWeight> ws;
  for (int b : candidates) {
    const Bone& bone = s.bones[b];
    double influence_radius = bone.radius * 2.2 + 0.07;
    double d = segment_distance(p, bone);
    double t = 1.0 - d / influence_radius;
    if (t > 0.0) ws.push_back({b, t * t * t});
  }
  if (ws.empty()) return {};
  std::sort(ws.begin(), ws.end(), [](const SkinWeight& a, const SkinWeight& b) {
    return a.weight > b.weight || (a.weight == b.weight && a.bone < b.bone);
  });
  if (ws.size() > 4) ws.resize(4);
  double sum = 0.0;
  for (const auto& w : ws) sum += w.weight;
  double acc = 0.0;
  for (size_t i = 1; i < ws.size(); ++i) {
    ws[i].weight /= sum;
    acc += ws[i].weight;
  }
  ws[0].weight = 1.0 - acc;  // exact partition of unity
  return ws;
}

}  // namespace detail

// Deterministic capsule humanoid: 11 body parts, each with its own UV chart in
// a 4x3 atlas (the 12th cell is reserved for the dress proxy bridge). Height
// 1.70 m at all-ones shape.
inline BodyModel build_procedural_body(const ShapeParams& shape = {}) {
  for (double v : {shape.torso, shape.arms, shape.legs, shape.neck, shape.girth})
    if (!(v >= 0.5 && v <= 2.0))
      throw BodyError("shape parameter outside [0.5, 2.0]");

  BodyModel body;
  body.shape = shape;
  body.skeleton = make_default_skeleton(shape);

  const int slices = 20, cap_rows = 4, cyl_rows = 12;
  std::vector<int> owner;  // generating bone per vertex
  for (int b = 0; b < body.skeleton.bone_count(); ++b) {
    const Bone& bone = body.skeleton.bones[b];
    int before = body.tpose.vertex_count();
    detail::append_capsule(body.tpose, bone.rest_head, bone.rest_tail, bone.radius, slices,
                           cap_rows, cyl_rows, detail::atlas_cell(b));
    owner.resize(body.tpose.vertex_count(), b);
    (void)before;
  }

  body.tpose = compute_vertex_normals(body.tpose);
  weld_normals_by_position(body.tpose);
  validate_mesh(body.tpose);

  body.skin_weights.resize(body.tpose.vertices.size());
  for (int v = 0; v < body.tpose.vertex_count(); ++v) {
    auto candidates = detail::influence_candidates(body.skeleton, owner[v]);
    auto ws = detail::falloff_weights(body.skeleton, body.tpose.vertices[v], candidates);
    if (ws.empty()) ws = {{owner[v], 1.0}};
    body.skin_weights[v] = std::move(ws);
  }
  validate_body(body);
  return body;
}

// ---------------------------------------------------------------------------
// Posing

// World transform per bone for one pose frame (local rotations applied at bone
// heads, root translation applied globally).
inline std::vector<Transform> bone_world_transforms(const Skeleton& skeleton,
                                                    const PoseFrame& pose) {
  if (pose.rotations.size() != static_cast<size_t>(skeleton.bone_count()))
    throw BodyError("pose has " + std::to_string(pose.rotations.size()) + " rotations for " +
                    std::to_string(skeleton.bone_count()) + " bones");
  std::vector<Transform> world(skeleton.bone_count());
  for (int b = 0; b < skeleton.bone_count(); ++b) {
    const Bone& bone = skeleton.bones[b];
    Transform local = Transform::translate(bone.parent < 0
                                               ? bone.rest_head + pose.root_translation
                                               : bone.rest_head - skeleton.bones[bone.parent].rest_head) *
                      Transform::rotate(normalized(pose.rotations[b]));
    world[b] = bone.parent < 0 ? local : world[bone.parent] * local;
  }
  return world;
}

// Skinning transform: maps a rest-space point into the posed bone frame.
inline std::vector<Transform> skinning_transforms(const Skeleton& skeleton,
                                                  const PoseFrame& pose) {
  auto world = bone_world_transforms(skeleton, pose);
  for (int b = 0; b < skeleton.bone_count(); ++b)
    world[b] = world[b] * Transform::translate(-skeleton.bones[b].rest_head);
  return world;
}

inline PoseFrame identity_pose(const Skeleton& skeleton) {
  PoseFrame f;
  f.rotations.assign(skeleton.bone_count(), Quat{});
  return f;
}

// Linear blend skinning; normals recomputed from the deformed geometry.
inline TriMesh pose_body(const BodyModel& body, const PoseFrame& pose) {
  auto skin = skinning_transforms(body.skeleton, pose);
  TriMesh out = body.tpose;
  for (int v = 0; v < out.vertex_count(); ++v) {
    Vec3 p{0, 0, 0};
    for (const SkinWeight& w : body.skin_weights[v])
      p += skin[w.bone].apply(body.tpose.vertices[v]) * w.weight;
    out.vertices[v] = p;
  }
  out = compute_vertex_normals(out);
  weld_normals_by_position(out);
  return out;
}

// Maps motion bone columns onto skeleton order; throws on unknown bone names.
inline PoseFrame motion_frame_pose(const MotionSequence& motion, const Skeleton& skeleton,
                                   int frame) {
  if (frame < 0 || frame >= motion.frame_count()) throw BodyError("motion frame out of range");
  std::vector<int> column_to_bone(motion.bone_names.size());
  for (size_t c = 0; c < motion.bone_names.size(); ++c) {
    int b = skeleton.find(motion.bone_names[c]);
    if (b < 0) throw BodyError("unknown bone name '" + motion.bone_names[c] + "' in motion");
    column_to_bone[c] = b;
  }
  PoseFrame out = identity_pose(skeleton);
  out.root_translation = motion.frames[frame].root_translation;
  for (size_t c = 0; c < column_to_bone.size(); ++c)
    out.rotations[column_to_bone[c]] = motion.frames[frame].rotations[c];
  return out;
}

// ---------------------------------------------------------------------------
// Dress proxy

// Returns a body whose inter-leg gap is bridged by an ellipsoid spanning
// pelvis to knees, skinned 50/50 between the two upper legs at the midline.
// The input body is not modified; the skeleton is shared unchanged.
inline BodyModel build_dress_proxy(const BodyModel& body) {
  const Skeleton& s = body.skeleton;
  int ul = s.find("upper_leg_l"), ur = s.find("upper_leg_r");
  if (ul < 0 || ur < 0) throw BodyError("body lacks upper leg bones");

  const Bone& left = s.bones[ul];
  const double top_y = left.rest_head.y;
  const double knee_y = left.rest_tail.y;
  const double leg_x = std::abs(left.rest_head.x);

  BodyModel proxy = body;
  proxy.has_leg_bridge = true;

  const Vec3 center{0.0, 0.5 * (top_y + knee_y), 0.0};
  const double sy = 0.5 * (top_y - knee_y);
  const double sx = leg_x + 0.005;                    // sink into both leg capsules
  const double sz = left.radius * 1.45;               // proud of the legs front/back
  TriMesh& mesh = proxy.tpose;
  const int first_new = mesh.vertex_count();
  detail::append_ellipsoid(mesh, center, sx, sy, sz, 24, 16, detail::atlas_cell(11));

  mesh = compute_vertex_normals(mesh);
  weld_normals_by_position(mesh);
  validate_mesh(mesh);

  proxy.skin_weights.resize(mesh.vertices.size());
  for (int v = first_new; v < mesh.vertex_count(); ++v) {
    double t = std::clamp((mesh.vertices[v].x / sx + 1.0) * 0.5, 0.0, 1.0);
    double wl = t * t * (3.0 - 2.0 * t);  // smoothstep, 0.5 at the midline
    if (wl <= 0.0)
      proxy.skin_weights[v] = {{ur, 1.0}};
    else if (wl >= 1.0)
      proxy.skin_weights[v] = {{ul, 1.0}};
    else
      proxy.skin_weights[v] = {{ul, wl}, {ur, 1.0 - wl}};
  }
  validate_body(proxy);
  return proxy;
}

// ---------------------------------------------------------------------------
// Collision capsules for the cloth simulator.

struct Capsule {
  Vec3 a, b;
  double radius;
};

inline std::vector<Capsule> body_collision_capsules(const BodyModel& body,
                                                    const PoseFrame& pose) {
  auto skin = skinning_transforms(body.skeleton, pose);
  std::vector<Capsule> caps;
  caps.reserve(body.skeleton.bone_count());
  for (int b = 0; b < body.skeleton.bone_count(); ++b) {
    const Bone& bone = body.skeleton.bones[b];
    caps.push_back({skin[b].apply(bone.rest_head), skin[b].apply(bone.rest_tail), bone.radius});
  }
  return caps;
}

}  // namespace uvc
