#pragma once

// Spring-mass cloth simulator: semi-implicit Euler with structural / shear /
// bending springs and capsule collisions. Deterministic; the ground-truth
// source for dataset generation.

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "uvcloth/body.hpp"
#include "uvcloth/mesh.hpp"
#include "uvcloth/motion.hpp"

namespace uvc {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cotton-like defaults, tuned once for the procedural templates.
struct GarmentParams {
  double structural_stiffness = 40.0;  // N/m
  double shear_stiffness = 15.0;       // N/m
  double bending_stiffness = 0.5;      // N/m (distance springs on second-ring pairs)
  double compression_stiffness = 20.0; // N/m, used when a structural/shear spring is shorter than rest
  double damping = 0.05;               // N*s/m, along the spring axis
  double areal_density = 0.18;         // kg/m^2
};

struct WorldParams {
  Vec3 gravity{0.0, -9.81, 0.0};  // m/s^2
  double air_drag = 0.8;          // 1/s, force = -drag * m * v
};

struct SolverParams {
  double dt = 1.0 / 1920.0;           // s per substep (keeps omega*dt < ~0.5 at default stiffness)
  int substeps = 32;                  // substeps per step() call
  double collision_thickness = 0.004; // m
  double friction = 0.25;             // tangential velocity fraction removed on contact
};

struct SimParams {
  GarmentParams garment;
  WorldParams world;
  SolverParams solver;
};

inline void validate_sim_params(const SimParams& p) {
  const GarmentParams& g = p.garment;
  for (double k : {g.structural_stiffness, g.shear_stiffness, g.bending_stiffness,
                   g.compression_stiffness, g.damping})
    if (k < 0.0) throw SimError("negative stiffness/damping");
  if (g.areal_density <= 0.0) throw SimError("areal density must be positive");
  if (p.solver.dt <= 0.0) throw SimError("dt must be positive");
  if (p.solver.substeps < 1) throw SimError("substeps must be >= 1");
}

struct Spring {
  int i, j;
  double rest;  // m
};

enum class SpringClass : uint8_t { structural, shear, bending };

struct SpringSet {
  std::vector<Spring> structural;  // unique mesh edges
  std::vector<Spring> shear;       // near-planar cross pairs over shared edges
  std::vector<Spring> bending;     // all cross pairs over shared edges
  std::vector<double> vertex_mass; // kg, from areal density over rest areas
  std::vector<int> vertex_degree;  // incident springs per vertex (damping stability cap)
};

struct ClothState {
  std::vector<Vec3> positions;   // m
  std::vector<Vec3> velocities;  // m/s
  std::vector<uint8_t> pinned;

  int vertex_count() const { return static_cast<int>(positions.size()); }
};

inline ClothState make_cloth_state(const TriMesh& garment) {
  ClothState s;
  s.positions = garment.vertices;
  s.velocities.assign(garment.vertices.size(), Vec3{});
  s.pinned.assign(garment.vertices.size(), 0);
  return s;
}

// Velocities beyond this indicate a blown-up simulation.
inline constexpr double kExplosionSpeed = 100.0;

inline void validate_cloth_state(const ClothState& s) {
  for (int v = 0; v < s.vertex_count(); ++v) {
    if (!is_finite(s.positions[v]) || !is_finite(s.velocities[v]))
      throw SimError("non-finite state at vertex " + std::to_string(v));
    if (length(s.velocities[v]) >= kExplosionSpeed)
      throw SimError("explosion guard tripped at vertex " + std::to_string(v));
  }
}

// Cross pairs closer than ~30 degrees to flat count as in-plane (shear).
inline constexpr double kShearPlanarCos = 0.866;

inline SpringSet build_springs(const TriMesh& garment, const SimParams& params) {
  if (garment.face_count() == 0) throw SimError("build_springs: empty mesh");
  validate_sim_params(params);

  SpringSet set;
  auto rest = [&](int i, int j) { return distance(garment.vertices[i], garment.vertices[j]); };

  // structural: unique edges; remember the two faces adjacent to each edge
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < garment.face_count(); ++f) {
    const auto& t = garment.faces[f];
    for (int c = 0; c < 3; ++c) {
      int a = t[c], b = t[(c + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_faces[{a, b}].push_back(f);
    }
  }
  for (const auto& [edge, faces] : edge_faces)
    set.structural.push_back({edge.first, edge.second, rest(edge.first, edge.second)});

  // cross pairs: for each edge shared by exactly two faces, connect the two
  // opposite vertices; shear when the rest dihedral is near planar, bending always
  std::set<std::pair<int, int>> shear_seen, bend_seen;
  for (const auto& [edge, faces] : edge_faces) {
    if (faces.size() != 2) continue;
    int opp[2];
    for (int k = 0; k < 2; ++k) {
      const auto& t = garment.faces[faces[k]];
      opp[k] = t[0] + t[1] + t[2] - edge.first - edge.second;
    }
    int a = std::min(opp[0], opp[1]), b = std::max(opp[0], opp[1]);
    if (a == b) continue;
    Vec3 n0 = normalized(face_normal_unnormalized(garment, faces[0]));
    Vec3 n1 = normalized(face_normal_unnormalized(garment, faces[1]));
    if (std::abs(dot(n0, n1)) > kShearPlanarCos && shear_seen.insert({a, b}).second)
      set.shear.push_back({a, b, rest(a, b)});
    if (bend_seen.insert({a, b}).second) set.bending.push_back({a, b, rest(a, b)});
  }

  // lumped vertex masses from rest areas
  set.vertex_mass.assign(garment.vertices.size(), 0.0);
  for (int f = 0; f < garment.face_count(); ++f) {
    double share = params.garment.areal_density * face_area(garment, f) / 3.0;
    for (int c = 0; c < 3; ++c) set.vertex_mass[garment.faces[f][c]] += share;
  }
  for (double& m : set.vertex_mass)
    if (m <= 0.0) m = 1e-6;  // isolated vertices get a token mass

  set.vertex_degree.assign(garment.vertices.size(), 0);
  for (const auto* cls : {&set.structural, &set.shear, &set.bending})
    for (const Spring& sp : *cls) {
      set.vertex_degree[sp.i] += 1;
      set.vertex_degree[sp.j] += 1;
    }
  return set;
}

namespace detail {

inline void accumulate_spring_class(const ClothState& state, const SpringSet& set,
                                    const std::vector<Spring>& springs, double k_stretch,
                                    double k_compress, double damping, double dt,
                                    std::vector<Vec3>& forces) {
  for (const Spring& s : springs) {
    Vec3 d = state.positions[s.j] - state.positions[s.i];
    double len = length(d);
    if (len < 1e-12) continue;
    Vec3 dir = d / len;
    double k = len < s.rest ? k_compress : k_stretch;
    double magnitude = k * (len - s.rest);
    // explicit axial damping destabilizes once the summed c*dt over a vertex's
    // springs exceeds its mass; clamp per spring against mass and degree
    double mi = set.vertex_mass[s.i], mj = set.vertex_mass[s.j];
    double reduced = mi * mj / (mi + mj);
    int deg = 1;
    if (!set.vertex_degree.empty())
      deg = std::max(set.vertex_degree[s.i], set.vertex_degree[s.j]);
    double c = std::min(damping, 0.5 * reduced / (dt * deg));
    double rel = dot(state.velocities[s.j] - state.velocities[s.i], dir);
    Vec3 f = dir * (magnitude + c * rel);
    forces[s.i] += f;
    forces[s.j] -= f;
  }
}

}  // namespace detail

// Internal (spring + damping) forces only; their sum is zero by construction.
inline void accumulate_internal_forces(const ClothState& state, const SpringSet& springs,
                                       const SimParams& params, std::vector<Vec3>& forces) {
  const GarmentParams& g = params.garment;
  const double dt = params.solver.dt;
  detail::accumulate_spring_class(state, springs, springs.structural, g.structural_stiffness,
                                  g.compression_stiffness, g.damping, dt, forces);
  detail::accumulate_spring_class(state, springs, springs.shear, g.shear_stiffness,
                                  g.compression_stiffness, g.damping, dt, forces);
  detail::accumulate_spring_class(state, springs, springs.bending, g.bending_stiffness,
                                  g.bending_stiffness, g.damping, dt, forces);
}

// Projects a vertex out of a capsule and applies the contact velocity
// response (inward normal velocity removed, tangential scaled by friction).
inline void resolve_capsule_contact(Vec3& position, Vec3& velocity, const Capsule& capsule,
                                    double thickness, double friction) {
  Vec3 q = closest_point_on_segment(position, capsule.a, capsule.b);
  Vec3 d = position - q;
  double dist = length(d);
  double target = capsule.radius + thickness;
  if (dist >= target) return;
  Vec3 n = dist > 1e-12 ? d / dist : Vec3{0, 1, 0};
  position = q + n * target;
  double vn = dot(velocity, n);
  if (vn < 0.0) velocity -= n * vn;
  Vec3 tangential = velocity - n * dot(velocity, n);
  velocity -= tangential * friction;
}

// One step() = `substeps` semi-implicit Euler substeps of params.solver.dt.
// Force order is fixed so runs are bit-identical.
inline ClothState step(const ClothState& state, const SpringSet& springs, const SimParams& params,
                       const std::vector<Capsule>& colliders) {
  validate_sim_params(params);
  ClothState s = state;
  const int n = s.vertex_count();
  std::vector<Vec3> forces(n);

  for (int sub = 0; sub < params.solver.substeps; ++sub) {
    for (int v = 0; v < n; ++v) {
      double m = springs.vertex_mass[v];
      forces[v] = params.world.gravity * m - s.velocities[v] * (params.world.air_drag * m);
    }
    accumulate_internal_forces(s, springs, params, forces);

    const double h = params.solver.dt;
    for (int v = 0; v < n; ++v) {
      if (s.pinned[v]) continue;
      s.velocities[v] += forces[v] * (h / springs.vertex_mass[v]);
      s.positions[v] += s.velocities[v] * h;
      for (const Capsule& c : colliders)
        resolve_capsule_contact(s.positions[v], s.velocities[v], c,
                                params.solver.collision_thickness, params.solver.friction);
    }
  }
  validate_cloth_state(s);
  return s;
}

inline constexpr int kSettleSteps = 30;

// Simulates one garment over a motion: settles on the frame-0 pose, then
// advances the physics once per motion frame with colliders interpolated
// across the intra-frame substeps. Returns one cloth mesh per motion frame.
inline std::vector<TriMesh> simulate_sequence(const TriMesh& garment, const BodyModel& body,
                                              const MotionSequence& motion,
                                              const SimParams& params) {
  validate_motion(motion);
  SpringSet springs = build_springs(garment, params);
  ClothState state = make_cloth_state(garment);

  auto capsules_at = [&](int frame) {
    return body_collision_capsules(body, motion_frame_pose(motion, body.skeleton, frame));
  };

  std::vector<Capsule> caps_prev = capsules_at(0);
  for (int i = 0; i < kSettleSteps; ++i) state = step(state, springs, params, caps_prev);

  const double frame_time = 1.0 / motion.frame_rate;
  const double step_time = params.solver.dt * params.solver.substeps;
  const int steps_per_frame = std::max(1, static_cast<int>(std::llround(frame_time / step_time)));

  std::vector<TriMesh> out;
  out.reserve(motion.frame_count());
  for (int k = 0; k < motion.frame_count(); ++k) {
    std::vector<Capsule> caps_cur = capsules_at(k);
    for (int i = 0; i < steps_per_frame; ++i) {
      double t = static_cast<double>(i + 1) / steps_per_frame;
      std::vector<Capsule> caps(caps_cur.size());
      for (size_t c = 0; c < caps.size(); ++c)
        caps[c] = {caps_prev[c].a + (caps_cur[c].a - caps_prev[c].a) * t,
                   caps_prev[c].b + (caps_cur[c].b - caps_prev[c].b) * t, caps_cur[c].radius};
      state = step(state, springs, params, caps);
    }
    caps_prev = std::move(caps_cur);

    TriMesh frame = garment;
    frame.vertices = state.positions;
    frame = compute_vertex_normals(frame);
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace uvc
