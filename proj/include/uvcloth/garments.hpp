#pragma once

// Procedural garment templates fitted to the procedural body's T-pose:
// tops (torso tube + sleeves), bottoms (branched pair of pants), dress
// (flared tube). Garments carry no UV layout; correspondences come from rays.

#include <vector>

#include "uvcloth/body.hpp"
#include "uvcloth/mesh.hpp"
#include "uvcloth/transfer.hpp"

namespace uvc {
namespace detail {

// Closed tube (no seam duplication, no caps). Rings ordered along +axis so the
// winding faces outward. Returns the per-ring base vertex indices.
inline std::vector<int> append_tube(TriMesh& mesh, const std::vector<Vec3>& centers,
                                    const std::vector<double>& radii, const Vec3& e1,
                                    const Vec3& e2, int slices) {
  std::vector<int> ring_base;
  for (size_t r = 0; r < centers.size(); ++r) {
    ring_base.push_back(mesh.vertex_count());
    for (int j = 0; j < slices; ++j) {
      double theta = 2.0 * M_PI * (j + 0.5) / slices;
      mesh.vertices.push_back(centers[r] + e1 * (radii[r] * std::cos(theta)) +
                              e2 * (radii[r] * std::sin(theta)));
    }
  }
  for (size_t r = 0; r + 1 < centers.size(); ++r)
    for (int j = 0; j < slices; ++j) {
      int a = ring_base[r] + j, b = ring_base[r] + (j + 1) % slices;
      int c = ring_base[r + 1] + j, d = ring_base[r + 1] + (j + 1) % slices;
      mesh.faces.push_back({a, c, d});
      mesh.faces.push_back({a, d, b});
    }
  return ring_base;
}

// Zips two closed loops (same winding, aligned starts) into an annulus of
// triangles, walking by normalized arc length. `upper` is the ring the strip
// hangs from; windings follow the tube convention (upper = ring r+1).
inline void zip_loops(TriMesh& mesh, const std::vector<int>& upper, const std::vector<int>& lower) {
  auto fractions = [&](const std::vector<int>& loop) {
    std::vector<double> f(loop.size() + 1, 0.0);
    double total = 0.0;
    for (size_t i = 0; i < loop.size(); ++i)
      total += distance(mesh.vertices[loop[i]], mesh.vertices[loop[(i + 1) % loop.size()]]);
    double acc = 0.0;
    for (size_t i = 0; i < loop.size(); ++i) {
      f[i] = acc / total;
      acc += distance(mesh.vertices[loop[i]], mesh.vertices[loop[(i + 1) % loop.size()]]);
    }
    f[loop.size()] = 1.0;
    return f;
  };
  std::vector<double> fu = fractions(upper), fl = fractions(lower);
  size_t u = 0, l = 0;
  while (u < upper.size() || l < lower.size()) {
    bool advance_lower;
    if (u == upper.size())
      advance_lower = true;
    else if (l == lower.size())
      advance_lower = false;
    else
      advance_lower = fl[l + 1] <= fu[u + 1];
    if (advance_lower) {
      mesh.faces.push_back({lower[(l + 1) % lower.size()], lower[l], upper[u % upper.size()]});
      ++l;
    } else {
      mesh.faces.push_back({lower[l % lower.size()], upper[u], upper[(u + 1) % upper.size()]});
      ++u;
    }
  }
}

// Ladder between two open polylines; shared endpoint vertices produce
// degenerate candidates which are skipped.
inline void zip_strip(TriMesh& mesh, const std::vector<int>& a, const std::vector<int>& b) {
  auto emit = [&mesh](int p, int q, int r) {
    if (p != q && q != r && p != r) mesh.faces.push_back({p, q, r});
  };
  size_t i = 0, j = 0;
  while (i + 1 < a.size() || j + 1 < b.size()) {
    bool advance_a;
    if (i + 1 == a.size())
      advance_a = false;
    else if (j + 1 == b.size())
      advance_a = true;
    else
      advance_a = (i + 1) * (b.size() - 1) <= (j + 1) * (a.size() - 1);
    if (advance_a) {
      emit(a[i], a[i + 1], b[j]);
      ++i;
    } else {
      emit(b[j + 1], b[j], a[i]);
      ++j;
    }
  }
}

inline std::vector<Vec3> lerp_centers(const Vec3& from, const Vec3& to, int rings) {
  std::vector<Vec3> c(rings);
  for (int i = 0; i < rings; ++i)
    c[i] = from + (to - from) * (static_cast<double>(i) / (rings - 1));
  return c;
}

inline std::vector<double> lerp_radii(double from, double to, int rings) {
  std::vector<double> r(rings);
  for (int i = 0; i < rings; ++i) r[i] = from + (to - from) * (static_cast<double>(i) / (rings - 1));
  return r;
}

}  // namespace detail

// Sleeveless-shoulder shirt: a torso tube hanging on the arms plus two sleeve
// tubes resting on the arm capsules. Components are separate; collisions keep
// them worn.
inline TriMesh make_tops_garment(const BodyModel& body) {
  const Skeleton& s = body.skeleton;
  const Bone& torso = s.bones[s.find("torso")];
  const Bone& arm_l = s.bones[s.find("upper_arm_l")];
  const Bone& larm_l = s.bones[s.find("lower_arm_l")];
  const double shoulder_y = arm_l.rest_head.y;

  TriMesh m;
  // torso tube, flared hem to collar
  {
    double hem_y = torso.rest_head.y - 0.16;
    double top_y = shoulder_y + 0.045;
    int rings = 12;
    auto centers = detail::lerp_centers({0, hem_y, 0}, {0, top_y, 0}, rings);
    std::vector<double> radii(rings);
    for (int i = 0; i < rings; ++i) {
      double t = static_cast<double>(i) / (rings - 1);
      radii[i] = t < 0.75 ? 0.20 - 0.015 * (t / 0.75) : 0.185 - 0.055 * ((t - 0.75) / 0.25);
    }
    detail::append_tube(m, centers, radii, {1, 0, 0}, {0, 0, 1}, 20);
  }
  // sleeves along +-X
  for (double side : {1.0, -1.0}) {
    double x0 = arm_l.rest_head.x - 0.035,
           x1 = larm_l.rest_head.x + 0.45 * (larm_l.rest_tail.x - larm_l.rest_head.x);
    int rings = 8;
    auto centers = detail::lerp_centers({side * x0, shoulder_y, 0}, {side * x1, shoulder_y, 0}, rings);
    auto radii = detail::lerp_radii(0.085, 0.068, rings);
    Vec3 e1{0, 1, 0}, e2{0, 0, -side};  // left-handed with the +-X ring axis
    detail::append_tube(m, centers, radii, e1, e2, 12);
  }
  return compute_vertex_normals(m);
}

// Branched pair of pants: waist tube splitting into two leg tubes through two
// crotch saddle vertices; single connected component.
inline TriMesh make_bottoms_garment(const BodyModel& body) {
  const Skeleton& s = body.skeleton;
  const Bone& pelvis = s.bones[s.find("pelvis")];
  const Bone& uleg_l = s.bones[s.find("upper_leg_l")];
  const Bone& lleg_l = s.bones[s.find("lower_leg_l")];
  const double leg_x = uleg_l.rest_head.x;
  const double waist_y = pelvis.rest_tail.y - 0.02;
  const double split_y = uleg_l.rest_head.y - 0.05;
  const double cuff_y = lleg_l.rest_head.y - 0.55 * (lleg_l.rest_head.y - lleg_l.rest_tail.y);

  TriMesh m;
  const int waist_slices = 16, leg_slices = 10;

  // waist tube built upward so the winding faces out; ring 0 is the bottom
  auto waist_rings = detail::append_tube(
      m, detail::lerp_centers({0, split_y + 0.02, 0}, {0, waist_y, 0}, 4),
      detail::lerp_radii(0.175, 0.165, 4), {1, 0, 0}, {0, 0, 1}, waist_slices);

  // leg tubes built upward from cuff to split; the top radius stays below the
  // leg spacing so the two tubes meet at the midline without crossing it
  const double top_r = leg_x - 0.002;
  auto leg_l = detail::append_tube(
      m, detail::lerp_centers({leg_x, cuff_y, 0}, {leg_x, split_y, 0}, 9),
      detail::lerp_radii(0.085, top_r, 9), {1, 0, 0}, {0, 0, 1}, leg_slices);
  auto leg_r = detail::append_tube(
      m, detail::lerp_centers({-leg_x, cuff_y, 0}, {-leg_x, split_y, 0}, 9),
      detail::lerp_radii(0.085, top_r, 9), {1, 0, 0}, {0, 0, 1}, leg_slices);

  // crotch saddles (front/back at the split height)
  int front = m.vertex_count();
  m.vertices.push_back({0, split_y, top_r + 0.008});
  int back = m.vertex_count();
  m.vertices.push_back({0, split_y, -(top_r + 0.008)});

  // Ring angle convention: theta_j = 2*pi*(j+0.5)/slices with x = r*cos(theta)
  // and z = r*sin(theta). For 10 leg slices: j=2 is the ring front (max z),
  // j=7 the back; j in {8,9,0,1} is the +x side, j in {3,4,5,6} the -x side.
  auto top_ring = [&](const std::vector<int>& bases, int slices) {
    std::vector<int> ring(slices);
    for (int j = 0; j < slices; ++j) ring[j] = bases.back() + j;
    return ring;
  };
  std::vector<int> L = top_ring(leg_l, leg_slices), R = top_ring(leg_r, leg_slices);
  std::vector<int> W(waist_slices);
  for (int j = 0; j < waist_slices; ++j) W[j] = waist_rings.front() + j;

  // Annulus between the waist bottom ring and the two leg tops. Both walks
  // wind theta-increasing (the tube convention, outward faces): the lower
  // loop runs F -> right ring outer side (front to back through -x) -> C ->
  // left ring outer side (back to front through +x), pinched at the saddles.
  std::vector<int> loop{front};
  for (int j : {2, 3, 4, 5, 6, 7}) loop.push_back(R[j]);
  loop.push_back(back);
  for (int j : {7, 8, 9, 0, 1, 2}) loop.push_back(L[j]);

  // waist loop aligned to start near the front, same winding
  std::vector<int> wloop;
  for (int j = 0; j < waist_slices; ++j) wloop.push_back(W[(4 + j) % waist_slices]);

  detail::zip_loops(m, wloop, loop);

  // Crotch gusset between the inner arcs, front saddle to back saddle. The
  // ring front/back verts are shared with the annulus loop so every top-ring
  // edge ends up in exactly one stitched face.
  std::vector<int> inner_l{front}, inner_r{front};
  for (int j : {2, 3, 4, 5, 6, 7}) inner_l.push_back(L[j]);  // left inner: front -> -x -> back
  inner_l.push_back(back);
  for (int j : {2, 1, 0, 9, 8, 7}) inner_r.push_back(R[j]);  // right inner: front -> +x -> back
  inner_r.push_back(back);
  detail::zip_strip(m, inner_r, inner_l);

  return compute_vertex_normals(m);
}

// Knee-length flared dress hanging from the shoulders.
inline TriMesh make_dress_garment(const BodyModel& body) {
  const Skeleton& s = body.skeleton;
  const Bone& arm_l = s.bones[s.find("upper_arm_l")];
  const Bone& uleg_l = s.bones[s.find("upper_leg_l")];
  const double top_y = arm_l.rest_head.y + 0.045;
  const double hem_y = uleg_l.rest_tail.y + 0.02;  // just above the knee

  TriMesh m;
  int rings = 16;
  auto centers = detail::lerp_centers({0, top_y, 0}, {0, hem_y, 0}, rings);
  std::vector<double> radii(rings);
  for (int i = 0; i < rings; ++i) {
    double t = static_cast<double>(i) / (rings - 1);
    radii[i] = t < 0.2 ? 0.13 + 0.06 * (t / 0.2) : 0.19 + 0.10 * ((t - 0.2) / 0.8);
  }
  std::reverse(centers.begin(), centers.end());  // build upward for outward winding
  std::reverse(radii.begin(), radii.end());
  detail::append_tube(m, centers, radii, {1, 0, 0}, {0, 0, 1}, 22);
  return compute_vertex_normals(m);
}

inline TriMesh make_template_garment(const BodyModel& body, GarmentTemplate t) {
  switch (t) {
    case GarmentTemplate::tops: return make_tops_garment(body);
    case GarmentTemplate::bottoms: return make_bottoms_garment(body);
    case GarmentTemplate::dress: return make_dress_garment(body);
  }
  throw TransferError("unknown garment template");
}

}  // namespace uvc
