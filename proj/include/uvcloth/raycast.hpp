#pragma once

// Ray/mesh intersection: Moller-Trumbore triangle test, a median-split BVH,
// and the brute-force reference used to cross-check it.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uvcloth/mesh.hpp"

namespace uvc {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length (within 1e-9)
};

struct Hit {
  int face_index = -1;
  double distance = 0.0;   // meters along the ray
  Vec3 barycentric;        // (b0,b1,b2) wrt the face's vertex order, sums to 1
};

// Default near clip when casting from a surface point; avoids self-hits.
inline constexpr double kRayTMin = 1e-6;
inline constexpr double kRayEpsilon = 1e-9;

// Nearest-hit comparison; ties on distance go to the lower face index so the
// BVH and the brute-force path always agree.
inline bool hit_improves(const std::optional<Hit>& best, double t, int face) {
  if (!best) return true;
  return t < best->distance || (t == best->distance && face < best->face_index);
}

inline std::optional<Hit> intersect_triangle(const TriMesh& mesh, int face, const Ray& ray,
                                             double t_min, double t_max) {
  const auto& tri = mesh.faces[face];
  const Vec3& v0 = mesh.vertices[tri[0]];
  const Vec3 e1 = mesh.vertices[tri[1]] - v0;
  const Vec3 e2 = mesh.vertices[tri[2]] - v0;
  const Vec3 pvec = cross(ray.direction, e2);
  const double det = dot(e1, pvec);
  if (std::abs(det) < kRayEpsilon) return std::nullopt;  // parallel or degenerate
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - v0;
  const double u = dot(tvec, pvec) * inv_det;
  if (u < -kRayEpsilon || u > 1.0 + kRayEpsilon) return std::nullopt;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(ray.direction, qvec) * inv_det;
  if (v < -kRayEpsilon || u + v > 1.0 + kRayEpsilon) return std::nullopt;
  const double t = dot(e2, qvec) * inv_det;
  if (t <= t_min || t > t_max) return std::nullopt;
  return Hit{face, t, Vec3{1.0 - u - v, u, v}};
}

inline std::optional<Hit> brute_force_intersect(const TriMesh& mesh, const Ray& ray,
                                                double t_min = kRayTMin, double t_max = 0.5) {
  std::optional<Hit> best;
  for (int f = 0; f < mesh.face_count(); ++f) {
    auto h = intersect_triangle(mesh, f, ray, t_min, t_max);
    if (h && hit_improves(best, h->distance, f)) best = h;
  }
  return best;
}

struct BvhNode {
  Aabb box;
  int left = -1, right = -1;  // internal children, or -1
  int first = 0, count = 0;   // leaf triangle range into triangle_order
  bool is_leaf() const { return count > 0; }
};

struct Bvh {
  std::vector<BvhNode> nodes;       // node 0 is the root
  std::vector<int> triangle_order;  // permutation of face indices
};

inline constexpr int kBvhMaxLeafSize = 4;
inline constexpr int kBvhMaxDepth = 64;

inline Bvh build_bvh(const TriMesh& mesh) {
  if (mesh.face_count() == 0) throw MeshError("build_bvh: empty mesh");

  const int n = mesh.face_count();
  std::vector<Vec3> centroids(n);
  std::vector<Aabb> boxes(n);
  for (int f = 0; f < n; ++f) {
    Aabb b;
    for (int c = 0; c < 3; ++c) b.grow(mesh.vertices[mesh.faces[f][c]]);
    boxes[f] = b;
    centroids[f] = b.center();
  }

  Bvh bvh;
  bvh.triangle_order.resize(n);
  for (int i = 0; i < n; ++i) bvh.triangle_order[i] = i;
  bvh.nodes.reserve(2 * n);

  struct Task { int node, first, count, depth; };
  bvh.nodes.push_back({});
  std::vector<Task> stack{{0, 0, n, 0}};
  while (!stack.empty()) {
    Task task = stack.back();
    stack.pop_back();

    Aabb box;
    for (int i = task.first; i < task.first + task.count; ++i)
      box.grow(boxes[bvh.triangle_order[i]]);
    bvh.nodes[task.node].box = box;

    bool make_leaf = task.count <= kBvhMaxLeafSize || task.depth >= kBvhMaxDepth;
    if (!make_leaf) {
      Vec3 ext;
      {
        Aabb cbox;
        for (int i = task.first; i < task.first + task.count; ++i)
          cbox.grow(centroids[bvh.triangle_order[i]]);
        ext = cbox.extent();
      }
      int axis = 0;
      if (ext.y > ext[axis]) axis = 1;
      if (ext.z > ext[axis]) axis = 2;
      // all centroids identical -> no usable split, force a leaf
      if (ext[axis] <= 0.0) make_leaf = true;
      if (!make_leaf) {
        int mid = task.first + task.count / 2;
        auto begin = bvh.triangle_order.begin();
        std::nth_element(begin + task.first, begin + mid, begin + task.first + task.count,
                         [&](int a, int b) {
                           double ca = centroids[a][axis], cb = centroids[b][axis];
                           return ca < cb || (ca == cb && a < b);
                         });
        int li = static_cast<int>(bvh.nodes.size());
        bvh.nodes.push_back({});
        int ri = static_cast<int>(bvh.nodes.size());
        bvh.nodes.push_back({});
        bvh.nodes[task.node].left = li;
        bvh.nodes[task.node].right = ri;
        stack.push_back({ri, mid, task.first + task.count - mid, task.depth + 1});
        stack.push_back({li, task.first, mid - task.first, task.depth + 1});
        continue;
      }
    }
    bvh.nodes[task.node].first = task.first;
    bvh.nodes[task.node].count = task.count;
  }
  return bvh;
}

namespace detail {

inline bool ray_box(const Aabb& box, const Ray& ray, const Vec3& inv_dir, double t_min,
                    double t_max) {
  double t0 = t_min, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    double near = (box.lo[a] - ray.origin[a]) * inv_dir[a];
    double far = (box.hi[a] - ray.origin[a]) * inv_dir[a];
    if (near > far) std::swap(near, far);
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace detail

// Nearest hit with distance in (t_min, t_max]; equidistant hits resolve to the
// lowest face index. Pure; safe to call concurrently on a shared Bvh.
inline std::optional<Hit> intersect(const Bvh& bvh, const TriMesh& mesh, const Ray& ray,
                                    double t_min = kRayTMin, double t_max = 0.5) {
  if (bvh.nodes.empty()) return std::nullopt;
  Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};

  std::optional<Hit> best;
  int stack[kBvhMaxDepth + 2];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = bvh.nodes[stack[--top]];
    double far_clip = best ? best->distance : t_max;
    if (!detail::ray_box(node.box, ray, inv_dir, t_min, far_clip)) continue;
    if (node.is_leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        int face = bvh.triangle_order[i];
        auto h = intersect_triangle(mesh, face, ray, t_min, t_max);
        if (h && hit_improves(best, h->distance, face)) best = h;
      }
    } else {
      stack[top++] = node.right;
      stack[top++] = node.left;
    }
  }
  return best;
}

}  // namespace uvc
