/**
 * Copyright 2026 The SonicForge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "sonicforge/bvh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sonicforge {

namespace {

// Barycentric slack: edge-adjacent triangles both accept hits on the
// shared edge, so closed meshes never leak rays through seams.
constexpr double kBaryEps = 1e-9;
constexpr double kDetEps = 1e-14;
constexpr int kLeafSize = 4;

Vec3 min3(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
Vec3 max3(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

}  // namespace

void Bvh::build(std::vector<std::array<Vec3, 3>> triangles) {
  triangles_ = std::move(triangles);
  nodes_.clear();
  order_.resize(triangles_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (triangles_.empty()) return;
  nodes_.reserve(2 * triangles_.size());
  build_node(order_, 0, static_cast<int>(order_.size()));
}

int Bvh::build_node(std::vector<int>& tris, int begin, int end) {
  const int node_index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();

  Vec3 bmin{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
  Vec3 bmax = -1.0 * bmin;
  Vec3 cmin = bmin, cmax = bmax;
  for (int i = begin; i < end; ++i) {
    const auto& t = triangles_[static_cast<std::size_t>(tris[static_cast<std::size_t>(i)])];
    Vec3 centroid = (t[0] + t[1] + t[2]) / 3.0;
    for (const auto& v : t) {
      bmin = min3(bmin, v);
      bmax = max3(bmax, v);
    }
    cmin = min3(cmin, centroid);
    cmax = max3(cmax, centroid);
  }
  nodes_[static_cast<std::size_t>(node_index)].bmin = bmin;
  nodes_[static_cast<std::size_t>(node_index)].bmax = bmax;

  const int count = end - begin;
  if (count <= kLeafSize) {
    nodes_[static_cast<std::size_t>(node_index)].first = begin;
    nodes_[static_cast<std::size_t>(node_index)].count = count;
    return node_index;
  }

  const Vec3 extent = cmax - cmin;
  int axis = 0;
  if (extent.y > extent.x) axis = 1;
  if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;

  const int mid = begin + count / 2;
  std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                   [&](int a, int b) {
                     const auto& ta = triangles_[static_cast<std::size_t>(a)];
                     const auto& tb = triangles_[static_cast<std::size_t>(b)];
                     const Vec3 ca = (ta[0] + ta[1] + ta[2]) / 3.0;
                     const Vec3 cb = (tb[0] + tb[1] + tb[2]) / 3.0;
                     const double va = axis == 0 ? ca.x : axis == 1 ? ca.y : ca.z;
                     const double vb = axis == 0 ? cb.x : axis == 1 ? cb.y : cb.z;
                     return va < vb;
                   });

  const int left = build_node(tris, begin, mid);
  const int right = build_node(tris, mid, end);
  nodes_[static_cast<std::size_t>(node_index)].left = left;
  nodes_[static_cast<std::size_t>(node_index)].right = right;
  return node_index;
}

bool Bvh::hit_triangle(const std::array<Vec3, 3>& tri, const Vec3& origin, const Vec3& dir,
                       double t_min, double t_max, double& t_out, Vec3& normal_out) {
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kDetEps) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - tri[0];
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kBaryEps || u > 1.0 + kBaryEps) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < -kBaryEps || u + v > 1.0 + kBaryEps) return false;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= t_min || t >= t_max) return false;
  Vec3 n = e1.cross(e2).normalized();
  if (n.dot(dir) > 0.0) n = -n;
  t_out = t;
  normal_out = n;
  return true;
}

bool Bvh::slab_test(const Node& node, const Vec3& origin, const Vec3& inv_dir,
                    double t_max) const {
  double t0 = 0.0, t1 = t_max;
  const double tx1 = (node.bmin.x - origin.x) * inv_dir.x;
  const double tx2 = (node.bmax.x - origin.x) * inv_dir.x;
  t0 = std::max(t0, std::min(tx1, tx2));
  t1 = std::min(t1, std::max(tx1, tx2));
  const double ty1 = (node.bmin.y - origin.y) * inv_dir.y;
  const double ty2 = (node.bmax.y - origin.y) * inv_dir.y;
  t0 = std::max(t0, std::min(ty1, ty2));
  t1 = std::min(t1, std::max(ty1, ty2));
  const double tz1 = (node.bmin.z - origin.z) * inv_dir.z;
  const double tz2 = (node.bmax.z - origin.z) * inv_dir.z;
  t0 = std::max(t0, std::min(tz1, tz2));
  t1 = std::min(t1, std::max(tz1, tz2));
  return t0 <= t1;
}

std::optional<Hit> Bvh::intersect(const Vec3& origin, const Vec3& dir, double t_min,
                                  double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_dir{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};

  std::optional<Hit> best;
  double best_t = t_max;
  int stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--sp])];
    if (!slab_test(node, origin, inv_dir, best_t)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int tri_id = order_[static_cast<std::size_t>(i)];
        double t;
        Vec3 n;
        if (hit_triangle(triangles_[static_cast<std::size_t>(tri_id)], origin, dir, t_min, best_t,
                         t, n)) {
          best_t = t;
          best = Hit{t, tri_id, n};
        }
      }
    } else {
      stack[sp++] = node.left;
      stack[sp++] = node.right;
    }
  }
  return best;
}

void Bvh::intersect_all(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                        std::vector<Hit>& out) const {
  if (nodes_.empty()) return;
  const Vec3 inv_dir{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
  int stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--sp])];
    if (!slab_test(node, origin, inv_dir, t_max)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int tri_id = order_[static_cast<std::size_t>(i)];
        double t;
        Vec3 n;
        if (hit_triangle(triangles_[static_cast<std::size_t>(tri_id)], origin, dir, t_min, t_max,
                         t, n)) {
          out.push_back(Hit{t, tri_id, n});
        }
      }
    } else {
      stack[sp++] = node.left;
      stack[sp++] = node.right;
    }
  }
}

}  // namespace sonicforge
