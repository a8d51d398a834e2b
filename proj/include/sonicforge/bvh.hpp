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
#ifndef SONICFORGE_BVH_HPP
#define SONICFORGE_BVH_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "sonicforge/vec3.hpp"

namespace sonicforge {

/// Nearest-hit result of a ray query. The normal is the geometric triangle
/// normal flipped to face against the ray (surfaces intersect two-sided).
struct Hit {
  double distance = 0.0;
  int surface_id = -1;
  Vec3 normal;
};

/// Axis-aligned bounding-volume hierarchy over triangles: median split on
/// the longest centroid axis, at most 4 triangles per leaf. Immutable
/// after build; queries are const and thread-safe.
class Bvh {
 public:
  Bvh() = default;

  /// triangles[i] = {a, b, c} vertex positions.
  void build(std::vector<std::array<Vec3, 3>> triangles);

  std::size_t num_triangles() const { return triangles_.size(); }

  /// Nearest two-sided triangle hit with distance in (t_min, t_max).
  std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir, double t_min,
                               double t_max) const;

  /// Every hit along the ray with distance in (t_min, t_max), unsorted.
  void intersect_all(const Vec3& origin, const Vec3& dir, double t_min, double t_max,
                     std::vector<Hit>& out) const;

 private:
  struct Node {
    Vec3 bmin, bmax;
    int left = -1;        // internal: child indices
    int right = -1;
    int first = 0;        // leaf: range into order_
    int count = 0;        // 0 for internal nodes
  };

  int build_node(std::vector<int>& tris, int begin, int end);
  static bool hit_triangle(const std::array<Vec3, 3>& tri, const Vec3& origin, const Vec3& dir,
                           double t_min, double t_max, double& t_out, Vec3& normal_out);
  bool slab_test(const Node& node, const Vec3& origin, const Vec3& inv_dir, double t_max) const;

  std::vector<std::array<Vec3, 3>> triangles_;
  std::vector<int> order_;   // triangle indices, permuted so leaves are contiguous
  std::vector<Node> nodes_;  // nodes_[0] is the root when non-empty
};

}  // namespace sonicforge

#endif  // SONICFORGE_BVH_HPP
