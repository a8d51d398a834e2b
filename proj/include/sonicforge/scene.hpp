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
#ifndef SONICFORGE_SCENE_HPP
#define SONICFORGE_SCENE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sonicforge/bvh.hpp"
#include "sonicforge/dsp.hpp"
#include "sonicforge/vec3.hpp"

namespace sonicforge {

/// Per-octave-band acoustic coefficients of a surface material.
/// Each entry is unitless in [0, 1]; absorption + transmission <= 1.
struct BandCoefficients {
  std::array<double, kNumBands> absorption{};
  std::array<double, kNumBands> scattering{};
  std::array<double, kNumBands> transmission{};

  void validate(const std::string& name) const;
};

struct Material {
  std::string name;
  BandCoefficients coeffs;
};

/// One triangle bound to a material.
struct Surface {
  std::array<int, 3> vertices{};
  int material_id = 0;
};

/// Immutable acoustic world: triangle mesh, material table and a BVH.
/// All queries are read-only and safe to call from many threads.
class Scene {
 public:
  Scene(std::vector<Vec3> vertices, std::vector<Surface> surfaces,
        std::vector<Material> materials, double walkable_height);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Surface>& surfaces() const { return surfaces_; }
  const std::vector<Material>& materials() const { return materials_; }
  double walkable_height() const { return walkable_height_; }

  const Vec3& bounds_min() const { return bmin_; }
  const Vec3& bounds_max() const { return bmax_; }
  bool inside_bounds(const Vec3& p) const;

  /// Unique per-construction identity, for external caches.
  std::uint64_t id() const { return id_; }

  std::optional<Hit> ray_intersect(const Vec3& origin, const Vec3& direction,
                                   double t_max) const;

  /// Product of transmission coefficients of every surface crossed by the
  /// open segment a->b, per band. All ones when unobstructed.
  std::array<double, kNumBands> occlusion_factor(const Vec3& a, const Vec3& b) const;

  const BandCoefficients& surface_coeffs(int surface_id) const {
    return materials_[static_cast<std::size_t>(
                          surfaces_[static_cast<std::size_t>(surface_id)].material_id)]
        .coeffs;
  }

 private:
  std::vector<Vec3> vertices_;
  std::vector<Surface> surfaces_;
  std::vector<Material> materials_;
  double walkable_height_;
  Vec3 bmin_, bmax_;
  Bvh bvh_;
  std::uint64_t id_;
};

/// Loads an OBJ mesh (v/f records, faces fan-triangulated, usemtl/g for
/// material binding) plus a materials JSON table. The table must contain
/// a "default" entry; faces without a binding use it.
Scene load_scene(const std::string& mesh_path, const std::string& materials_path,
                 double walkable_height = 1.5);

/// Parses materials JSON text (exposed for callers that embed the table).
std::vector<Material> parse_materials_json(const std::string& json_text);

inline std::optional<Hit> ray_intersect(const Scene& scene, const Vec3& origin,
                                        const Vec3& direction, double t_max) {
  return scene.ray_intersect(origin, direction, t_max);
}

inline std::array<double, kNumBands> occlusion_factor(const Scene& scene, const Vec3& a,
                                                      const Vec3& b) {
  return scene.occlusion_factor(a, b);
}

}  // namespace sonicforge

#endif  // SONICFORGE_SCENE_HPP
