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
#include "sonicforge/scene.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sonicforge/errors.hpp"

namespace sonicforge {

namespace {

std::atomic<std::uint64_t> g_scene_counter{1};

// Duplicate hits closer than this along a segment are one physical
// crossing (shared triangle edges report twice).
constexpr double kDuplicateHitEps = 1e-9;
constexpr double kSurfaceEps = 1e-6;

std::array<double, kNumBands> parse_band_array(const nlohmann::json& j, const std::string& mat,
                                               const char* key, double fallback) {
  std::array<double, kNumBands> out;
  out.fill(fallback);
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != kNumBands)
    throw FormatError("materials: \"" + mat + "." + key + "\" must be an array of " +
                      std::to_string(kNumBands) + " numbers");
  for (int b = 0; b < kNumBands; ++b) out[static_cast<std::size_t>(b)] = arr[b].get<double>();
  return out;
}

}  // namespace

void BandCoefficients::validate(const std::string& name) const {
  for (int b = 0; b < kNumBands; ++b) {
    const auto i = static_cast<std::size_t>(b);
    for (double v : {absorption[i], scattering[i], transmission[i]}) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("material \"" + name + "\": coefficient out of [0,1] in band " +
                              std::to_string(b));
    }
    if (absorption[i] + transmission[i] > 1.0 + 1e-12)
      throw ValidationError("material \"" + name + "\": absorption + transmission > 1 in band " +
                            std::to_string(b));
  }
}

Scene::Scene(std::vector<Vec3> vertices, std::vector<Surface> surfaces,
             std::vector<Material> materials, double walkable_height)
    : vertices_(std::move(vertices)),
      surfaces_(std::move(surfaces)),
      materials_(std::move(materials)),
      walkable_height_(walkable_height),
      id_(g_scene_counter.fetch_add(1)) {
  if (materials_.empty()) throw ConfigError("scene: empty material table");
  const double inf = std::numeric_limits<double>::infinity();
  bmin_ = {inf, inf, inf};
  bmax_ = {-inf, -inf, -inf};
  std::vector<std::array<Vec3, 3>> tris;
  tris.reserve(surfaces_.size());
  for (const auto& s : surfaces_) {
    for (int v : s.vertices) {
      if (v < 0 || v >= static_cast<int>(vertices_.size()))
        throw ValidationError("scene: surface references vertex out of range");
    }
    if (s.material_id < 0 || s.material_id >= static_cast<int>(materials_.size()))
      throw ValidationError("scene: surface references material out of range");
    const Vec3& a = vertices_[static_cast<std::size_t>(s.vertices[0])];
    const Vec3& b = vertices_[static_cast<std::size_t>(s.vertices[1])];
    const Vec3& c = vertices_[static_cast<std::size_t>(s.vertices[2])];
    if ((b - a).cross(c - a).norm() < 2e-12)
      throw ValidationError("scene: degenerate zero-area triangle");
    tris.push_back({a, b, c});
    for (const Vec3& v : {a, b, c}) {
      bmin_ = {std::min(bmin_.x, v.x), std::min(bmin_.y, v.y), std::min(bmin_.z, v.z)};
      bmax_ = {std::max(bmax_.x, v.x), std::max(bmax_.y, v.y), std::max(bmax_.z, v.z)};
    }
  }
  bvh_.build(std::move(tris));
}

bool Scene::inside_bounds(const Vec3& p) const {
  return p.x > bmin_.x && p.x < bmax_.x && p.y > bmin_.y && p.y < bmax_.y && p.z > bmin_.z &&
         p.z < bmax_.z;
}

std::optional<Hit> Scene::ray_intersect(const Vec3& origin, const Vec3& direction,
                                        double t_max) const {
  return bvh_.intersect(origin, direction, kSurfaceEps, t_max);
}

std::array<double, kNumBands> Scene::occlusion_factor(const Vec3& a, const Vec3& b) const {
  const Vec3 d = b - a;
  const double dist = d.norm();
  if (dist < 1e-9) throw DomainError("occlusion_factor: endpoints coincide");
  const Vec3 dir = d / dist;

  std::vector<Hit> hits;
  bvh_.intersect_all(a, dir, kSurfaceEps, dist - kSurfaceEps, hits);
  std::sort(hits.begin(), hits.end(),
            [](const Hit& x, const Hit& y) { return x.distance < y.distance; });

  std::array<double, kNumBands> factor;
  factor.fill(1.0);
  double prev_t = -1.0;
  for (const auto& h : hits) {
    if (h.distance - prev_t < kDuplicateHitEps) continue;
    prev_t = h.distance;
    const auto& tau = surface_coeffs(h.surface_id).transmission;
    for (int band = 0; band < kNumBands; ++band)
      factor[static_cast<std::size_t>(band)] *= tau[static_cast<std::size_t>(band)];
  }
  return factor;
}

std::vector<Material> parse_materials_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("materials: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("materials: top level must be an object");

  std::vector<Material> materials;
  for (auto it = j.begin(); it != j.end(); ++it) {
    Material m;
    m.name = it.key();
    if (!it.value().is_object())
      throw FormatError("materials: entry \"" + m.name + "\" must be an object");
    m.coeffs.absorption = parse_band_array(it.value(), m.name, "absorption", 0.0);
    m.coeffs.scattering = parse_band_array(it.value(), m.name, "scattering", 0.0);
    m.coeffs.transmission = parse_band_array(it.value(), m.name, "transmission", 0.0);
    m.coeffs.validate(m.name);
    materials.push_back(std::move(m));
  }
  const bool has_default = std::any_of(materials.begin(), materials.end(),
                                       [](const Material& m) { return m.name == "default"; });
  if (!has_default) throw ConfigError("materials: required \"default\" entry is missing");
  return materials;
}

Scene load_scene(const std::string& mesh_path, const std::string& materials_path,
                 double walkable_height) {
  std::ifstream mats_in(materials_path);
  if (!mats_in) throw IoError("cannot open materials file: " + materials_path);
  std::stringstream mats_text;
  mats_text << mats_in.rdbuf();
  std::vector<Material> materials = parse_materials_json(mats_text.str());

  std::map<std::string, int> material_ids;
  for (std::size_t i = 0; i < materials.size(); ++i)
    material_ids[materials[i].name] = static_cast<int>(i);
  const int default_id = material_ids.at("default");

  std::ifstream in(mesh_path);
  if (!in) throw IoError("cannot open mesh file: " + mesh_path);

  std::vector<Vec3> vertices;
  std::vector<Surface> surfaces;
  std::string line;
  int line_no = 0;
  std::string active_usemtl;
  std::string active_group;

  auto face_material = [&](int line_number) -> int {
    if (!active_usemtl.empty()) {
      auto it = material_ids.find(active_usemtl);
      if (it == material_ids.end())
        throw ConfigError("mesh line " + std::to_string(line_number) +
                          ": material \"" + active_usemtl + "\" not found in materials table");
      return it->second;
    }
    if (!active_group.empty()) {
      auto it = material_ids.find(active_group);
      if (it != material_ids.end()) return it->second;
    }
    return default_id;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword) || keyword[0] == '#') continue;

    if (keyword == "v") {
      Vec3 v;
      if (!(ls >> v.x >> v.y >> v.z))
        throw FormatError("mesh line " + std::to_string(line_no) + ": malformed vertex record");
      if (!v.finite())
        throw ValidationError("mesh line " + std::to_string(line_no) + ": non-finite vertex");
      vertices.push_back(v);
    } else if (keyword == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/t", "i//n", "i/t/n" -- the vertex index leads.
        std::size_t slash = tok.find('/');
        int raw;
        try {
          raw = std::stoi(slash == std::string::npos ? tok : tok.substr(0, slash));
        } catch (const std::exception&) {
          throw FormatError("mesh line " + std::to_string(line_no) + ": malformed face index \"" +
                            tok + "\"");
        }
        if (raw == 0)
          throw FormatError("mesh line " + std::to_string(line_no) + ": face index 0 is invalid");
        int resolved = raw > 0 ? raw - 1 : static_cast<int>(vertices.size()) + raw;
        if (resolved < 0 || resolved >= static_cast<int>(vertices.size()))
          throw FormatError("mesh line " + std::to_string(line_no) +
                            ": face index out of range: " + std::to_string(raw));
        idx.push_back(resolved);
      }
      if (idx.size() < 3)
        throw FormatError("mesh line " + std::to_string(line_no) +
                          ": face needs at least 3 vertices");
      const int mat = face_material(line_no);
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        surfaces.push_back(Surface{{idx[0], idx[k], idx[k + 1]}, mat});
    } else if (keyword == "usemtl") {
      ls >> active_usemtl;
    } else if (keyword == "g") {
      active_group.clear();
      ls >> active_group;
      active_usemtl.clear();
    }
    // Other records (vn, vt, o, s, mtllib, ...) carry no acoustic meaning.
  }

  if (surfaces.empty()) throw FormatError("mesh has no faces: " + mesh_path);
  return Scene(std::move(vertices), std::move(surfaces), std::move(materials), walkable_height);
}

}  // namespace sonicforge
