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
#ifndef SONICFORGE_TRAJECTORY_HPP
#define SONICFORGE_TRAJECTORY_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sonicforge/scene.hpp"
#include "sonicforge/vec3.hpp"

namespace sonicforge {

/// Time-parameterized polyline travelled at constant speed.
struct Trajectory {
  std::vector<Vec3> waypoints;      // >= 2, consecutive points distinct
  std::vector<double> arc_lengths;  // cumulative, arc_lengths[0] == 0
  double total_length = 0.0;        // meters
  double duration = 0.0;            // seconds; 0 until with_duration()

  static Trajectory from_waypoints(std::vector<Vec3> points);
};

/// 2D occupancy grid sliced at the scene's walkable height (0.25 m cells).
/// A cell is blocked when any surface crosses a vertical +-0.5 m probe at
/// its center. Built once per scene and cached.
class OccupancyGrid {
 public:
  static constexpr double kCellSize = 0.25;
  static constexpr double kProbeHalfHeight = 0.5;

  static std::shared_ptr<const OccupancyGrid> for_scene(const Scene& scene);

  int nx() const { return nx_; }
  int nz() const { return nz_; }
  double height() const { return height_; }
  bool in_range(int ix, int iz) const { return ix >= 0 && ix < nx_ && iz >= 0 && iz < nz_; }
  bool cell_free(int ix, int iz) const {
    return in_range(ix, iz) && free_[static_cast<std::size_t>(iz * nx_ + ix)];
  }
  Vec3 cell_center(int ix, int iz) const;
  std::pair<int, int> cell_of(const Vec3& p) const;

  /// All free cells, row-major order (deterministic).
  const std::vector<std::pair<int, int>>& free_cells() const { return free_cells_; }

 private:
  OccupancyGrid(const Scene& scene);

  double origin_x_ = 0.0, origin_z_ = 0.0, height_ = 0.0;
  int nx_ = 0, nz_ = 0;
  std::vector<char> free_;
  std::vector<std::pair<int, int>> free_cells_;
};

/// Shortest obstacle-free path between two points at walkable height.
/// Unobstructed pairs connect directly; otherwise grid A* with greedy
/// line-of-sight shortcutting. Throws UnreachableError when no path exists.
Trajectory plan_path(const Scene& scene, const Vec3& start, const Vec3& end);

/// Sets the traversal duration; speed becomes total_length / T.
Trajectory with_duration(Trajectory traj, double duration_seconds);

/// Arc-length-uniform interpolation; t must lie in [0, duration].
Vec3 position_at(const Trajectory& traj, double t_seconds);

struct PositionSample {
  Vec3 position;
  double arc_length = 0.0;
};

/// Positions at arc lengths 0, spacing, 2*spacing, ... plus the endpoint.
/// Always returns at least {start, end}.
std::vector<PositionSample> sample_rir_positions(const Trajectory& traj, double spacing);

struct PlacementViolation {
  std::string pair;      // e.g. "mic-source_start"
  double distance = 0.0;
  double min_allowed = 0.0;
  double max_allowed = 0.0;

  std::string describe() const;
};

struct PlacementReport {
  std::vector<PlacementViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the 1-8 m placement constraints between microphone, source
/// endpoints, and noise positions; reports every violated pair.
PlacementReport validate_placement(const Vec3& mic, const Vec3& src_start, const Vec3& src_end,
                                   const std::vector<Vec3>& noise_positions);

}  // namespace sonicforge

#endif  // SONICFORGE_TRAJECTORY_HPP
