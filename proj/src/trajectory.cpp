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
#include "sonicforge/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>

#include "sonicforge/errors.hpp"

namespace sonicforge {

namespace {

constexpr double kMinSeparation = 1.0;
constexpr double kMaxSeparation = 8.0;

bool line_of_sight(const Scene& scene, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double dist = d.norm();
  if (dist < 1e-9) return true;
  return !scene.ray_intersect(a, d / dist, dist - 1e-6).has_value();
}

std::mutex g_grid_mutex;
std::map<std::uint64_t, std::shared_ptr<const OccupancyGrid>> g_grid_cache;

}  // namespace

Trajectory Trajectory::from_waypoints(std::vector<Vec3> points) {
  if (points.size() < 2) throw ValidationError("trajectory: needs at least 2 waypoints");
  Trajectory t;
  t.waypoints = std::move(points);
  t.arc_lengths.resize(t.waypoints.size(), 0.0);
  for (std::size_t i = 1; i < t.waypoints.size(); ++i) {
    const double seg = distance(t.waypoints[i - 1], t.waypoints[i]);
    if (seg < 1e-9) throw ValidationError("trajectory: consecutive waypoints coincide");
    t.arc_lengths[i] = t.arc_lengths[i - 1] + seg;
  }
  t.total_length = t.arc_lengths.back();
  return t;
}

OccupancyGrid::OccupancyGrid(const Scene& scene) {
  const Vec3& lo = scene.bounds_min();
  const Vec3& hi = scene.bounds_max();
  origin_x_ = lo.x;
  origin_z_ = lo.z;
  height_ = scene.walkable_height();
  nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / kCellSize)));
  nz_ = std::max(1, static_cast<int>(std::ceil((hi.z - lo.z) / kCellSize)));
  free_.assign(static_cast<std::size_t>(nx_) * nz_, 0);

  const Vec3 up{0.0, 1.0, 0.0};
  for (int iz = 0; iz < nz_; ++iz) {
    for (int ix = 0; ix < nx_; ++ix) {
      const Vec3 center = cell_center(ix, iz);
      const Vec3 probe_base = center - Vec3{0.0, kProbeHalfHeight, 0.0};
      const bool blocked =
          scene.ray_intersect(probe_base, up, 2.0 * kProbeHalfHeight).has_value();
      if (!blocked) {
        free_[static_cast<std::size_t>(iz * nx_ + ix)] = 1;
        free_cells_.emplace_back(ix, iz);
      }
    }
  }
}

Vec3 OccupancyGrid::cell_center(int ix, int iz) const {
  return {origin_x_ + (ix + 0.5) * kCellSize, height_, origin_z_ + (iz + 0.5) * kCellSize};
}

std::pair<int, int> OccupancyGrid::cell_of(const Vec3& p) const {
  return {static_cast<int>(std::floor((p.x - origin_x_) / kCellSize)),
          static_cast<int>(std::floor((p.z - origin_z_) / kCellSize))};
}

std::shared_ptr<const OccupancyGrid> OccupancyGrid::for_scene(const Scene& scene) {
  std::lock_guard<std::mutex> lock(g_grid_mutex);
  auto it = g_grid_cache.find(scene.id());
  if (it != g_grid_cache.end()) return it->second;
  if (g_grid_cache.size() > 32) g_grid_cache.clear();
  auto grid = std::shared_ptr<const OccupancyGrid>(new OccupancyGrid(scene));
  g_grid_cache.emplace(scene.id(), grid);
  return grid;
}

Trajectory plan_path(const Scene& scene, const Vec3& start, const Vec3& end) {
  if (!start.finite() || !end.finite()) throw ValidationError("plan_path: non-finite endpoint");
  if (distance(start, end) < 1e-9) throw DomainError("plan_path: start and end coincide");
  if (!scene.inside_bounds(start) || !scene.inside_bounds(end))
    throw PlacementError("plan_path: endpoint outside scene bounds");

  if (line_of_sight(scene, start, end))
    return Trajectory::from_waypoints({start, end});

  const auto grid = OccupancyGrid::for_scene(scene);
  const auto [sx, sz] = grid->cell_of(start);
  const auto [ex, ez] = grid->cell_of(end);
  if (!grid->cell_free(sx, sz) || !grid->cell_free(ex, ez))
    throw UnreachableError("plan_path: endpoint cell is blocked");

  // A* over the 8-connected grid. Edges are validated against the real
  // geometry (ray test between cell centers) so paths cannot slip through
  // walls that lie between probe points.
  const int nx = grid->nx();
  const int nz = grid->nz();
  const auto idx = [nx](int x, int z) { return static_cast<std::size_t>(z * nx + x); };
  const std::size_t n_cells = static_cast<std::size_t>(nx) * nz;
  std::vector<double> g_cost(n_cells, std::numeric_limits<double>::infinity());
  std::vector<int> came_from(n_cells, -1);
  const Vec3 goal_center = grid->cell_center(ex, ez);

  using QueueEntry = std::pair<double, int>;  // (f, cell) - ties break on cell index
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  g_cost[idx(sx, sz)] = 0.0;
  open.emplace(distance(grid->cell_center(sx, sz), goal_center), static_cast<int>(idx(sx, sz)));

  bool found = false;
  while (!open.empty()) {
    const auto [f, cell] = open.top();
    open.pop();
    const int cx = cell % nx;
    const int cz = cell / nx;
    if (cx == ex && cz == ez) {
      found = true;
      break;
    }
    const double g_here = g_cost[static_cast<std::size_t>(cell)];
    if (f > g_here + distance(grid->cell_center(cx, cz), goal_center) + 1e-9) continue;
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dz == 0) continue;
        const int mx = cx + dx;
        const int mz = cz + dz;
        if (!grid->cell_free(mx, mz)) continue;
        const Vec3 a = grid->cell_center(cx, cz);
        const Vec3 b = grid->cell_center(mx, mz);
        const double step = distance(a, b);
        const double tentative = g_here + step;
        if (tentative >= g_cost[idx(mx, mz)]) continue;
        if (!line_of_sight(scene, a, b)) continue;
        g_cost[idx(mx, mz)] = tentative;
        came_from[idx(mx, mz)] = cell;
        open.emplace(tentative + distance(b, goal_center), static_cast<int>(idx(mx, mz)));
      }
    }
  }
  if (!found) throw UnreachableError("plan_path: no navigable path between endpoints");

  std::vector<Vec3> raw;
  raw.push_back(end);
  for (int cell = static_cast<int>(idx(ex, ez)); cell != -1;
       cell = came_from[static_cast<std::size_t>(cell)])
    raw.push_back(grid->cell_center(cell % nx, cell / nx));
  raw.push_back(start);
  std::reverse(raw.begin(), raw.end());

  // Greedy line-of-sight shortcutting; every surviving edge is verified.
  std::vector<Vec3> path;
  path.push_back(raw.front());
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t j = raw.size() - 1;
    for (; j > i + 1; --j)
      if (line_of_sight(scene, raw[i], raw[j])) break;
    if (j == i + 1 && !line_of_sight(scene, raw[i], raw[j]))
      throw UnreachableError("plan_path: cannot certify an obstacle-free path");
    if (distance(raw[i], raw[j]) > 1e-9) path.push_back(raw[j]);
    i = j;
  }
  if (path.size() < 2) path.push_back(end);
  return Trajectory::from_waypoints(std::move(path));
}

Trajectory with_duration(Trajectory traj, double duration_seconds) {
  if (!(duration_seconds > 0.0)) throw DomainError("with_duration: duration must be > 0");
  traj.duration = duration_seconds;
  return traj;
}

Vec3 position_at(const Trajectory& traj, double t_seconds) {
  if (!(traj.duration > 0.0)) throw DomainError("position_at: trajectory has no duration");
  if (t_seconds < -1e-12 || t_seconds > traj.duration + 1e-12)
    throw DomainError("position_at: time outside [0, duration]");
  const double s = std::clamp(t_seconds / traj.duration, 0.0, 1.0) * traj.total_length;

  const auto it = std::upper_bound(traj.arc_lengths.begin(), traj.arc_lengths.end(), s);
  std::size_t hi = std::min<std::size_t>(
      static_cast<std::size_t>(it - traj.arc_lengths.begin()), traj.waypoints.size() - 1);
  if (hi == 0) hi = 1;
  const std::size_t lo = hi - 1;
  const double seg = traj.arc_lengths[hi] - traj.arc_lengths[lo];
  const double alpha = seg > 0.0 ? (s - traj.arc_lengths[lo]) / seg : 0.0;
  return traj.waypoints[lo] + (traj.waypoints[hi] - traj.waypoints[lo]) * alpha;
}

std::vector<PositionSample> sample_rir_positions(const Trajectory& traj, double spacing) {
  if (!(spacing > 0.0)) throw DomainError("sample_rir_positions: spacing must be > 0");

  // Reuse position_at's arc walk without requiring a duration.
  Trajectory probe = traj;
  probe.duration = 1.0;

  std::vector<PositionSample> out;
  const auto steps = static_cast<long>(std::floor(traj.total_length / spacing + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    const double s = std::min(static_cast<double>(k) * spacing, traj.total_length);
    out.push_back({position_at(probe, s / traj.total_length), s});
  }
  if (traj.total_length - out.back().arc_length > 1e-9)
    out.push_back({traj.waypoints.back(), traj.total_length});
  if (out.size() < 2) out.push_back({traj.waypoints.back(), traj.total_length});
  return out;
}

std::string PlacementViolation::describe() const {
  std::ostringstream os;
  os << pair << ": distance " << distance << " m outside [" << min_allowed << ", " << max_allowed
     << "] m";
  return os.str();
}

PlacementReport validate_placement(const Vec3& mic, const Vec3& src_start, const Vec3& src_end,
                                   const std::vector<Vec3>& noise_positions) {
  PlacementReport report;
  const auto check = [&](const std::string& pair, const Vec3& a, const Vec3& b) {
    const double d = distance(a, b);
    if (d < kMinSeparation || d > kMaxSeparation)
      report.violations.push_back({pair, d, kMinSeparation, kMaxSeparation});
  };
  check("mic-source_start", mic, src_start);
  check("mic-source_end", mic, src_end);
  check("source_start-source_end", src_start, src_end);
  for (std::size_t i = 0; i < noise_positions.size(); ++i)
    check("mic-noise_" + std::to_string(i), mic, noise_positions[i]);
  return report;
}

}  // namespace sonicforge
