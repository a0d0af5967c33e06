#include "actsynth/path.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <queue>

namespace actsynth {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Open {
  double f;
  double g;
  std::size_t idx;
  bool operator>(const Open& o) const { return f != o.f ? f > o.f : idx > o.idx; }
};

}  // namespace

OccupancyGrid::OccupancyGrid(Vec2 origin_, double cell_, int nx_, int ny_)
    : origin(origin_), cell(cell_), nx(nx_), ny(ny_), cells(static_cast<std::size_t>(nx_) * ny_, 0) {}

Cell OccupancyGrid::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin.x) / cell)), static_cast<int>(std::floor((p.y - origin.y) / cell))};
}

std::size_t OccupancyGrid::blocked_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

// Exact cell traversal; passing through a corner requires both side cells free.
bool OccupancyGrid::segment_free(Vec2 a, Vec2 b) const {
  const auto free = [&](Cell c) { return in_bounds(c) && !blocked(c); };
  Cell c = cell_of(a);
  const Cell last = cell_of(b);
  if (!free(c)) return false;
  const Vec2 d = b - a;
  const int sx = d.x > 0 ? 1 : (d.x < 0 ? -1 : 0);
  const int sy = d.y > 0 ? 1 : (d.y < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const auto first_cross = [&](double p, double o, int idx, int step, double dp) {
    if (step == 0) return inf;
    const double edge = o + (idx + (step > 0 ? 1 : 0)) * cell;
    return (edge - p) / dp;
  };
  double tx = first_cross(a.x, origin.x, c.i, sx, d.x);
  double ty = first_cross(a.y, origin.y, c.j, sy, d.y);
  const double dtx = sx ? cell / std::abs(d.x) : inf;
  const double dty = sy ? cell / std::abs(d.y) : inf;
  constexpr double eps = 1e-12;
  while (c.i != last.i || c.j != last.j) {
    if (std::abs(tx - ty) <= eps) {
      if (tx > 1.0) break;
      if (!free({c.i + sx, c.j}) || !free({c.i, c.j + sy})) return false;
      c = {c.i + sx, c.j + sy};
      tx += dtx;
      ty += dty;
    } else if (tx < ty) {
      if (tx > 1.0) break;
      c.i += sx;
      tx += dtx;
    } else {
      if (ty > 1.0) break;
      c.j += sy;
      ty += dty;
    }
    if (!free(c)) return false;
  }
  return true;
}

double StepCount::cells() const { return straight + diagonal * kSqrt2; }

OccupancyGrid build_grid(const Scene& scene, double cell, double radius) {
  if (!(cell > 0.0)) throw std::invalid_argument("build_grid: cell must be positive");
  const Rect2& b = scene.floor_bounds;
  const int nx = std::max(1, static_cast<int>(std::ceil(b.width() / cell - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(b.height() / cell - 1e-9)));
  OccupancyGrid grid({b.xmin, b.ymin}, cell, nx, ny);

  std::vector<Footprint> inflated;
  for (const auto& o : scene.objects) {
    if (o.has(Affordance::walk_obstacle)) inflated.push_back(footprint_of(o).inflated(radius));
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vec2 p = grid.center({i, j});
      bool hit = std::any_of(inflated.begin(), inflated.end(), [&](const Footprint& f) { return f.contains(p); });
      if (!hit) {
        hit = std::any_of(scene.walls.begin(), scene.walls.end(),
                          [&](const Segment2& w) { return point_segment_distance(p, w) <= radius; });
      }
      if (hit) grid.set_blocked({i, j}, true);
    }
  }
  return grid;
}

CellPath astar_cells(const OccupancyGrid& grid, Cell start, Cell goal) {
  if (!grid.in_bounds(start) || grid.blocked(start)) throw PathError("start cell is blocked or outside the grid");
  if (!grid.in_bounds(goal) || grid.blocked(goal)) throw PathError("goal cell is blocked or outside the grid");

  const std::size_t n = grid.cells.size();
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<StepCount> steps(n);
  std::vector<std::size_t> parent(n, n);
  std::vector<char> closed(n, 0);
  const auto h = [&](Cell c) { return std::hypot(c.i - goal.i, c.j - goal.j); };
  const auto cell_at = [&](std::size_t idx) {
    return Cell{static_cast<int>(idx % static_cast<std::size_t>(grid.nx)),
                static_cast<int>(idx / static_cast<std::size_t>(grid.nx))};
  };

  std::priority_queue<Open, std::vector<Open>, std::greater<>> open;
  const std::size_t s = grid.index(start);
  const std::size_t t = grid.index(goal);
  g[s] = 0.0;
  open.push({h(start), 0.0, s});
  while (!open.empty()) {
    const Open cur = open.top();
    open.pop();
    if (closed[cur.idx]) continue;
    closed[cur.idx] = 1;
    if (cur.idx == t) break;
    const Cell c = cell_at(cur.idx);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const Cell nb{c.i + di, c.j + dj};
        if (!grid.in_bounds(nb) || grid.blocked(nb)) continue;
        const bool diag = di != 0 && dj != 0;
        if (diag && (grid.blocked({c.i + di, c.j}) || grid.blocked({c.i, c.j + dj}))) continue;
        const std::size_t ni = grid.index(nb);
        if (closed[ni]) continue;
        StepCount sc = steps[cur.idx];
        (diag ? sc.diagonal : sc.straight) += 1;
        const double ng = sc.cells();
        if (ng < g[ni]) {
          g[ni] = ng;
          steps[ni] = sc;
          parent[ni] = cur.idx;
          open.push({ng + h(nb), ng, ni});
        }
      }
    }
  }
  if (!closed[t]) throw PathError("goal unreachable");

  CellPath path;
  path.steps = steps[t];
  for (std::size_t i = t; i != n; i = parent[i]) {
    path.cells.push_back(cell_at(i));
    if (i == s) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

std::vector<Vec2> smooth_path(const OccupancyGrid& grid, const std::vector<Vec2>& waypoints) {
  if (waypoints.size() <= 2) return waypoints;
  std::vector<Vec2> out{waypoints.front()};
  std::size_t anchor = 0;
  while (anchor + 1 < waypoints.size()) {
    std::size_t next = anchor + 1;
    for (std::size_t k = waypoints.size() - 1; k > anchor + 1; --k) {
      if (grid.segment_free(waypoints[anchor], waypoints[k])) {
        next = k;
        break;
      }
    }
    out.push_back(waypoints[next]);
    anchor = next;
  }
  return out;
}

std::vector<Vec2> astar(const OccupancyGrid& grid, Vec2 start, Vec2 goal) {
  const CellPath path = astar_cells(grid, grid.cell_of(start), grid.cell_of(goal));
  std::vector<Vec2> pts;
  for (const auto& c : path.cells) pts.push_back(grid.center(c));
  if (pts.size() == 1) pts.push_back(pts.front());
  return smooth_path(grid, pts);
}

Vec2 snap_to_free(const OccupancyGrid& grid, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  std::optional<Cell> pick;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (grid.blocked({i, j})) continue;
      const double d = distance(grid.center({i, j}), p);
      if (d < best) {
        best = d;
        pick = Cell{i, j};
      }
    }
  }
  if (!pick) throw PathError("grid has no free cell");
  return grid.center(*pick);
}

std::vector<Trajectory> plan_transitions(int from_keyframe, int to_keyframe,
                                         const std::map<std::string, CharacterPose>& prev_poses,
                                         const std::map<std::string, CharacterPose>& next_poses,
                                         const std::vector<StateChange>& diffs, const OccupancyGrid& grid) {
  std::vector<std::future<Trajectory>> jobs;
  for (const auto& d : diffs) {
    if (!d.moved()) continue;
    const auto a = prev_poses.find(d.character);
    const auto b = next_poses.find(d.character);
    if (a == prev_poses.end() || b == next_poses.end()) {
      throw PathError("no pose for moved character " + d.character);
    }
    const Vec2 from = a->second.position.xy();
    const Vec2 to = b->second.position.xy();
    jobs.push_back(std::async(std::launch::async, [&grid, from, to, c = d.character, from_keyframe, to_keyframe] {
      Trajectory t;
      t.character = c;
      t.from_keyframe = from_keyframe;
      t.to_keyframe = to_keyframe;
      try {
        t.waypoints = astar(grid, snap_to_free(grid, from), snap_to_free(grid, to));
      } catch (const PathError& e) {
        throw PathError(c + " (keyframe " + std::to_string(from_keyframe) + " -> " + std::to_string(to_keyframe) +
                        "): " + e.what());
      }
      return t;
    }));
  }
  std::vector<Trajectory> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : t.waypoints) pts.push_back({p.x, p.y});
  return {{"character", t.character},
          {"from_keyframe", t.from_keyframe},
          {"to_keyframe", t.to_keyframe},
          {"segment_label", t.segment_label},
          {"waypoints", pts}};
}

}  // namespace actsynth
