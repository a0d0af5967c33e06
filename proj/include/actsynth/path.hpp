#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "actsynth/activity.hpp"
#include "actsynth/placement.hpp"

namespace actsynth {

constexpr double kDefaultCellSize = 0.1;

struct Cell {
  int i = 0;  // column (x)
  int j = 0;  // row (y)
  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

/// Row-major occupancy over the floor bounds; true = blocked.
struct OccupancyGrid {
  Vec2 origin;
  double cell = kDefaultCellSize;
  int nx = 0;
  int ny = 0;
  std::vector<std::uint8_t> cells;

  OccupancyGrid() = default;
  OccupancyGrid(Vec2 origin, double cell, int nx, int ny);

  bool in_bounds(Cell c) const { return c.i >= 0 && c.j >= 0 && c.i < nx && c.j < ny; }
  bool blocked(Cell c) const { return cells[index(c)] != 0; }
  void set_blocked(Cell c, bool b) { cells[index(c)] = b ? 1 : 0; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.j) * static_cast<std::size_t>(nx) + c.i; }
  Vec2 center(Cell c) const { return origin + Vec2{(c.i + 0.5) * cell, (c.j + 0.5) * cell}; }
  Cell cell_of(Vec2 p) const;
  std::size_t blocked_count() const;
  /// Samples the segment every cell/2 (both endpoints included).
  bool segment_free(Vec2 a, Vec2 b) const;
};

class PathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Walk obstacles inflated by `radius` (as rectangles) and walls within
/// `radius` of a cell center are blocked.
OccupancyGrid build_grid(const Scene& scene, double cell = kDefaultCellSize, double radius = kCapsuleRadius);

/// Path length a + b*sqrt(2) in cells, kept as integers so costs compare exactly.
struct StepCount {
  int straight = 0;
  int diagonal = 0;
  double cells() const;
  bool operator==(const StepCount&) const = default;
};

struct CellPath {
  std::vector<Cell> cells;
  StepCount steps;
  double length(double cell) const { return steps.cells() * cell; }
};

/// 8-connected A* with a Euclidean heuristic. Diagonal moves may not cut
/// blocked corners. Throws PathError when either end is blocked or unreachable.
CellPath astar_cells(const OccupancyGrid& grid, Cell start, Cell goal);

/// Greedy shortcut smoothing: keep the farthest waypoint reachable by a free segment.
std::vector<Vec2> smooth_path(const OccupancyGrid& grid, const std::vector<Vec2>& waypoints);

/// Cell-center polyline from start to goal, smoothed.
std::vector<Vec2> astar(const OccupancyGrid& grid, Vec2 start, Vec2 goal);

/// Center of the nearest free cell (ties to the lower row-major index).
Vec2 snap_to_free(const OccupancyGrid& grid, Vec2 p);

struct Trajectory {
  std::string character;
  int from_keyframe = 0;
  int to_keyframe = 0;
  std::vector<Vec2> waypoints;
  std::string segment_label = "walk";
};

/// One walk per moved character.
std::vector<Trajectory> plan_transitions(int from_keyframe, int to_keyframe,
                                         const std::map<std::string, CharacterPose>& prev_poses,
                                         const std::map<std::string, CharacterPose>& next_poses,
                                         const std::vector<StateChange>& diffs, const OccupancyGrid& grid);

double polyline_length(const std::vector<Vec2>& pts);

nlohmann::json trajectory_to_json(const Trajectory& t);

}  // namespace actsynth
