#pragma once

// Global path planning over the occupancy map.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/gridmap.hpp"
#include "navkit/occupancy.hpp"

namespace navkit {

struct Path {
  std::vector<CellIndex> cells;
  double length = 0.0;  // meters, geometric
  double cost = 0.0;    // cell units, including clearance penalties

  bool empty() const { return cells.empty(); }
  std::size_t size() const { return cells.size(); }
};

struct PlannerConfig {
  double clearance_weight = 2.0;  // w
  double safe_distance = 0.5;     // d_safe, meters
};

/// Distance (in cells) from every cell to the nearest occupied cell.
/// Infinity everywhere if nothing is occupied.
inline DistanceField clearance_field(const OccupancyGrid& grid) {
  DistanceField d = squared_edt(grid.occupied_mask());
  for (auto& v : d.values()) v = std::sqrt(v);
  return d;
}

/// Octile distance in cell units.
inline double octile(CellIndex a, CellIndex b) {
  double dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
  return std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy);
}

/// Non-occupied cell nearest to p (Euclidean between cell centres), searched
/// ring by ring outward. Ties go to the lowest (row, col).
inline WorldPoint safety_relocate(WorldPoint p, const OccupancyGrid& grid) {
  const Geometry& g = grid.geometry();
  CellIndex c = g.cell(p);
  if (g.contains(c) && !grid.occupied(c)) return p;
  CellIndex base{std::clamp(c.row, 0, g.height - 1), std::clamp(c.col, 0, g.width - 1)};
  if (base != c && !grid.occupied(base)) return g.world(base);
  long best = -1;
  CellIndex best_cell{};
  int max_ring = std::max(g.width, g.height);
  for (int k = 1; k <= max_ring; ++k) {
    if (best >= 0 && long(k) * k > best) break;
    for (int r = base.row - k; r <= base.row + k; ++r)
      for (int col = base.col - k; col <= base.col + k; ++col) {
        if (std::max(std::abs(r - base.row), std::abs(col - base.col)) != k) continue;
        CellIndex n{r, col};
        if (!g.contains(n) || grid.occupied(n)) continue;
        long d = long(r - base.row) * (r - base.row) + long(col - base.col) * (col - base.col);
        if (best < 0 || d < best || (d == best && n < best_cell)) {
          best = d;
          best_cell = n;
        }
      }
  }
  if (best < 0) throw Error(ErrorCode::NoFreeCell, "no unoccupied cell in the grid");
  return g.world(best_cell);
}

/// 8-connected A* over free and unexplored cells. Move cost is the step length
/// in cells plus w * max(0, d_safe - clearance(dest))^2. No diagonal move may
/// cut past an occupied orthogonal neighbour. An occupied goal is relocated first.
inline Path plan_astar(const OccupancyGrid& grid, CellIndex start, CellIndex goal, const DistanceField& clearance,
                       const PlannerConfig& cfg = {}) {
  const Geometry& g = grid.geometry();
  if (!g.contains(start)) throw Error(ErrorCode::InvalidArgument, "start outside grid");
  if (!g.contains(goal) || grid.occupied(goal)) goal = g.cell(safety_relocate(g.world(goal), grid));
  const double d_safe = cfg.safe_distance / g.resolution;
  const double w = cfg.clearance_weight;
  auto penalty = [&](std::size_t i) {
    if (w == 0.0) return 0.0;
    double gap = d_safe - clearance.at_index(i);
    return gap > 0.0 ? w * gap * gap : 0.0;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(g.size(), inf);
  std::vector<std::size_t> parent(g.size(), std::size_t(-1));
  std::vector<std::uint8_t> closed(g.size(), 0);
  // (f, h, index): lower f, then lower h, then lower index
  using Entry = std::tuple<double, double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::size_t s = g.index(start), t = g.index(goal);
  cost[s] = 0.0;
  open.emplace(octile(start, goal), octile(start, goal), s);
  while (!open.empty()) {
    auto [f, h, i] = open.top();
    open.pop();
    if (closed[i]) continue;
    closed[i] = 1;
    if (i == t) break;
    CellIndex c = g.cell_at(i);
    for (int k = 0; k < 8; ++k) {
      CellIndex n{c.row + kDy8[k], c.col + kDx8[k]};
      if (!g.contains(n) || grid.occupied(n)) continue;
      bool diag = kDx8[k] != 0 && kDy8[k] != 0;
      if (diag && (grid.occupied({c.row, n.col}) || grid.occupied({n.row, c.col}))) continue;
      std::size_t j = g.index(n);
      if (closed[j]) continue;
      double nc = cost[i] + (diag ? std::numbers::sqrt2 : 1.0) + penalty(j);
      if (nc < cost[j]) {
        cost[j] = nc;
        parent[j] = i;
        double nh = octile(n, goal);
        open.emplace(nc + nh, nh, j);
      }
    }
  }
  if (!closed[t]) throw Error(ErrorCode::NoPath, "goal unreachable in current map");

  Path path;
  path.cost = cost[t];
  for (std::size_t i = t; i != std::size_t(-1); i = parent[i]) path.cells.push_back(g.cell_at(i));
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t i = 1; i < path.cells.size(); ++i) path.length += cell_distance(path.cells[i - 1], path.cells[i]);
  path.length *= g.resolution;
  return path;
}

/// First path point whose arc length from the path start reaches d0 (the
/// endpoint when the path is shorter). d0 = 0 gives the point after the start.
inline WorldPoint select_waypoint(const Path& path, double d0, const Geometry& g, std::size_t from = 0) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  from = std::min(from, path.size() - 1);
  double arc = 0.0;
  for (std::size_t i = from + 1; i < path.size(); ++i) {
    arc += cell_distance(path.cells[i - 1], path.cells[i]) * g.resolution;
    if (arc >= d0 - 1e-9) return g.world(path.cells[i]);
  }
  return g.world(path.cells.back());
}

/// Index of the path cell closest to p (first on ties).
inline std::size_t nearest_path_index(const Path& path, WorldPoint p, const Geometry& g) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i)
    if (double d = distance(g.world(path.cells[i]), p); d < bd) {
      bd = d;
      best = i;
    }
  return best;
}

}  // namespace navkit
