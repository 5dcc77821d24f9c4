#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "navkit/grid.hpp"

namespace navkit {

/// Visits every cell a segment passes through (Amanatides-Woo). When the
/// segment crosses a cell corner exactly, both side cells are visited too.
/// The visitor gets (cell, entry distance in meters) and returns false to stop.
template <typename Visit>
void traverse_segment(const Geometry& geo, WorldPoint from, double angle, double length, Visit&& visit) {
  const double res = geo.resolution;
  double x = geo.fx(from), y = geo.fy(from);  // cell units
  const double dx = std::cos(angle), dy = std::sin(angle);
  int cx = int(std::floor(x)), cy = int(std::floor(y));
  const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0), sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double eps = 1e-12;
  double tdx = sx != 0 ? 1.0 / std::abs(dx) : inf, tdy = sy != 0 ? 1.0 / std::abs(dy) : inf;
  double tmx = sx > 0 ? (cx + 1 - x) * tdx : (sx < 0 ? (x - cx) * tdx : inf);
  double tmy = sy > 0 ? (cy + 1 - y) * tdy : (sy < 0 ? (y - cy) * tdy : inf);
  const double tmax = length / res;
  double t = 0.0;
  if (!visit(CellIndex{cy, cx}, 0.0)) return;
  while (true) {
    if (std::abs(tmx - tmy) < eps) {
      t = tmx;
      if (t > tmax) return;
      if (!visit(CellIndex{cy, cx + sx}, t * res) || !visit(CellIndex{cy + sy, cx}, t * res)) return;
      cx += sx;
      cy += sy;
      tmx += tdx;
      tmy += tdy;
    } else if (tmx < tmy) {
      t = tmx;
      if (t > tmax) return;
      cx += sx;
      tmx += tdx;
    } else {
      t = tmy;
      if (t > tmax) return;
      cy += sy;
      tmy += tdy;
    }
    if (!visit(CellIndex{cy, cx}, t * res)) return;
  }
}

/// Distance from `from` to the boundary of the first true cell along the ray,
/// or nullopt if none within max_range. Cells outside the raster count as blocking.
inline std::optional<double> raycast(const BinaryMask& blocked, WorldPoint from, double angle, double max_range) {
  std::optional<double> hit;
  traverse_segment(blocked.geometry(), from, angle, max_range, [&](CellIndex c, double t) {
    if (!blocked.contains(c) || blocked[c]) {
      if (t <= max_range) hit = t;
      return false;
    }
    return true;
  });
  return hit;
}

/// True when no blocking cell lies on the segment between a and b.
inline bool line_of_sight(const BinaryMask& blocked, WorldPoint a, WorldPoint b) {
  double len = distance(a, b);
  if (len == 0.0) return blocked.contains(blocked.geometry().cell(a)) && !blocked[blocked.geometry().cell(a)];
  auto hit = raycast(blocked, a, bearing_to(a, b), len);
  return !hit.has_value();
}

}  // namespace navkit
