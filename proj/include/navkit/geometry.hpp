#pragma once

#include <cmath>
#include <compare>
#include <numbers>

namespace navkit {

struct CellIndex {
  int row = 0;
  int col = 0;

  friend constexpr auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

inline double distance(WorldPoint a, WorldPoint b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double cell_distance(CellIndex a, CellIndex b) {
  return std::hypot(double(a.row - b.row), double(a.col - b.col));
}

/// Wraps an angle into [-pi, pi).
inline double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  double r = a - std::numbers::pi;
  // fmod can round up to exactly pi
  if (r >= std::numbers::pi) r -= two_pi;
  return r;
}

/// Absolute angular difference in [0, pi].
inline double angle_diff(double a, double b) { return std::abs(normalize_angle(a - b)); }

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

struct Pose {
  WorldPoint position;
  double heading = 0.0;  // radians, kept in [-pi, pi)

  friend constexpr bool operator==(const Pose&, const Pose&) = default;
};

inline WorldPoint advance(WorldPoint p, double heading, double length) {
  return {p.x + length * std::cos(heading), p.y + length * std::sin(heading)};
}

inline double bearing_to(WorldPoint from, WorldPoint to) {
  return std::atan2(to.y - from.y, to.x - from.x);
}

}  // namespace navkit
