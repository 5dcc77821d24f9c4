#pragma once

// Reactive steering with a polar obstacle histogram and one-step lookahead.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "navkit/occupancy.hpp"
#include "navkit/raycast.hpp"
#include "navkit/simulator.hpp"

namespace navkit {

struct VfhConfig {
  int sectors = 36;
  double window_radius = 1.5;      // meters
  double density_threshold = 0.05; // summed (1 - d/r_w) * resolution
  double safety_radius = 0.2;      // meters
  double target_weight = 5.0;
  double heading_weight = 2.0;
  double step_length = 0.25;
  double turn_angle = std::numbers::pi / 6.0;
};

/// Sector i covers [-pi + i*w, -pi + (i+1)*w) in world angle.
inline double sector_center(int i, int sectors) {
  double w = 2.0 * std::numbers::pi / sectors;
  return -std::numbers::pi + (i + 0.5) * w;
}

/// Obstacle density per sector. Each occupied cell inside the window adds
/// (1 - d/r_w) * resolution to every sector within its enlargement angle
/// asin((safety + res/2) / d) of its bearing.
inline std::vector<double> polar_histogram(const OccupancyGrid& grid, WorldPoint pos, const VfhConfig& cfg) {
  const Geometry& g = grid.geometry();
  std::vector<double> h(std::size_t(cfg.sectors), 0.0);
  const double sw = 2.0 * std::numbers::pi / cfg.sectors;
  CellIndex c0 = g.cell(pos);
  int reach = int(std::ceil(cfg.window_radius / g.resolution)) + 1;
  for (int r = c0.row - reach; r <= c0.row + reach; ++r)
    for (int c = c0.col - reach; c <= c0.col + reach; ++c) {
      CellIndex n{r, c};
      if (!grid.occupied(n)) continue;
      WorldPoint p = g.world(n);
      double d = distance(pos, p);
      if (d >= cfg.window_radius) continue;
      double weight = (1.0 - d / cfg.window_radius) * g.resolution;
      double bearing = bearing_to(pos, p);
      double rad = cfg.safety_radius + g.resolution / 2.0;
      double spread = d > rad ? std::asin(rad / d) : std::numbers::pi / 2.0;
      for (int i = 0; i < cfg.sectors; ++i) {
        // sector overlaps [bearing - spread, bearing + spread]
        if (angle_diff(sector_center(i, cfg.sectors), bearing) <= spread + sw / 2.0) h[std::size_t(i)] += weight;
      }
    }
  return h;
}

/// Heading reachable from the current one by whole turns that lies nearest to angle.
/// Exactly half a turn rounds toward the current heading.
inline int lattice_turns(double heading, double angle, double turn) {
  double x = normalize_angle(angle - heading) / turn;
  double k = std::round(x);
  if (std::abs(std::abs(x - k) - 0.5) < 1e-12) k = std::trunc(x);
  return int(k);
}

inline double lattice_heading(double heading, double angle, double turn) {
  return normalize_angle(heading + lattice_turns(heading, angle, turn) * turn);
}

/// A forward step along `heading` must not enter or cross an occupied cell.
inline bool step_clear(const OccupancyGrid& grid, WorldPoint pos, double heading, double step) {
  WorldPoint dest = advance(pos, heading, step);
  const Geometry& g = grid.geometry();
  if (grid.occupied(g.cell(dest))) return false;
  bool clear = true;
  traverse_segment(g, pos, heading, step, [&](CellIndex c, double t) {
    if (t > 0.0 && grid.occupied(c)) clear = false;
    return clear;
  });
  return clear;
}

struct VfhDecision {
  DiscreteAction action = DiscreteAction::TurnLeft;
  std::optional<int> sector;
  double bearing = 0.0;  // chosen world angle (sector centre)
};

inline VfhDecision vfh_decide(const OccupancyGrid& grid, const Pose& pose, WorldPoint waypoint,
                              const VfhConfig& cfg = {}) {
  auto hist = polar_histogram(grid, pose.position, cfg);
  double target = bearing_to(pose.position, waypoint);
  VfhDecision out;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.sectors; ++i) {
    if (hist[std::size_t(i)] >= cfg.density_threshold) continue;
    double a = sector_center(i, cfg.sectors);
    if (!step_clear(grid, pose.position, lattice_heading(pose.heading, a, cfg.turn_angle), cfg.step_length)) continue;
    double cost = cfg.target_weight * angle_diff(a, target) + cfg.heading_weight * angle_diff(a, pose.heading);
    if (cost < best) {
      best = cost;
      out.sector = i;
      out.bearing = a;
    }
  }
  if (!out.sector) return out;  // recovery spin
  int k = lattice_turns(pose.heading, out.bearing, cfg.turn_angle);
  if (k == 0)
    out.action = DiscreteAction::MoveForward;
  else
    out.action = k > 0 ? DiscreteAction::TurnLeft : DiscreteAction::TurnRight;
  return out;
}

inline DiscreteAction vfh_step(const OccupancyGrid& grid, const Pose& pose, WorldPoint waypoint,
                               const VfhConfig& cfg = {}) {
  return vfh_decide(grid, pose, waypoint, cfg).action;
}

}  // namespace navkit
