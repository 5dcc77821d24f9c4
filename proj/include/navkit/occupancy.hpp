#pragma once

// Online occupancy map built from depth rays.

#include <cstdint>
#include <limits>

#include "navkit/grid.hpp"
#include "navkit/raycast.hpp"
#include "navkit/simulator.hpp"

namespace navkit {

enum class CellState : std::uint8_t { Unexplored = 0, Free = 1, Occupied = 2 };

class OccupancyGrid {
 public:
  explicit OccupancyGrid(const Geometry& geo) : state_(geo), sticky_(geo) {}

  /// Cells true in `prior` start occupied and stay that way.
  OccupancyGrid(const Geometry& geo, const BinaryMask& prior) : OccupancyGrid(geo) {
    require_same_geometry(prior.geometry(), geo, "occupancy prior");
    for (std::size_t i = 0; i < geo.size(); ++i)
      if (prior.at_index(i)) {
        sticky_.at_index(i) = true;
        state_.at_index(i) = std::uint8_t(CellState::Occupied);
      }
  }

  const Geometry& geometry() const { return state_.geometry(); }
  bool contains(CellIndex c) const { return state_.contains(c); }
  CellState state(CellIndex c) const { return CellState(state_[c]); }
  CellState state_at_index(std::size_t i) const { return CellState(state_.at_index(i)); }
  bool occupied(CellIndex c) const { return !contains(c) || state(c) == CellState::Occupied; }
  bool sticky(CellIndex c) const { return sticky_[c]; }

  void set(CellIndex c, CellState s) {
    if (!contains(c) || sticky_[c]) return;
    state_[c] = std::uint8_t(s);
  }

  BinaryMask occupied_mask() const {
    BinaryMask m(geometry());
    for (std::size_t i = 0; i < m.size(); ++i) m.at_index(i) = state_.at_index(i) == std::uint8_t(CellState::Occupied);
    return m;
  }

  std::size_t count(CellState s) const {
    std::size_t n = 0;
    for (auto v : state_.values()) n += v == std::uint8_t(s);
    return n;
  }

  friend bool operator==(const OccupancyGrid& a, const OccupancyGrid& b) {
    return a.state_ == b.state_ && a.sticky_ == b.sticky_;
  }

 private:
  Grid<std::uint8_t> state_;
  BinaryMask sticky_;
};

/// Cells a ray crosses before its hit become free; the cell just past the hit
/// distance becomes occupied. Max-range rays free everything they cross.
inline void update_occupancy(OccupancyGrid& grid, const DepthObservation& depth, const Pose& pose) {
  const Geometry& geo = grid.geometry();
  constexpr double kEps = 1e-6;
  for (const auto& ray : depth.rays) {
    double angle = pose.heading + ray.bearing;
    std::optional<CellIndex> hit_cell;
    if (ray.hit) hit_cell = geo.cell(advance(pose.position, angle, ray.range + kEps));
    double len = ray.hit ? ray.range : std::min(ray.range, depth.max_range);
    traverse_segment(geo, pose.position, angle, len, [&](CellIndex c, double t) {
      if (!geo.contains(c)) return false;
      if (hit_cell && c == *hit_cell) return false;
      if (ray.hit && t >= ray.range - kEps) return false;
      grid.set(c, CellState::Free);
      return true;
    });
    if (hit_cell) grid.set(*hit_cell, CellState::Occupied);
  }
}

}  // namespace navkit
