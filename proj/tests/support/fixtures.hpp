#pragma once

// Hand-built maps and scenarios used across the test suite.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "navkit/navkit.hpp"

namespace fixture {

using namespace navkit;

/// Paints axis-aligned walls in world meters on a blank map (walls = 255).
class MapBuilder {
 public:
  MapBuilder(double width_m, double height_m, double res = 0.05)
      : map_(Geometry{int(std::lround(width_m / res)), int(std::lround(height_m / res)), res, {0.0, 0.0}}, 0) {}

  MapBuilder& wall(double x0, double y0, double x1, double y1) { return paint(x0, y0, x1, y1, 255); }
  MapBuilder& clear(double x0, double y0, double x1, double y1) { return paint(x0, y0, x1, y1, 0); }

  /// Closed outline of thickness t hugging the raster edge.
  MapBuilder& border(double t = 0.1) {
    const double w = map_.width() * map_.resolution(), h = map_.height() * map_.resolution();
    wall(0, 0, w, t);
    wall(0, h - t, w, h);
    wall(0, 0, t, h);
    wall(w - t, 0, w, h);
    return *this;
  }

  const GridMap& map() const { return map_; }
  BinaryMask walls() const { return extract_wall_mask(map_, 128, WallPolarity::High); }

 private:
  MapBuilder& paint(double x0, double y0, double x1, double y1, std::uint8_t v) {
    const Geometry& g = map_.geometry();
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c) {
        WorldPoint p = g.world({r, c});
        if (p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1) map_(r, c) = v;
      }
    return *this;
  }

  GridMap map_;
};

// Rooms are laid out along x; interior walls are 0.1 m thick with 1 m doors.

inline MapBuilder one_room() { return std::move(MapBuilder(5.0, 4.0).border()); }

inline MapBuilder two_rooms() {
  MapBuilder b(8.0, 4.0);
  b.border().wall(3.95, 0, 4.05, 4.0).clear(3.95, 1.5, 4.05, 2.5);
  return b;
}

inline MapBuilder three_rooms() {
  MapBuilder b(12.0, 4.0);
  b.border().wall(3.95, 0, 4.05, 4.0).clear(3.95, 1.5, 4.05, 2.5).wall(7.95, 0, 8.05, 4.0).clear(7.95, 1.5, 8.05, 2.5);
  return b;
}

/// Two rooms plus a closet of about 1.3 m^2 opening off the first.
inline MapBuilder two_rooms_with_closet() {
  MapBuilder b = two_rooms();
  b.wall(0, 2.7, 1.4, 2.8).wall(1.3, 2.7, 1.4, 4.0).clear(0.3, 2.7, 1.0, 2.8);
  return b;
}

inline GoalSpec object_goal(std::string category) {
  GoalSpec g;
  g.kind = GoalKind::ObjectCategory;
  g.text = std::move(category);
  return g;
}

/// Scenario over an in-memory map. Instances default to none.
inline Scenario scenario(const GridMap& map, Pose start, GoalSpec goal = object_goal("bed"), std::vector<Instance> instances = {},
                         int max_steps = 500) {
  Scenario s;
  s.id = "fixture";
  s.map_path = "fixture.pgm";
  s.meta = {map.resolution(), map.geometry().origin};
  s.polarity = WallPolarity::High;
  s.map = map;
  s.start = start;
  s.goal = std::move(goal);
  s.instances = std::move(instances);
  s.success_radius = 1.0;
  s.max_steps = max_steps;
  return s;
}

inline Instance point_instance(std::string id, std::string category, WorldPoint p, std::string description = "") {
  Instance in;
  in.id = std::move(id);
  in.category = std::move(category);
  in.description = std::move(description);
  in.point = p;
  return in;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("navkit_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string read_text(const std::filesystem::path& p) {
  auto b = read_file(p);
  return std::string(b.begin(), b.end());
}

}  // namespace fixture
