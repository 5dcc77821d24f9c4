#pragma once

// Seeded rooms-and-corridors apartments with furniture instances and goals.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "navkit/gridmap.hpp"
#include "navkit/image_io.hpp"
#include "navkit/render.hpp"
#include "navkit/simulator.hpp"

namespace navkit {

struct ProcgenConfig {
  double resolution = 0.1;
  double min_width = 11.0, max_width = 15.0;  // meters
  double min_height = 8.0, max_height = 11.0;
  int wall_cells = 2;
  double door_width = 1.0;
  double min_room = 2.6;      // meters, shortest room side
  double corridor_width = 1.4;
  double corridor_chance = 0.3;
  int max_rooms = 6;
  double min_start_distance = 5.0;  // geodesic meters to the success region
  std::uint8_t floor_value = 150, wall_value = 0, object_value = 215;
};

namespace detail {

struct CellBox {
  int r0, c0, r1, c1;  // half-open
  int rows() const { return r1 - r0; }
  int cols() const { return c1 - c0; }
};

struct SplitWall {
  bool vertical;  // wall occupies columns [pos, pos + thickness)
  int pos;
  int lo, hi;  // span along the wall, half-open
};

class ApartmentBuilder {
 public:
  ApartmentBuilder(const ProcgenConfig& cfg, std::mt19937_64& rng) : cfg_(cfg), rng_(rng) {}

  GridMap build(double width_m, double height_m, std::vector<CellBox>& rooms) {
    const double res = cfg_.resolution;
    int w = int(std::round(width_m / res)), h = int(std::round(height_m / res));
    GridMap map(Geometry{w, h, res, {0.0, 0.0}}, cfg_.floor_value);
    int t = cfg_.wall_cells;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (r < t || c < t || r >= h - t || c >= w - t) map(r, c) = cfg_.wall_value;
    std::vector<CellBox> todo{{t, t, h - t, w - t}};
    std::vector<SplitWall> walls;
    while (!todo.empty()) {
      // split the largest pending box first so room sizes stay balanced
      auto it = std::max_element(todo.begin(), todo.end(),
                                 [](const CellBox& a, const CellBox& b) { return a.rows() * a.cols() < b.rows() * b.cols(); });
      CellBox box = *it;
      todo.erase(it);
      if (int(rooms.size() + todo.size()) + 1 >= cfg_.max_rooms || !split(box, map, todo, walls)) rooms.push_back(box);
    }
    for (const auto& wall : walls) carve_door(map, wall);
    return map;
  }

 private:
  int cells(double m) const { return int(std::round(m / cfg_.resolution)); }

  bool split(const CellBox& b, GridMap& map, std::vector<CellBox>& todo, std::vector<SplitWall>& walls) {
    const int t = cfg_.wall_cells, min_room = cells(cfg_.min_room);
    bool vertical = b.cols() >= b.rows();
    int span = vertical ? b.cols() : b.rows();
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int first;
    if (span >= min_room + t + cells(cfg_.corridor_width) && span < 2 * min_room + t + 2 &&
        u01(rng_) < cfg_.corridor_chance) {
      first = u01(rng_) < 0.5 ? cells(cfg_.corridor_width) : span - t - cells(cfg_.corridor_width);
    } else {
      if (span < 2 * min_room + t) return false;
      std::uniform_int_distribution<int> d(min_room, span - t - min_room);
      first = d(rng_);
    }
    int pos = (vertical ? b.c0 : b.r0) + first;
    for (int r = b.r0; r < b.r1; ++r)
      for (int c = b.c0; c < b.c1; ++c) {
        int k = vertical ? c : r;
        if (k >= pos && k < pos + t) map(r, c) = cfg_.wall_value;
      }
    if (vertical) {
      todo.push_back({b.r0, b.c0, b.r1, pos});
      todo.push_back({b.r0, pos + t, b.r1, b.c1});
      walls.push_back({true, pos, b.r0, b.r1});
    } else {
      todo.push_back({b.r0, b.c0, pos, b.c1});
      todo.push_back({pos + t, b.c0, b.r1, b.c1});
      walls.push_back({false, pos, b.c0, b.c1});
    }
    return true;
  }

  // A door goes where both faces of the wall see open floor over the door
  // width plus a margin, so it never lands on a junction.
  void carve_door(GridMap& map, const SplitWall& w) {
    const int t = cfg_.wall_cells, door = cells(cfg_.door_width), margin = 3;
    auto floor_at = [&](int along, int side) {
      int r = w.vertical ? along : side, c = w.vertical ? side : along;
      return map.contains({r, c}) && map(r, c) != cfg_.wall_value;
    };
    std::vector<int> starts;
    for (int p = w.lo; p + door <= w.hi; ++p) {
      bool ok = true;
      for (int q = p - margin; q < p + door + margin && ok; ++q)
        ok = floor_at(q, w.pos - 1) && floor_at(q, w.pos + t);
      if (ok) starts.push_back(p);
    }
    if (starts.empty()) return;
    int p = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng_)];
    for (int q = p; q < p + door; ++q)
      for (int k = w.pos; k < w.pos + t; ++k) {
        int r = w.vertical ? q : k, c = w.vertical ? k : q;
        map(r, c) = cfg_.floor_value;
      }
  }

  const ProcgenConfig& cfg_;
  std::mt19937_64& rng_;
};

struct Furniture {
  const char* category;
  double half_w, half_h;  // 0 = point instance
};

inline constexpr Furniture kFurniture[] = {
    {"bed", 0.45, 0.35}, {"chair", 0, 0},        {"sofa", 0.45, 0.2}, {"toilet", 0, 0}, {"tv_monitor", 0, 0},
    {"plant", 0, 0},     {"table", 0.3, 0.3},    {"sink", 0, 0},      {"lamp", 0, 0},   {"cabinet", 0.3, 0.15},
};

inline constexpr const char* kColors[] = {"red",   "blue",  "green", "yellow", "white", "black",
                                          "grey",  "brown", "pink",  "orange", "purple", "beige"};

}  // namespace detail

struct GeneratedScenario {
  Scenario scenario;
  std::vector<std::pair<std::string, RgbImage>> images;  // relative path -> goal image
};

/// Small swatch standing in for a photo of an instance.
inline RgbImage instance_swatch(std::size_t index, const std::string& id) {
  static constexpr Rgb palette[] = {{200, 40, 40},  {40, 80, 200},  {40, 160, 60},  {220, 200, 40},
                                    {230, 230, 230}, {30, 30, 30},  {128, 128, 128}, {120, 70, 30},
                                    {230, 130, 180}, {240, 140, 20}, {120, 50, 160}, {220, 200, 160}};
  RgbImage img(48, 48, palette[index % std::size(palette)]);
  std::string digits;
  for (char c : id)
    if (c >= '0' && c <= '9') digits += c;
  draw_number(img, digits, 24, 24, {0, 0, 0}, 2);
  return img;
}

/// One scenario. Map, goal images and JSON are written by save_generated.
inline GeneratedScenario generate_scenario(std::uint64_t seed, int index, const ProcgenConfig& cfg = {}) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + std::uint64_t(index) * 0xBF58476D1CE4E5B9ull + 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    double wm = cfg.min_width + u01(rng) * (cfg.max_width - cfg.min_width);
    double hm = cfg.min_height + u01(rng) * (cfg.max_height - cfg.min_height);
    std::vector<detail::CellBox> rooms;
    detail::ApartmentBuilder builder(cfg, rng);
    GridMap map = builder.build(wm, hm, rooms);
    if (rooms.size() < 2) continue;
    const Geometry& geo = map.geometry();
    BinaryMask walls = extract_wall_mask(map, 128, WallPolarity::Low);
    DistanceField clear = edt(walls);
    auto clearance_m = [&](CellIndex c) { return clear[c] * geo.resolution; };

    GeneratedScenario out;
    Scenario& s = out.scenario;
    s.id = "scene_" + std::to_string(index);
    s.meta = {cfg.resolution, {0.0, 0.0}};
    s.polarity = WallPolarity::Low;

    std::vector<std::size_t> colour_order(std::size(detail::kColors));
    for (std::size_t i = 0; i < colour_order.size(); ++i) colour_order[i] = i;
    std::shuffle(colour_order.begin(), colour_order.end(), rng);

    std::vector<std::size_t> colour_of;
    for (const auto& room : rooms) {
      int n_obj = 1 + int(u01(rng) < 0.6);
      for (int k = 0; k < n_obj && s.instances.size() < colour_order.size(); ++k) {
        const auto& f = detail::kFurniture[std::size_t(u01(rng) * std::size(detail::kFurniture)) %
                                           std::size(detail::kFurniture)];
        double extent = std::max(f.half_w, f.half_h);
        for (int tries = 0; tries < 200; ++tries) {
          int r = room.r0 + int(u01(rng) * room.rows()), c = room.c0 + int(u01(rng) * room.cols());
          CellIndex cell{std::min(r, room.r1 - 1), std::min(c, room.c1 - 1)};
          if (clearance_m(cell) < extent + 0.45) continue;
          WorldPoint p = geo.world(cell);
          bool crowded = false;
          for (const auto& o : s.instances) crowded |= distance(o.center(), p) < 1.2;
          if (crowded) continue;
          Instance in;
          in.id = std::to_string(s.instances.size() + 1);
          in.category = f.category;
          std::size_t colour = colour_order[s.instances.size()];
          in.description = std::string("the ") + detail::kColors[colour] + " " + f.category;
          if (f.half_w == 0.0) {
            in.point = p;
          } else {
            in.polygon = {{p.x - f.half_w, p.y - f.half_h},
                          {p.x + f.half_w, p.y - f.half_h},
                          {p.x + f.half_w, p.y + f.half_h},
                          {p.x - f.half_w, p.y + f.half_h}};
          }
          s.instances.push_back(std::move(in));
          colour_of.push_back(colour);
          break;
        }
      }
    }
    if (s.instances.size() < 2) continue;

    // paint footprints; objects stay walkable (above the wall threshold)
    for (const auto& in : s.instances)
      for (int r = 0; r < geo.height; ++r)
        for (int c = 0; c < geo.width; ++c) {
          WorldPoint p = geo.world({r, c});
          if (!walls(r, c) && footprint_distance(in, p) <= (in.point ? 0.15 : 0.0)) map(r, c) = cfg.object_value;
        }

    std::size_t target = std::size_t(u01(rng) * s.instances.size()) % s.instances.size();
    const Instance& ti = s.instances[target];
    switch (index % 3) {
      case 0:
        s.goal.kind = GoalKind::ObjectCategory;
        s.goal.text = ti.category;
        break;
      case 1:
        s.goal.kind = GoalKind::InstanceImage;
        s.goal.image_path = "images/" + s.id + "_instance_" + ti.id + ".png";
        s.goal.image = instance_swatch(colour_of[target], ti.id);
        out.images.emplace_back(s.goal.image_path, *s.goal.image);
        for (auto& in : s.instances)
          if (in.id == ti.id) in.image = s.goal.image_path;
        break;
      default:
        s.goal.kind = GoalKind::TextDescription;
        s.goal.text = ti.description;
        break;
    }

    std::vector<const Instance*> goals;
    for (const auto& in : s.instances)
      if (matches_goal(in, s.goal)) goals.push_back(&in);

    std::vector<CellIndex> starts;
    for (int r = 0; r < geo.height; ++r)
      for (int c = 0; c < geo.width; ++c)
        if (!walls(r, c) && clearance_m({r, c}) >= 0.5) starts.push_back({r, c});
    std::shuffle(starts.begin(), starts.end(), rng);
    bool placed = false;
    for (std::size_t i = 0; i < starts.size() && i < 400 && !placed; ++i) {
      WorldPoint p = geo.world(starts[i]);
      double geo_d = geodesic_distance(walls, p, goals, 1.0);
      if (!std::isfinite(geo_d) || geo_d < cfg.min_start_distance) continue;
      s.start = {p, deg2rad(double(int(u01(rng) * 12) * 30))};
      placed = true;
    }
    if (!placed) continue;

    s.map = std::move(map);
    s.map_path = s.id + ".pgm";
    s.success_radius = 1.0;
    s.max_steps = 500;
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "could not generate a valid scenario");
}

/// Writes <dir>/<id>.json, <dir>/<id>.pgm and any goal images.
inline std::filesystem::path save_generated(const GeneratedScenario& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Scenario& s = g.scenario;
  write_file(dir / s.map_path, encode_pgm8(s.map));
  for (const auto& [rel, img] : g.images) write_file(dir / rel, encode_png(img));
  auto path = dir / (s.id + ".json");
  write_file(path, scenario_to_json(s).dump(2) + "\n");
  return path;
}

}  // namespace navkit
