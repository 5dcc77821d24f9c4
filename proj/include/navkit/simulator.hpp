#pragma once

// Deterministic grid-world episode environment.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navkit/error.hpp"
#include "navkit/gridmap.hpp"
#include "navkit/image_io.hpp"
#include "navkit/prompts.hpp"
#include "navkit/raycast.hpp"

namespace navkit {

enum class DiscreteAction { MoveForward, TurnLeft, TurnRight, Stop };

inline std::string_view to_string(DiscreteAction a) {
  switch (a) {
    case DiscreteAction::MoveForward: return "move_forward";
    case DiscreteAction::TurnLeft: return "turn_left";
    case DiscreteAction::TurnRight: return "turn_right";
    case DiscreteAction::Stop: return "stop";
  }
  return "stop";
}

struct Instance {
  std::string id;
  std::string category;
  std::string description;
  std::string image;
  std::optional<WorldPoint> point;
  std::vector<WorldPoint> polygon;

  /// Point instance or polygon vertex mean.
  WorldPoint center() const {
    if (point) return *point;
    WorldPoint c{};
    for (auto p : polygon) c = {c.x + p.x, c.y + p.y};
    return {c.x / double(polygon.size()), c.y / double(polygon.size())};
  }
};

struct Scenario {
  std::string id;
  std::string map_path;  // as written in the file
  MapMeta meta;
  WallPolarity polarity = WallPolarity::High;
  GridMap map;
  Pose start;
  GoalSpec goal;
  std::vector<Instance> instances;
  double success_radius = 1.0;
  int max_steps = 500;
};

inline bool matches_goal(const Instance& inst, const GoalSpec& goal) {
  switch (goal.kind) {
    case GoalKind::ObjectCategory: return inst.category == goal.text;
    case GoalKind::TextDescription: return !inst.description.empty() && inst.description == goal.text;
    case GoalKind::InstanceImage: return !goal.image_path.empty() && inst.image == goal.image_path;
  }
  return false;
}

inline std::vector<const Instance*> goal_instances(const Scenario& s) {
  std::vector<const Instance*> out;
  for (const auto& i : s.instances)
    if (matches_goal(i, s.goal)) out.push_back(&i);
  return out;
}

namespace detail {

inline bool point_in_polygon(WorldPoint p, const std::vector<WorldPoint>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto &a = poly[i], &b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

inline double segment_distance(WorldPoint p, WorldPoint a, WorldPoint b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0) : 0.0;
  return distance(p, {a.x + t * vx, a.y + t * vy});
}

}  // namespace detail

/// Euclidean distance to the nearest point of an instance footprint (0 inside a polygon).
inline double footprint_distance(const Instance& inst, WorldPoint p) {
  if (inst.point) return distance(p, *inst.point);
  if (inst.polygon.size() >= 3 && detail::point_in_polygon(p, inst.polygon)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inst.polygon.size(); ++i)
    best = std::min(best, detail::segment_distance(p, inst.polygon[i], inst.polygon[(i + 1) % inst.polygon.size()]));
  return best;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::SchemaError, std::string("missing field: ") + key);
  return j.at(key);
}

inline double number(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_number()) throw Error(ErrorCode::SchemaError, std::string("field must be a number: ") + key);
  return v.get<double>();
}

inline std::string string_field(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorCode::SchemaError, std::string("field must be a string: ") + key);
}

inline WorldPoint xy(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorCode::SchemaError, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Builds a Scenario from its JSON form. Relative map/image paths resolve against base_dir.
inline Scenario scenario_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                   int wall_threshold = 128) {
  using namespace detail;
  Scenario s;
  s.map_path = string_field(j, "map");
  s.meta.resolution = number(j, "resolution");
  s.meta.origin = xy(require(j, "origin"));
  std::string pol = string_field(j, "wall_polarity");
  if (pol != "high" && pol != "low") throw Error(ErrorCode::SchemaError, "wall_polarity must be high|low");
  s.polarity = pol == "high" ? WallPolarity::High : WallPolarity::Low;

  const auto& st = require(j, "start");
  s.start.position = {number(st, "x"), number(st, "y")};
  s.start.heading = normalize_angle(deg2rad(number(st, "heading_deg")));

  const auto& g = require(j, "goal");
  s.goal.kind = parse_goal_kind(string_field(g, "kind"));
  s.goal.text = g.contains("text") ? string_field(g, "text") : "";
  if (g.contains("image")) s.goal.image_path = string_field(g, "image");

  const auto& insts = require(j, "instances");
  if (!insts.is_array()) throw Error(ErrorCode::SchemaError, "instances must be an array");
  for (const auto& ij : insts) {
    Instance in;
    in.id = string_field(ij, "id");
    in.category = string_field(ij, "category");
    if (ij.contains("description")) in.description = string_field(ij, "description");
    if (ij.contains("image")) in.image = string_field(ij, "image");
    if (ij.contains("point")) in.point = xy(ij.at("point"));
    if (ij.contains("polygon")) {
      if (!ij.at("polygon").is_array()) throw Error(ErrorCode::SchemaError, "polygon must be an array");
      for (const auto& p : ij.at("polygon")) in.polygon.push_back(xy(p));
      if (in.polygon.size() < 3) throw Error(ErrorCode::SchemaError, "polygon needs >= 3 vertices");
    }
    if (!in.point && in.polygon.empty()) throw Error(ErrorCode::SchemaError, "instance needs point or polygon");
    s.instances.push_back(std::move(in));
  }
  s.success_radius = number(j, "success_radius");
  double ms = number(j, "max_steps");
  if (!(s.success_radius > 0.0)) throw Error(ErrorCode::SchemaError, "success_radius must be > 0");
  if (ms < 1 || ms != std::floor(ms)) throw Error(ErrorCode::SchemaError, "max_steps must be a positive integer");
  s.max_steps = int(ms);

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  if (!(s.meta.resolution > 0.0)) throw Error(ErrorCode::BadMetadata, "resolution must be > 0");
  s.map = load_map(read_file(resolve(s.map_path)), s.meta);
  if (!s.goal.image_path.empty()) {
    auto bytes = read_file(resolve(s.goal.image_path));
    s.goal.image = decode_png_rgb(bytes);
  }
  s.goal.validate();

  BinaryMask walls = extract_wall_mask(s.map, wall_threshold, s.polarity);
  CellIndex sc = s.map.geometry().cell(s.start.position);
  if (!walls.contains(sc) || walls[sc]) throw Error(ErrorCode::StartInWall, "start pose is not on walkable ground");
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path, int wall_threshold = 128) {
  auto bytes = read_file(path);
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "scenario is not valid JSON: " + path.string());
  Scenario s = scenario_from_json(j, path.parent_path(), wall_threshold);
  s.id = path.stem().string();
  return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["map"] = s.map_path;
  j["resolution"] = s.meta.resolution;
  j["origin"] = {s.meta.origin.x, s.meta.origin.y};
  j["wall_polarity"] = s.polarity == WallPolarity::High ? "high" : "low";
  j["start"] = {{"x", s.start.position.x}, {"y", s.start.position.y}, {"heading_deg", rad2deg(s.start.heading)}};
  j["goal"] = {{"kind", to_string(s.goal.kind)}, {"text", s.goal.text}};
  if (!s.goal.image_path.empty()) j["goal"]["image"] = s.goal.image_path;
  j["instances"] = nlohmann::json::array();
  for (const auto& in : s.instances) {
    nlohmann::json ij{{"id", in.id}, {"category", in.category}};
    if (!in.description.empty()) ij["description"] = in.description;
    if (!in.image.empty()) ij["image"] = in.image;
    if (in.point) ij["point"] = {in.point->x, in.point->y};
    if (!in.polygon.empty()) {
      ij["polygon"] = nlohmann::json::array();
      for (auto p : in.polygon) ij["polygon"].push_back({p.x, p.y});
    }
    j["instances"].push_back(ij);
  }
  j["success_radius"] = s.success_radius;
  j["max_steps"] = s.max_steps;
  return j;
}

struct DepthRay {
  double bearing = 0.0;  // relative to heading, positive = left
  double range = 0.0;
  bool hit = false;
};

struct DepthObservation {
  std::vector<DepthRay> rays;
  double fov = 0.0;
  double max_range = 0.0;
};

struct CameraIntrinsics {
  double hfov = std::numbers::pi / 2.0;
  int width = 128;
  int height = 1;
  double max_depth = 5.0;

  double focal() const { return (width / 2.0) / std::tan(hfov / 2.0); }
  /// Bearing (positive = left) of the ray through the centre of pixel column u.
  double column_bearing(int u) const { return std::atan((width / 2.0 - (u + 0.5)) / focal()); }
};

/// Row-major z-depth image in meters; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> z;

  double at(int row, int col) const { return z[std::size_t(row) * width + col]; }
};

struct SensorConfig {
  double fov = std::numbers::pi / 2.0;
  int rays = 128;
  double max_range = 5.0;
  double step_length = 0.25;
  double turn_angle = std::numbers::pi / 6.0;
  CameraIntrinsics camera;
  double point_instance_radius = 0.15;  // visual extent of point instances
};

class Simulator;

/// Everything a detector may look at for one camera view.
struct SimFrame {
  Pose pose;
  CameraIntrinsics intrinsics;
  DepthImage depth;
  const Simulator* world = nullptr;
};

struct StepResult {
  Pose pose;
  DepthObservation observation;
  int step_count = 0;
  bool moved = false;
};

class Simulator {
 public:
  Simulator(const Scenario& scenario, const SensorConfig& sensors = {}, int wall_threshold = 128)
      : scenario_(&scenario),
        sensors_(sensors),
        walls_(extract_wall_mask(scenario.map, wall_threshold, scenario.polarity)),
        pose_{scenario.start.position, normalize_angle(scenario.start.heading)} {
    CellIndex c = walls_.geometry().cell(pose_.position);
    if (!walls_.contains(c) || walls_[c]) throw Error(ErrorCode::StartInWall, "start pose is not on walkable ground");
  }

  const Scenario& scenario() const { return *scenario_; }
  const SensorConfig& sensors() const { return sensors_; }
  const BinaryMask& walls() const { return walls_; }
  const Pose& pose() const { return pose_; }
  int steps() const { return steps_; }
  int max_steps() const { return scenario_->max_steps; }
  int remaining() const { return std::max(0, max_steps() - steps_); }
  bool done() const { return stopped_ || steps_ >= max_steps(); }
  bool stopped() const { return stopped_; }
  double executed_length() const { return sensors_.step_length * double(forward_moves_); }
  int forward_moves() const { return forward_moves_; }
  int collisions() const { return collisions_; }
  const std::vector<WorldPoint>& trajectory() const { return trajectory_; }

  DepthObservation render_depth(const Pose& pose) const {
    DepthObservation obs{{}, sensors_.fov, sensors_.max_range};
    obs.rays.reserve(std::size_t(sensors_.rays));
    for (int i = 0; i < sensors_.rays; ++i) {
      double bearing = sensors_.fov / 2.0 - (i + 0.5) * sensors_.fov / sensors_.rays;
      auto hit = raycast(walls_, pose.position, pose.heading + bearing, sensors_.max_range);
      obs.rays.push_back({bearing, hit ? std::max(*hit, 1e-9) : sensors_.max_range, hit.has_value()});
    }
    return obs;
  }

  DepthObservation observe() const { return render_depth(pose_); }

  /// Distance along a ray to the entry of an instance footprint, if any.
  std::optional<double> instance_hit(const Instance& inst, WorldPoint from, double angle, double max_range) const {
    const double dx = std::cos(angle), dy = std::sin(angle);
    if (inst.point) {
      double r = sensors_.point_instance_radius;
      double fx = from.x - inst.point->x, fy = from.y - inst.point->y;
      double b = fx * dx + fy * dy, c = fx * fx + fy * fy - r * r;
      double disc = b * b - c;
      if (disc < 0) return std::nullopt;
      double t = -b - std::sqrt(disc);
      if (t < 0) t = c <= 0 ? 0.0 : -b + std::sqrt(disc);
      if (t < 0 || t > max_range) return std::nullopt;
      return t;
    }
    if (detail::point_in_polygon(from, inst.polygon)) return 0.0;
    std::optional<double> best;
    for (std::size_t i = 0; i < inst.polygon.size(); ++i) {
      WorldPoint a = inst.polygon[i], b = inst.polygon[(i + 1) % inst.polygon.size()];
      double ex = b.x - a.x, ey = b.y - a.y;
      double den = dx * ey - dy * ex;
      if (std::abs(den) < 1e-12) continue;
      double t = ((a.x - from.x) * ey - (a.y - from.y) * ex) / den;
      double s = ((a.x - from.x) * dy - (a.y - from.y) * dx) / den;
      if (t >= 0 && s >= 0 && s <= 1 && t <= max_range && (!best || t < *best)) best = t;
    }
    return best;
  }

  /// Camera view at the current pose: walls and instance footprints both occlude.
  SimFrame frame() const { return frame_at(pose_); }

  SimFrame frame_at(const Pose& pose) const {
    const CameraIntrinsics& in = sensors_.camera;
    SimFrame f{pose, in, {in.width, in.height, std::vector<double>(std::size_t(in.width) * in.height, 0.0)}, this};
    for (int u = 0; u < in.width; ++u) {
      double b = in.column_bearing(u);
      double angle = pose.heading + b;
      auto wall = raycast(walls_, pose.position, angle, in.max_depth);
      double t = wall ? *wall : std::numeric_limits<double>::infinity();
      for (const auto& inst : scenario_->instances)
        if (auto ti = instance_hit(inst, pose.position, angle, in.max_depth); ti && *ti < t) t = *ti;
      double z = std::isfinite(t) ? t * std::cos(b) : 0.0;
      for (int v = 0; v < in.height; ++v) f.depth.z[std::size_t(v) * in.width + u] = z;
    }
    return f;
  }

  StepResult step(DiscreteAction action) {
    if (done()) throw Error(ErrorCode::EpisodeOver, "episode already terminated");
    ++steps_;
    bool moved = false;
    switch (action) {
      case DiscreteAction::MoveForward: {
        WorldPoint dest = advance(pose_.position, pose_.heading, sensors_.step_length);
        CellIndex c = walls_.geometry().cell(dest);
        if (walls_.contains(c) && !walls_[c]) {
          pose_.position = dest;
          moved = true;
          ++forward_moves_;
          trajectory_.push_back(dest);
        } else {
          ++collisions_;
        }
        break;
      }
      case DiscreteAction::TurnLeft: pose_.heading = normalize_angle(pose_.heading + sensors_.turn_angle); break;
      case DiscreteAction::TurnRight: pose_.heading = normalize_angle(pose_.heading - sensors_.turn_angle); break;
      case DiscreteAction::Stop: stopped_ = true; break;
    }
    return {pose_, observe(), steps_, moved};
  }

 private:
  const Scenario* scenario_;
  SensorConfig sensors_;
  BinaryMask walls_;
  Pose pose_;
  int steps_ = 0;
  int forward_moves_ = 0;
  int collisions_ = 0;
  bool stopped_ = false;
  std::vector<WorldPoint> trajectory_{scenario_->start.position};
};

/// Success rule: stopped within the step budget and within radius of a matching instance.
inline bool check_success(const Pose& final_pose, const Scenario& scenario, bool stopped, int steps) {
  if (!stopped || steps > scenario.max_steps) return false;
  for (const Instance* inst : goal_instances(scenario))
    if (footprint_distance(*inst, final_pose.position) <= scenario.success_radius) return true;
  return false;
}

/// Shortest 8-connected walkable path (meters) from `from` to any walkable
/// cell within `radius` of a target footprint. Diagonal moves may not cut
/// wall corners. Infinity when unreachable.
inline double geodesic_distance(const BinaryMask& walls, WorldPoint from, const std::vector<const Instance*>& targets,
                                double radius) {
  const Geometry& geo = walls.geometry();
  CellIndex s = geo.cell(from);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!walls.contains(s) || walls[s] || targets.empty()) return inf;
  std::vector<double> dist(geo.size(), inf);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[geo.index(s)] = 0.0;
  pq.emplace(0.0, geo.index(s));
  auto in_goal = [&](CellIndex c) {
    WorldPoint p = geo.world(c);
    for (const Instance* t : targets)
      if (footprint_distance(*t, p) <= radius) return true;
    return false;
  };
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d > dist[i]) continue;
    CellIndex c = geo.cell_at(i);
    if (in_goal(c)) return d * geo.resolution;
    for (int k = 0; k < 8; ++k) {
      CellIndex n{c.row + kDy8[k], c.col + kDx8[k]};
      if (!walls.contains(n) || walls[n]) continue;
      bool diag = kDx8[k] != 0 && kDy8[k] != 0;
      if (diag && (walls(c.row, n.col) || walls(n.row, c.col))) continue;
      double nd = d + (diag ? std::numbers::sqrt2 : 1.0);
      if (nd < dist[geo.index(n)]) {
        dist[geo.index(n)] = nd;
        pq.emplace(nd, geo.index(n));
      }
    }
  }
  return inf;
}

}  // namespace navkit
