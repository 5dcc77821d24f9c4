#pragma once

// Target confirmation near p_global: detection, back-projection, final approach.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/localnav.hpp"
#include "navkit/raycast.hpp"
#include "navkit/simulator.hpp"

namespace navkit {

struct Detection {
  std::string category;
  double confidence = 0.0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  // row-major, 1 = target pixel
  std::string instance_id;

  bool at(int row, int col) const { return mask[std::size_t(row) * width + col] != 0; }
  std::size_t pixel_count() const {
    std::size_t n = 0;
    for (auto v : mask) n += v;
    return n;
  }
};

/// Detector plug point. Implementations must be safe to call concurrently.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::optional<Detection> detect(const SimFrame& frame, const GoalSpec& goal) const = 0;
};

struct OracleDetectorConfig {
  double range = 3.0;
};

/// Ground truth stand-in: a goal instance is seen when its centre is in range,
/// inside the horizontal field of view, has wall-free line of sight, and is the
/// first surface hit in at least one image column.
inline std::optional<Detection> oracle_detect(const SimFrame& frame, const GoalSpec& goal,
                                              const OracleDetectorConfig& cfg = {}) {
  if (!frame.world) return std::nullopt;
  const Simulator& sim = *frame.world;
  const auto& in = frame.intrinsics;
  std::optional<Detection> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& inst : sim.scenario().instances) {
    if (!matches_goal(inst, goal)) continue;
    WorldPoint c = inst.center();
    double d = distance(frame.pose.position, c);
    if (d > cfg.range || d >= best_d) continue;
    if (d > 0.0 && angle_diff(bearing_to(frame.pose.position, c), frame.pose.heading) > in.hfov / 2.0) continue;
    if (!line_of_sight(sim.walls(), frame.pose.position, c)) continue;

    Detection det{inst.category, 1.0, in.width, in.height,
                  std::vector<std::uint8_t>(std::size_t(in.width) * in.height, 0), inst.id};
    for (int u = 0; u < in.width; ++u) {
      double angle = frame.pose.heading + in.column_bearing(u);
      auto mine = sim.instance_hit(inst, frame.pose.position, angle, in.max_depth);
      if (!mine) continue;
      auto wall = raycast(sim.walls(), frame.pose.position, angle, in.max_depth);
      if (wall && *wall < *mine) continue;
      bool first = true;
      for (const auto& other : sim.scenario().instances) {
        if (&other == &inst) continue;
        auto t = sim.instance_hit(other, frame.pose.position, angle, in.max_depth);
        if (t && *t < *mine) first = false;
      }
      if (!first) continue;
      for (int v = 0; v < in.height; ++v) det.mask[std::size_t(v) * in.width + u] = 1;
    }
    if (det.pixel_count() == 0) continue;
    best = std::move(det);
    best_d = d;
  }
  return best;
}

class OracleDetector : public Detector {
 public:
  explicit OracleDetector(OracleDetectorConfig cfg = {}) : cfg_(cfg) {}
  std::optional<Detection> detect(const SimFrame& frame, const GoalSpec& goal) const override {
    return oracle_detect(frame, goal, cfg_);
  }

 private:
  OracleDetectorConfig cfg_;
};

/// Back-projects masked pixels with valid depth and returns their ground-plane centroid.
inline WorldPoint localize_3d(const Detection& det, const DepthImage& depth, const CameraIntrinsics& intr,
                              const Pose& pose) {
  if (det.pixel_count() == 0) throw Error(ErrorCode::EmptyMask, "detection mask is empty");
  if (det.width != depth.width || det.height != depth.height)
    throw Error(ErrorCode::InvalidArgument, "mask and depth sizes differ");
  const double f = intr.focal();
  const double ch = std::cos(pose.heading), sh = std::sin(pose.heading);
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int v = 0; v < det.height; ++v)
    for (int u = 0; u < det.width; ++u) {
      if (!det.at(v, u)) continue;
      double z = depth.at(v, u);
      if (!(z > 0.0) || !std::isfinite(z) || z > intr.max_depth) continue;
      double right = z * ((u + 0.5) - intr.width / 2.0) / f;
      sx += pose.position.x + z * ch + right * sh;
      sy += pose.position.y + z * sh - right * ch;
      ++n;
    }
  if (n == 0) throw Error(ErrorCode::AllDepthInvalid, "no valid depth under the mask");
  return {sx / double(n), sy / double(n)};
}

struct Sighting {
  Detection detection;
  SimFrame frame;
};

struct VerifyConfig {
  double confidence_threshold = 0.5;
  int approach_guard = 40;  // max steps spent closing from prox1 to prox2
  int final_guard = 60;     // max steps spent on the final approach
};

inline std::optional<Sighting> look(const Agent& agent, const Detector& detector, const GoalSpec& goal,
                                    const VerifyConfig& cfg) {
  SimFrame f = agent.sim().frame();
  auto det = detector.detect(f, goal);
  if (det && det->confidence >= cfg.confidence_threshold && det->pixel_count() > 0)
    return Sighting{std::move(*det), std::move(f)};
  return std::nullopt;
}

/// Detects at the current heading, then after each of up to `turns` left turns.
inline std::optional<Sighting> scan_360(Agent& agent, const Detector& detector, const GoalSpec& goal,
                                        const VerifyConfig& cfg = {}, int turns = 12) {
  if (auto s = look(agent, detector, goal, cfg)) return s;
  for (int i = 0; i < turns && agent.budget() > 0; ++i) {
    agent.act(DiscreteAction::TurnLeft);
    if (auto s = look(agent, detector, goal, cfg)) return s;
  }
  return std::nullopt;
}

enum class VerifyOutcome { Confirmed, NotFound };

struct FinalStatus {
  VerifyOutcome outcome = VerifyOutcome::NotFound;
  std::optional<WorldPoint> target;  // localized centroid
  int scans = 0;
  bool stopped = false;
};

/// Scan at prox1; otherwise close in on p_global looking every step, and scan
/// again at prox2. A sighting is localized and approached to the stop radius.
/// Always ends with the episode's stop.
inline FinalStatus verify_and_approach(Agent& agent, WorldPoint p_global, const GoalSpec& goal,
                                       const Detector& detector, const NavConfig& nav, const VerifyConfig& cfg = {}) {
  FinalStatus st;
  std::optional<Sighting> seen = scan_360(agent, detector, goal, cfg);
  ++st.scans;
  if (!seen) {
    drive_to(agent, p_global, nav.prox2, cfg.approach_guard, nav, [&] {
      seen = look(agent, detector, goal, cfg);
      return seen.has_value();
    });
    if (!seen) {
      seen = scan_360(agent, detector, goal, cfg);
      ++st.scans;
    }
  }
  if (seen) {
    try {
      WorldPoint c = localize_3d(seen->detection, seen->frame.depth, seen->frame.intrinsics, seen->frame.pose);
      st.target = c;
      st.outcome = VerifyOutcome::Confirmed;
      drive_to(agent, c, nav.final_stop_radius, cfg.final_guard, nav);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyMask && e.code() != ErrorCode::AllDepthInvalid) throw;
    }
  }
  agent.stop();
  st.stopped = agent.stopped();
  return st;
}

}  // namespace navkit
