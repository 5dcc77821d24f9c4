#pragma once

// Waypoint following: occupancy updates, periodic A*, and VFH control.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "navkit/occupancy.hpp"
#include "navkit/planning.hpp"
#include "navkit/simulator.hpp"
#include "navkit/vfh.hpp"

namespace navkit {

struct NavConfig {
  int replan_interval = 10;  // T_replan, steps
  double waypoint_distance = 1.0;  // d0
  double prox1 = 1.5;
  double prox2 = 0.75;
  double final_stop_radius = 0.5;
  PlannerConfig planner;
  VfhConfig vfh;
};

struct StepRecord {
  int step = 0;
  Pose pose;  // after the action
  DiscreteAction action = DiscreteAction::Stop;
  bool replanned = false;
};

inline std::string to_jsonl(const StepRecord& r) {
  nlohmann::json j{{"step", r.step},
                   {"x", r.pose.position.x},
                   {"y", r.pose.position.y},
                   {"heading", r.pose.heading},
                   {"action", to_string(r.action)},
                   {"replanned", r.replanned}};
  return j.dump();
}

/// The simulator, the agent's occupancy map, and the step log for one episode.
class Agent {
 public:
  Agent(Simulator& sim, OccupancyGrid grid) : sim_(&sim), grid_(std::move(grid)) {
    update_occupancy(grid_, sim_->observe(), sim_->pose());
  }

  Simulator& sim() { return *sim_; }
  const Simulator& sim() const { return *sim_; }
  const OccupancyGrid& grid() const { return grid_; }
  const Pose& pose() const { return sim_->pose(); }
  const std::vector<StepRecord>& log() const { return log_; }

  /// Steps left before the one reserved for stop.
  int budget() const { return std::max(0, sim_->remaining() - 1); }
  bool stopped() const { return sim_->stopped(); }
  bool done() const { return sim_->done(); }

  void act(DiscreteAction a, bool replanned = false) {
    StepResult r = sim_->step(a);
    if (a != DiscreteAction::Stop) update_occupancy(grid_, r.observation, r.pose);
    log_.push_back({r.step_count, r.pose, a, replanned});
  }

  /// Issues the episode's single stop unless the episode has already ended.
  void stop() {
    if (!sim_->done()) act(DiscreteAction::Stop);
  }

 private:
  Simulator* sim_;
  OccupancyGrid grid_;
  std::vector<StepRecord> log_;
};

struct DriveResult {
  bool reached = false;
  int steps = 0;
  int replans = 0;
};

/// Moves toward `goal` until within `radius`, `max_steps` actions are spent,
/// or the budget runs out. `after_step` may end the drive early by returning true.
inline DriveResult drive_to(Agent& agent, WorldPoint goal, double radius, int max_steps, const NavConfig& cfg,
                            const std::function<bool()>& after_step = {}) {
  DriveResult out;
  const Geometry& g = agent.grid().geometry();
  std::optional<Path> path;
  int since_plan = std::numeric_limits<int>::max() / 2;
  std::optional<WorldPoint> waypoint;
  while (true) {
    // an unreachable goal counts as reached once its relocated stand-in is
    WorldPoint target = safety_relocate(goal, agent.grid());
    WorldPoint here = agent.pose().position;
    if (distance(here, goal) <= radius || distance(here, target) <= radius) {
      out.reached = true;
      return out;
    }
    if (agent.budget() <= 0 || out.steps >= max_steps) return out;

    bool replan = !path || since_plan >= cfg.replan_interval ||
                  (waypoint && agent.grid().occupied(g.cell(*waypoint)));
    if (replan) {
      ++out.replans;
      since_plan = 0;
      try {
        path = plan_astar(agent.grid(), g.cell(agent.pose().position), g.cell(target), clearance_field(agent.grid()),
                          cfg.planner);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoPath) throw;
        path.reset();
      }
    }
    if (path) {
      std::size_t from = nearest_path_index(*path, agent.pose().position, g);
      waypoint = safety_relocate(select_waypoint(*path, cfg.waypoint_distance, g, from), agent.grid());
    } else {
      waypoint = target;
    }
    agent.act(vfh_step(agent.grid(), agent.pose(), *waypoint, cfg.vfh), replan);
    ++out.steps;
    ++since_plan;
    if (!path) since_plan = cfg.replan_interval;  // keep retrying after NoPath
    if (after_step && after_step()) return out;
  }
}

/// Follows the map toward p_global until within prox1 or out of budget.
inline DriveResult navigate_to(Agent& agent, WorldPoint p_global, const NavConfig& cfg) {
  return drive_to(agent, p_global, cfg.prox1, std::numeric_limits<int>::max(), cfg);
}

}  // namespace navkit
