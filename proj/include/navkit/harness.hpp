#pragma once

// Episode runner, metrics, and batch orchestration.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "navkit/config.hpp"
#include "navkit/localnav.hpp"
#include "navkit/nodes.hpp"
#include "navkit/reasoning.hpp"
#include "navkit/render.hpp"
#include "navkit/rooms.hpp"
#include "navkit/simulator.hpp"
#include "navkit/verification.hpp"

namespace navkit {

struct EpisodeResult {
  std::string scenario_id;
  GoalKind goal_kind = GoalKind::ObjectCategory;
  bool success = false;
  bool stopped = false;
  int steps = 0;
  int collisions = 0;
  double executed_length = 0.0;
  double optimal_length = 0.0;
  double spl = 0.0;
  double spl_raw = 0.0;  // unclamped ratio, 0 on failure
  bool excluded = false;  // target unreachable from the start
  std::optional<GlobalTarget> target;
  std::optional<WorldPoint> localized;
  std::string error;
  std::vector<std::string> warnings;
  double seconds = 0.0;
  std::vector<StepRecord> log;
};

inline std::string_view table_label(GoalKind k) {
  switch (k) {
    case GoalKind::ObjectCategory: return "ObjNav";
    case GoalKind::InstanceImage: return "ImgNav";
    case GoalKind::TextDescription: return "TextNav";
  }
  return "ObjNav";
}

/// Per-episode SPL: optimal / executed for successes, clamped to 1; 0 otherwise.
inline double episode_spl(bool success, double optimal, double executed, double* raw = nullptr) {
  double r = 0.0;
  if (success) r = executed > 0.0 ? optimal / executed : (optimal <= 0.0 ? 1.0 : 0.0);
  if (raw) *raw = r;
  return std::min(1.0, r);
}

struct Metrics {
  std::size_t count = 0;
  std::size_t successes = 0;
  double sr = 0.0;   // percent
  double spl = 0.0;  // percent
};

/// Excluded episodes do not count. Throws EmptyBatch when nothing is left.
inline Metrics compute_metrics(const std::vector<EpisodeResult>& results) {
  Metrics m;
  double spl_sum = 0.0;
  for (const auto& r : results) {
    if (r.excluded) continue;
    ++m.count;
    m.successes += r.success;
    spl_sum += r.success ? r.spl : 0.0;
  }
  if (m.count == 0) throw Error(ErrorCode::EmptyBatch, "no episodes to score");
  m.sr = 100.0 * double(m.successes) / double(m.count);
  m.spl = 100.0 * spl_sum / double(m.count);
  return m;
}

/// Builds the reasoning backend(s) for one episode. Ground truth is only
/// consulted by the scripted backends.
struct BackendSet {
  std::unique_ptr<ReasoningBackend> single, unit_a, unit_b, discriminator;
};

using BackendFactory = std::function<BackendSet(const RunConfig&, const GroundTruth&)>;

inline BackendSet default_backends(const RunConfig& cfg, const GroundTruth& truth) {
  BackendSet s;
  auto make = [&](const std::string& model) -> std::unique_ptr<ReasoningBackend> {
    switch (cfg.backend) {
      case BackendKind::Oracle: return std::make_unique<OracleBackend>(truth, false);
      case BackendKind::Adversarial: return std::make_unique<OracleBackend>(truth, true);
      case BackendKind::Http: {
        HttpBackendConfig h = cfg.http;
        if (!model.empty()) h.model = model;
        return std::make_unique<HttpChatBackend>(h);
      }
    }
    return nullptr;
  };
  if (cfg.ensemble) {
    s.unit_a = make(cfg.ensemble_model_a);
    s.unit_b = make(cfg.ensemble_model_b);
    s.discriminator = make(cfg.discriminator_model);
  } else {
    s.single = make("");
  }
  return s;
}

inline std::unique_ptr<Detector> make_detector(const RunConfig& cfg) {
  if (cfg.detector == "oracle") return std::make_unique<OracleDetector>(cfg.detection);
  throw Error(ErrorCode::InvalidArgument, "unknown detector: " + cfg.detector);
}

/// Matching instance with the shortest walkable route from the start.
inline const Instance* nearest_goal_instance(const Scenario& s, const BinaryMask& walls) {
  const Instance* best = nullptr;
  double bd = std::numeric_limits<double>::infinity();
  for (const Instance* in : goal_instances(s)) {
    double d = geodesic_distance(walls, s.start.position, {in}, s.success_radius);
    if (!best || d < bd) {
      best = in;
      bd = d;
    }
  }
  return best;
}

struct EpisodeArtifacts {
  std::optional<RoomSegmentation> seg;
  std::optional<NodeSet> nodes;
  std::vector<PromptMessage> prompts;
};

namespace detail {

inline bool geodesic_success(const Simulator& sim, const Scenario& s) {
  if (!sim.stopped() || sim.steps() > s.max_steps) return false;
  // walkable route to the footprint itself, within one cell
  double reach = sim.walls().resolution() * std::numbers::sqrt2 / 2.0;
  return geodesic_distance(sim.walls(), sim.pose().position, goal_instances(s), reach) <= s.success_radius;
}

}  // namespace detail

/// Full pipeline for one scenario. Module errors end the episode as a failure
/// with the error recorded; they never propagate.
inline EpisodeResult run_episode(const Scenario& s, const RunConfig& cfg, const BackendFactory& factory = default_backends,
                                 EpisodeArtifacts* artifacts = nullptr) {
  auto t0 = std::chrono::steady_clock::now();
  EpisodeResult res;
  res.scenario_id = s.id;
  res.goal_kind = s.goal.kind;
  std::optional<Simulator> sim;
  std::optional<Agent> agent;
  try {
    BinaryMask walls = extract_wall_mask(s.map, cfg.wall_threshold, s.polarity);
    res.optimal_length = geodesic_distance(walls, s.start.position, goal_instances(s), s.success_radius);
    if (!std::isfinite(res.optimal_length)) {
      res.excluded = true;
      res.warnings.push_back("target unreachable from start; episode excluded from metrics");
    }

    RoomSegmentation seg = segment_rooms(walls, cfg.segmentation);
    NodeSet nodes = assign_regions(sample_nodes(invert(walls), cfg.sampling), seg);
    if (artifacts) {
      artifacts->seg = seg;
      artifacts->nodes = nodes;
    }

    GroundTruth truth{s.start.position, &seg, &nodes, cfg.reasoning.seed};
    if (const Instance* gi = nearest_goal_instance(s, walls)) truth.target = gi->center();
    BackendSet backends = factory(cfg, truth);
    GlobalTarget target;
    if (cfg.ensemble) {
      target = ensemble_select(*backends.unit_a, *backends.unit_b, *backends.discriminator, s.map, seg, nodes, s.goal,
                               cfg.reasoning)
                   .chosen;
    } else {
      target = reason_global(*backends.single, s.map, seg, nodes, s.goal, cfg.reasoning);
    }
    res.target = target;

    sim.emplace(s, cfg.sensors, cfg.wall_threshold);
    agent.emplace(*sim, OccupancyGrid(s.map.geometry(), walls));
    auto detector = make_detector(cfg);
    DriveResult nav = navigate_to(*agent, target.point, cfg.nav);
    if (nav.reached) {
      FinalStatus fs = verify_and_approach(*agent, target.point, s.goal, *detector, cfg.nav, cfg.verify);
      res.localized = fs.target;
    }
    agent->stop();
  } catch (const std::exception& e) {
    res.error = e.what();
    if (const auto* ne = dynamic_cast<const Error*>(&e)) res.error = std::string(to_string(ne->code())) + ": " + e.what();
    if (agent) agent->stop();
  }

  if (sim) {
    res.stopped = sim->stopped();
    res.steps = sim->steps();
    res.collisions = sim->collisions();
    res.executed_length = sim->executed_length();
    bool ok = cfg.success_metric == SuccessMetric::Euclidean
                  ? check_success(sim->pose(), s, sim->stopped(), sim->steps())
                  : detail::geodesic_success(*sim, s);
    res.success = ok && res.error.empty();
  }
  if (agent) res.log = agent->log();
  res.spl = episode_spl(res.success && !res.excluded, res.optimal_length, res.executed_length, &res.spl_raw);
  if (res.spl_raw > cfg.spl_warn_ratio) {
    std::ostringstream w;
    w << "SPL ratio " << res.spl_raw << " exceeds " << cfg.spl_warn_ratio << "; optimal-path oracle suspect";
    res.warnings.push_back(w.str());
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline nlohmann::json to_json(const EpisodeResult& r, bool with_timing = true) {
  nlohmann::json j{{"scenario", r.scenario_id},
                   {"goal_kind", to_string(r.goal_kind)},
                   {"success", r.success},
                   {"stopped", r.stopped},
                   {"steps", r.steps},
                   {"collisions", r.collisions},
                   {"executed_length", r.executed_length},
                   {"optimal_length", std::isfinite(r.optimal_length) ? nlohmann::json(r.optimal_length) : nlohmann::json()},
                   {"spl", r.spl},
                   {"spl_raw", r.spl_raw},
                   {"excluded", r.excluded}};
  if (r.target) {
    j["target"] = {{"x", r.target->point.x},
                   {"y", r.target->point.y},
                   {"room", r.target->room},
                   {"node", r.target->node},
                   {"provenance", r.target->provenance}};
  }
  if (r.localized) j["localized"] = {r.localized->x, r.localized->y};
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  if (with_timing) j["seconds"] = r.seconds;
  return j;
}

inline std::string trajectory_jsonl(const EpisodeResult& r) {
  std::string out;
  for (const auto& rec : r.log) out += to_jsonl(rec) + "\n";
  return out;
}

inline nlohmann::json metrics_json(const Metrics& m) {
  return {{"episodes", m.count}, {"successes", m.successes}, {"sr", m.sr}, {"spl", m.spl}};
}

/// Overall and per-goal-kind metrics. Contains nothing that depends on timing or parallelism.
inline nlohmann::json summary_json(const std::vector<EpisodeResult>& results) {
  nlohmann::json j = metrics_json(compute_metrics(results));
  j["errors"] = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.error.empty(); });
  j["excluded"] = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.excluded; });
  std::map<std::string, std::vector<EpisodeResult>> groups;
  for (const auto& r : results) groups[std::string(table_label(r.goal_kind))].push_back(r);
  j["by_kind"] = nlohmann::json::object();
  for (const auto& [k, v] : groups) {
    try {
      j["by_kind"][k] = metrics_json(compute_metrics(v));
    } catch (const Error&) {
      j["by_kind"][k] = {{"episodes", 0}};
    }
  }
  return j;
}

inline std::string metrics_table(const std::vector<EpisodeResult>& results) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "task" << std::right << std::setw(6) << "n" << std::setw(9) << "SR" << std::setw(9)
     << "SPL" << "\n";
  auto row = [&](const std::string& name, const std::vector<EpisodeResult>& rs) {
    Metrics m = compute_metrics(rs);
    os << std::left << std::setw(10) << name << std::right << std::setw(6) << m.count << std::fixed
       << std::setprecision(1) << std::setw(9) << m.sr << std::setw(9) << m.spl << "\n";
  };
  for (GoalKind k : {GoalKind::ObjectCategory, GoalKind::InstanceImage, GoalKind::TextDescription}) {
    std::vector<EpisodeResult> rs;
    for (const auto& r : results)
      if (r.goal_kind == k && !r.excluded) rs.push_back(r);
    if (!rs.empty()) row(std::string(table_label(k)), rs);
  }
  row("all", results);
  return os.str();
}

inline std::vector<std::filesystem::path> list_scenarios(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct BatchOptions {
  std::optional<std::filesystem::path> out_dir;
  bool dump_artifacts = false;
};

inline void write_artifacts(const std::filesystem::path& dir, const Scenario& s, const EpisodeResult& r,
                     const EpisodeArtifacts& a);

/// Runs every scenario in the directory on up to cfg.jobs threads. Results come
/// back in scenario-path order regardless of scheduling.
inline std::vector<EpisodeResult> run_batch(const std::filesystem::path& dir, const RunConfig& cfg,
                                            const BatchOptions& opt = {},
                                            const BackendFactory& factory = default_backends) {
  auto paths = list_scenarios(dir);
  if (paths.empty()) throw Error(ErrorCode::EmptyBatch, "no scenario files in " + dir.string());
  std::vector<EpisodeResult> results(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < paths.size(); i = next++) {
      EpisodeResult r;
      try {
        Scenario s = load_scenario(paths[i], cfg.wall_threshold);
        EpisodeArtifacts art;
        r = run_episode(s, cfg, factory, opt.dump_artifacts ? &art : nullptr);
        if (opt.out_dir && opt.dump_artifacts) write_artifacts(*opt.out_dir / "artifacts" / s.id, s, r, art);
      } catch (const std::exception& e) {
        r.scenario_id = paths[i].stem().string();
        r.error = e.what();
      }
      results[i] = std::move(r);
    }
  };
  int n = std::max(1, std::min<int>(cfg.jobs, int(paths.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (opt.out_dir) {
    std::string lines;
    for (const auto& r : results) {
      lines += to_json(r).dump() + "\n";
      write_file(*opt.out_dir / "trajectories" / (r.scenario_id + ".jsonl"), trajectory_jsonl(r));
    }
    write_file(*opt.out_dir / "results.jsonl", lines);
    write_file(*opt.out_dir / "summary.json", summary_json(results).dump(2) + "\n");
    write_file(*opt.out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  }
  return results;
}

inline void write_artifacts(const std::filesystem::path& dir, const Scenario& s, const EpisodeResult& r,
                            const EpisodeArtifacts& a) {
  std::vector<WorldPoint> path{s.start.position};
  for (const auto& rec : r.log) path.push_back(rec.pose.position);
  WorldPoint target = r.target ? r.target->point : s.start.position;
  if (a.seg) {
    write_file(dir / "labels.pgm", encode_pgm16(a.seg->labels));
    write_file(dir / "rooms.png", encode_png(render_room_map(s.map, *a.seg)));
  }
  write_file(dir / "overlay.png", encode_png(render_overlay(s.map, a.seg ? &*a.seg : nullptr,
                                                            a.nodes ? &*a.nodes : nullptr, path,
                                                            r.target ? &target : nullptr)));
  if (a.nodes) {
    nlohmann::json nj = nlohmann::json::array();
    for (const auto& n : a.nodes->nodes) nj.push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}, {"room", n.region}});
    write_file(dir / "nodes.json", nj.dump(2) + "\n");
  }
  write_file(dir / "trajectory.jsonl", trajectory_jsonl(r));
  write_file(dir / "result.json", to_json(r).dump(2) + "\n");
}

}  // namespace navkit
