#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "navkit/harness.hpp"
#include "navkit/procgen.hpp"

using namespace navkit;
namespace fs = std::filesystem;

namespace {

EpisodeResult result(bool success, double optimal, double executed, bool excluded = false) {
  EpisodeResult r;
  r.success = success;
  r.optimal_length = optimal;
  r.executed_length = executed;
  r.excluded = excluded;
  r.spl = episode_spl(success, optimal, executed, &r.spl_raw);
  return r;
}

class ThrowingBackend : public ReasoningBackend {
 public:
  std::string query(const std::vector<PromptMessage>&) override { throw Error(ErrorCode::BackendError, "offline"); }
  std::string name() const override { return "throwing"; }
};

int count_stops(const EpisodeResult& r) {
  int n = 0;
  for (const auto& rec : r.log) n += rec.action == DiscreteAction::Stop;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("navkit_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

RunConfig oracle_config() {
  RunConfig c;
  sync_derived(c);
  return c;
}

}  // namespace

TEST(Metrics, SplIsShortestOverExecuted) {
  EXPECT_DOUBLE_EQ(episode_spl(true, 10.0, 20.0), 0.5);
  EXPECT_DOUBLE_EQ(episode_spl(false, 10.0, 20.0), 0.0);
  double raw = 0;
  EXPECT_DOUBLE_EQ(episode_spl(true, 10.0, 9.0, &raw), 1.0);
  EXPECT_NEAR(raw, 10.0 / 9.0, 1e-12);
  EXPECT_DOUBLE_EQ(episode_spl(true, 0.0, 0.0), 1.0);
}

TEST(Metrics, AggregatesInPercent) {
  std::vector<EpisodeResult> rs{result(true, 10, 20), result(true, 5, 5), result(false, 3, 30)};
  Metrics m = compute_metrics(rs);
  EXPECT_EQ(m.count, 3u);
  EXPECT_EQ(m.successes, 2u);
  EXPECT_NEAR(m.sr, 66.67, 0.01);
  EXPECT_NEAR(m.spl, 50.0, 1e-9);
}

TEST(Metrics, ExcludedEpisodesDoNotCountAndEmptyRaises) {
  std::vector<EpisodeResult> rs{result(true, 4, 8), result(false, 0, 3, true)};
  Metrics m = compute_metrics(rs);
  EXPECT_EQ(m.count, 1u);
  EXPECT_DOUBLE_EQ(m.sr, 100.0);
  try {
    compute_metrics({result(false, 0, 1, true)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBatch);
  }
  EXPECT_THROW(compute_metrics({}), Error);
}

TEST(Metrics, SummaryGroupsByGoalKind) {
  std::vector<EpisodeResult> rs{result(true, 4, 8), result(false, 4, 8)};
  rs[1].goal_kind = GoalKind::TextDescription;
  auto j = summary_json(rs);
  EXPECT_EQ(j["episodes"], 2);
  EXPECT_EQ(j["by_kind"].size(), 2u);
  EXPECT_NE(metrics_table(rs).find("all"), std::string::npos);
}

TEST(RunEpisode, OracleSucceedsOnGeneratedScenes) {
  RunConfig cfg = oracle_config();
  for (int k = 0; k < 3; ++k) {
    Scenario s = generate_scenario(42 + std::uint64_t(k), k).scenario;
    EpisodeResult r = run_episode(s, cfg);
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.success) << s.id;
    EXPECT_TRUE(r.stopped);
    EXPECT_EQ(count_stops(r), 1);
    EXPECT_LE(r.steps, s.max_steps);
    EXPECT_GT(r.spl, 0.0);
    EXPECT_LE(r.spl, 1.0);
    ASSERT_TRUE(r.target.has_value());
    EXPECT_EQ(int(r.log.size()), r.steps);
  }
}

TEST(RunEpisode, AdversarialStillStopsExactlyOnce) {
  RunConfig cfg = oracle_config();
  cfg.backend = BackendKind::Adversarial;
  for (int k = 0; k < 3; ++k) {
    Scenario s = generate_scenario(7 + std::uint64_t(k), k).scenario;
    EpisodeResult r = run_episode(s, cfg);
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_TRUE(r.stopped);
    EXPECT_EQ(count_stops(r), 1);
    EXPECT_LE(r.steps, s.max_steps);
    EXPECT_EQ(r.log.back().action, DiscreteAction::Stop);
  }
}

TEST(RunEpisode, EnsembleOfOraclesSucceeds) {
  RunConfig cfg = oracle_config();
  cfg.ensemble = true;
  Scenario s = generate_scenario(3, 0).scenario;
  EpisodeResult r = run_episode(s, cfg);
  EXPECT_TRUE(r.error.empty()) << r.error;
  EXPECT_TRUE(r.success);
}

TEST(RunEpisode, BackendErrorIsRecordedNotThrown) {
  RunConfig cfg = oracle_config();
  Scenario s = generate_scenario(5, 0).scenario;
  BackendFactory f = [](const RunConfig&, const GroundTruth&) {
    BackendSet b;
    b.single = std::make_unique<ThrowingBackend>();
    return b;
  };
  EpisodeResult r = run_episode(s, cfg, f);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.error.rfind("BackendError", 0), 0u) << r.error;
  EXPECT_DOUBLE_EQ(r.spl, 0.0);
}

TEST(RunEpisode, UnreachableTargetIsExcluded) {
  auto b = fixture::one_room();
  b.wall(2.2, 0.6, 4.8, 3.4).clear(2.3, 0.7, 4.7, 3.3);
  Scenario s = fixture::scenario(b.map(), {{1.0, 2.0}, 0.0}, fixture::object_goal("bed"),
                                 {fixture::point_instance("b", "bed", {3.5, 2.0})});
  EpisodeResult r = run_episode(s, oracle_config());
  EXPECT_TRUE(r.excluded);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_FALSE(r.success);
}

TEST(Batch, EmptyDirectoryRaises) {
  fs::path d = fresh_dir("empty");
  try {
    run_batch(d, oracle_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBatch);
  }
  fs::remove_all(d);
}

TEST(Batch, ParallelRunIsByteIdenticalToSerial) {
  fs::path scenes = fresh_dir("scenes");
  for (int k = 0; k < 6; ++k) save_generated(generate_scenario(300 + std::uint64_t(k), k), scenes);
  fs::path out1 = fresh_dir("out1"), out4 = fresh_dir("out4");
  RunConfig cfg = oracle_config();
  cfg.backend = BackendKind::Adversarial;  // longer, more varied trajectories
  run_batch(scenes, cfg, {out1});
  cfg.jobs = 4;
  auto rs = run_batch(scenes, cfg, {out4});
  ASSERT_EQ(rs.size(), 6u);
  EXPECT_EQ(slurp(out1 / "summary.json"), slurp(out4 / "summary.json"));
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(out1 / "trajectories")) {
    EXPECT_EQ(slurp(e.path()), slurp(out4 / "trajectories" / e.path().filename())) << e.path();
    EXPECT_FALSE(slurp(e.path()).empty());
    ++files;
  }
  EXPECT_EQ(files, 6u);
  for (auto d : {scenes, out1, out4}) fs::remove_all(d);
}

TEST(Batch, MissingMapBecomesErrorRow) {
  fs::path scenes = fresh_dir("broken");
  fs::path p = save_generated(generate_scenario(11, 0), scenes);
  auto j = nlohmann::json::parse(slurp(p));
  j["map"] = "missing.pgm";
  std::ofstream(scenes / "zz_broken.json") << j.dump();
  auto rs = run_batch(scenes, oracle_config());
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_TRUE(rs[0].error.empty());
  EXPECT_EQ(rs[1].scenario_id, "zz_broken");
  EXPECT_FALSE(rs[1].error.empty());
  fs::remove_all(scenes);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c = oracle_config();
  c.backend = BackendKind::Http;
  c.http.endpoint = "http://localhost:9/v1/chat/completions";
  c.nav.prox2 = 0.9;
  c.sensors.turn_angle = deg2rad(15);
  c.seed = 17;
  c.jobs = 3;
  c.success_metric = SuccessMetric::Geodesic;
  sync_derived(c);
  RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.sampling.seed, 17u);
  EXPECT_NEAR(back.nav.vfh.turn_angle, deg2rad(15), 1e-12);
}

TEST(Config, PartialJsonKeepsDefaults) {
  RunConfig c = run_config_from_json({{"prox1", 1.2}});
  EXPECT_DOUBLE_EQ(c.nav.prox1, 1.2);
  EXPECT_DOUBLE_EQ(c.nav.prox2, RunConfig{}.nav.prox2);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto code = [](const nlohmann::json& j) {
    try {
      run_config_from_json(j);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code({{"prox3", 1.0}}), ErrorCode::SchemaError);
  EXPECT_EQ(code({{"prox1", "far"}}), ErrorCode::SchemaError);
  EXPECT_EQ(code({{"jobs", 0}}), ErrorCode::SchemaError);
  EXPECT_EQ(code({{"success_metric", "manhattan"}}), ErrorCode::SchemaError);
  EXPECT_EQ(code(nlohmann::json::array()), ErrorCode::SchemaError);
  EXPECT_THROW(run_config_from_json({{"backend", "psychic"}}), Error);
}
