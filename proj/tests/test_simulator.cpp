#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "navkit/simulator.hpp"
#include "oracles.hpp"

using namespace navkit;

namespace {

constexpr double kPi = std::numbers::pi;

// Writes the map and returns the JSON for a loadable scenario in dir.
nlohmann::json write_scenario(const std::filesystem::path& dir) {
  auto b = fixture::two_rooms();
  write_file(dir / "m.pgm", encode_pgm8(b.map()));
  return nlohmann::json::parse(R"({
    "map": "m.pgm", "resolution": 0.05, "origin": [0, 0], "wall_polarity": "high",
    "start": {"x": 1.0, "y": 1.0, "heading_deg": 90},
    "goal": {"kind": "object_category", "text": "bed"},
    "instances": [{"id": "b1", "category": "bed", "point": [6, 2]},
                  {"id": "t1", "category": "table", "polygon": [[1, 3], [2, 3], [2, 3.5]]}],
    "success_radius": 1.0, "max_steps": 50})");
}

ErrorCode load_error(const std::filesystem::path& dir, const nlohmann::json& j) {
  write_file(dir / "s.json", j.dump());
  try {
    load_scenario(dir / "s.json");
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;  // sentinel for "did not throw"
}

}  // namespace

TEST(LoadScenario, ReadsAllFields) {
  auto dir = fixture::temp_dir("load_ok");
  auto j = write_scenario(dir);
  write_file(dir / "ep1.json", j.dump());
  Scenario s = load_scenario(dir / "ep1.json");
  EXPECT_EQ(s.id, "ep1");
  EXPECT_EQ(s.map.width(), 160);
  EXPECT_NEAR(s.start.heading, kPi / 2, 1e-12);
  ASSERT_EQ(s.instances.size(), 2u);
  EXPECT_EQ(s.instances[1].polygon.size(), 3u);
  EXPECT_EQ(s.max_steps, 50);
  auto targets = goal_instances(s);
  ASSERT_EQ(targets.size(), 1u);
  EXPECT_EQ(targets[0]->id, "b1");
  // save and reload keeps everything
  write_file(dir / "ep2.json", scenario_to_json(s).dump());
  Scenario t = load_scenario(dir / "ep2.json");
  EXPECT_EQ(scenario_to_json(t), scenario_to_json(s));
}

TEST(LoadScenario, ErrorCodes) {
  auto dir = fixture::temp_dir("load_err");
  auto base = write_scenario(dir);
  auto j = base;
  j.erase("goal");
  EXPECT_EQ(load_error(dir, j), ErrorCode::SchemaError);
  j = base;
  j["resolution"] = 0;
  EXPECT_EQ(load_error(dir, j), ErrorCode::BadMetadata);
  j = base;
  j["start"]["x"] = 0.02;
  EXPECT_EQ(load_error(dir, j), ErrorCode::StartInWall);
  j = base;
  j["wall_polarity"] = "sideways";
  EXPECT_EQ(load_error(dir, j), ErrorCode::SchemaError);
  j = base;
  j["max_steps"] = 2.5;
  EXPECT_EQ(load_error(dir, j), ErrorCode::SchemaError);
  j = base;
  j["instances"][0].erase("point");
  EXPECT_EQ(load_error(dir, j), ErrorCode::SchemaError);
  j = base;
  j["goal"]["kind"] = "instance_image";
  EXPECT_EQ(load_error(dir, j), ErrorCode::SchemaError);
  j = base;
  j["map"] = "missing.pgm";
  EXPECT_EQ(load_error(dir, j), ErrorCode::IoError);
  write_file(dir / "bad.json", std::string("{not json"));
  EXPECT_THROW(load_scenario(dir / "bad.json"), Error);
}

TEST(Step, ForwardTurnStopAndBudget) {
  auto b = fixture::one_room();
  Scenario s = fixture::scenario(b.map(), {{1.0, 1.0}, 0.0}, fixture::object_goal("bed"), {}, 5);
  Simulator sim(s);
  auto r = sim.step(DiscreteAction::MoveForward);
  EXPECT_TRUE(r.moved);
  EXPECT_NEAR(sim.pose().position.x, 1.25, 1e-12);
  EXPECT_EQ(r.step_count, 1);
  sim.step(DiscreteAction::TurnLeft);
  EXPECT_NEAR(sim.pose().heading, kPi / 6, 1e-12);
  sim.step(DiscreteAction::TurnRight);
  sim.step(DiscreteAction::TurnRight);
  EXPECT_NEAR(sim.pose().heading, -kPi / 6, 1e-12);
  EXPECT_EQ(sim.remaining(), 1);
  sim.step(DiscreteAction::Stop);
  EXPECT_TRUE(sim.done());
  EXPECT_TRUE(sim.stopped());
  try {
    sim.step(DiscreteAction::MoveForward);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EpisodeOver);
  }
  EXPECT_DOUBLE_EQ(sim.executed_length(), 0.25);
  EXPECT_EQ(sim.trajectory().size(), 2u);
}

TEST(Step, BudgetExhaustionEndsEpisode) {
  auto b = fixture::one_room();
  Scenario s = fixture::scenario(b.map(), {{1.0, 1.0}, 0.0}, fixture::object_goal("bed"), {}, 3);
  Simulator sim(s);
  for (int i = 0; i < 3; ++i) sim.step(DiscreteAction::TurnLeft);
  EXPECT_TRUE(sim.done());
  EXPECT_FALSE(sim.stopped());
  EXPECT_THROW(sim.step(DiscreteAction::Stop), Error);
}

TEST(Step, CollisionLeavesPoseAndCounts) {
  auto b = fixture::one_room();
  // 0.2 m from the east wall face at x = 4.9
  Scenario s = fixture::scenario(b.map(), {{4.7, 2.0}, 0.0});
  Simulator sim(s);
  auto r = sim.step(DiscreteAction::MoveForward);
  EXPECT_FALSE(r.moved);
  EXPECT_EQ(sim.pose().position, (WorldPoint{4.7, 2.0}));
  EXPECT_EQ(sim.collisions(), 1);
  EXPECT_EQ(sim.steps(), 1);
}

TEST(Simulator, StartInWallRaises) {
  auto b = fixture::one_room();
  Scenario s = fixture::scenario(b.map(), {{0.02, 0.02}, 0.0});
  EXPECT_THROW(Simulator{s}, Error);
}

TEST(RenderDepth, CornerFixtureMatchesAnalyticWalls) {
  // Room interior is [0.1, 4.9] x [0.1, 3.9]; rays checked against the four faces.
  auto b = fixture::one_room();
  const double faces[4][4] = {{0.1, 0.1, 4.9, 0.1}, {4.9, 0.1, 4.9, 3.9}, {4.9, 3.9, 0.1, 3.9}, {0.1, 3.9, 0.1, 0.1}};
  for (Pose pose : {Pose{{1.0, 1.0}, -3 * kPi / 4}, Pose{{4.3, 3.2}, kPi / 4}, Pose{{0.6, 3.5}, 2.0},
                    Pose{{2.5, 2.0}, 0.3}}) {
    Scenario s = fixture::scenario(b.map(), pose);
    Simulator sim(s);
    auto obs = sim.render_depth(pose);
    ASSERT_EQ(obs.rays.size(), 128u);
    for (const auto& ray : obs.rays) {
      double a = pose.heading + ray.bearing, want = std::numeric_limits<double>::infinity();
      for (auto& f : faces)
        want = std::min(want, oracle::ray_segment(pose.position.x, pose.position.y, a, f[0], f[1], f[2], f[3]));
      if (want <= 5.0) {
        ASSERT_TRUE(ray.hit);
        EXPECT_NEAR(ray.range, want, 0.05 / 2);
      } else {
        EXPECT_FALSE(ray.hit);
        EXPECT_EQ(ray.range, 5.0);
      }
    }
    EXPECT_NEAR(obs.rays.front().bearing, kPi / 4 - kPi / 512, 1e-12);
    EXPECT_NEAR(obs.rays.back().bearing, -kPi / 4 + kPi / 512, 1e-12);
  }
}

TEST(Frame, DepthIsZAlongOpticalAxis) {
  auto b = fixture::one_room();
  Scenario s = fixture::scenario(b.map(), {{2.9, 2.0}, 0.0});
  Simulator sim(s);
  SimFrame f = sim.frame();
  // the east face is perpendicular to the optical axis, so every column that
  // reaches it sees z = 2.0; the outermost columns meet the side walls first
  for (int u = 0; u < f.intrinsics.width; ++u) {
    double b = f.intrinsics.column_bearing(u);
    if (2.0 * std::abs(std::tan(b)) < 1.9) {
      EXPECT_NEAR(f.depth.at(0, u), 2.0, 1e-9);
    } else {
      EXPECT_NEAR(f.depth.at(0, u), 1.9 / std::abs(std::tan(b)), 1e-9);
    }
  }
  EXPECT_GT(f.depth.at(0, 64), 0.0);
}

TEST(Frame, PointInstancesOcclude) {
  auto b = fixture::one_room();
  std::vector<Instance> inst{fixture::point_instance("m", "mug", {3.0, 2.0})};
  Scenario s = fixture::scenario(b.map(), {{1.0, 2.0}, 0.0}, fixture::object_goal("mug"), inst);
  Simulator sim(s);
  SimFrame f = sim.frame();
  EXPECT_NEAR(f.depth.at(0, 64), 2.0 - 0.15, 0.01);
  // column 0 looks left past the mug onto the north face at y = 3.9
  EXPECT_NEAR(f.depth.at(0, 0), 1.9 / std::tan(f.intrinsics.column_bearing(0)), 1e-9);
}

TEST(CameraIntrinsics, ColumnBearingsAreSymmetric) {
  CameraIntrinsics in;
  EXPECT_NEAR(in.focal(), 64.0, 1e-12);
  EXPECT_NEAR(in.column_bearing(0), -in.column_bearing(127), 1e-12);
  EXPECT_GT(in.column_bearing(0), 0.0);  // leftmost column looks left
  EXPECT_NEAR(in.column_bearing(0), std::atan(63.5 / 64.0), 1e-12);
}

TEST(Success, RadiusStopAndBudget) {
  auto b = fixture::one_room();
  std::vector<Instance> inst{fixture::point_instance("b", "bed", {3.0, 2.0})};
  Scenario s = fixture::scenario(b.map(), {{1.0, 1.0}, 0.0}, fixture::object_goal("bed"), inst, 100);
  EXPECT_TRUE(check_success({{2.1, 2.0}, 0.0}, s, true, 10));
  EXPECT_TRUE(check_success({{2.0, 2.0}, 0.0}, s, true, 100));
  EXPECT_FALSE(check_success({{1.9, 2.0}, 0.0}, s, true, 10));
  EXPECT_FALSE(check_success({{2.5, 2.0}, 0.0}, s, false, 10));
  EXPECT_FALSE(check_success({{2.5, 2.0}, 0.0}, s, true, 101));
  s.goal = fixture::object_goal("sofa");
  EXPECT_FALSE(check_success({{3.0, 2.0}, 0.0}, s, true, 10));
}

TEST(Footprint, PolygonDistance) {
  Instance in;
  in.polygon = {{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  EXPECT_EQ(footprint_distance(in, {1, 0.5}), 0.0);
  EXPECT_NEAR(footprint_distance(in, {3, 0.5}), 1.0, 1e-12);
  EXPECT_NEAR(footprint_distance(in, {3, 2}), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(in.center(), (WorldPoint{1.0, 0.5}));
}

TEST(Geodesic, MatchesBruteForceDijkstra) {
  fixture::MapBuilder b(8.0, 4.0, 0.2);
  b.border(0.2).wall(3.8, 0, 4.2, 4.0).clear(3.8, 1.4, 4.2, 2.6);
  BinaryMask walls = b.walls();
  const Geometry& g = walls.geometry();
  Instance target = fixture::point_instance("t", "bed", {6.5, 3.0});
  for (WorldPoint from : {WorldPoint{1.1, 1.1}, WorldPoint{6.1, 0.5}, WorldPoint{3.3, 3.5}}) {
    double got = geodesic_distance(walls, from, {&target}, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c)
        if (!walls(r, c) && footprint_distance(target, g.world({r, c})) <= 1.0)
          best = std::min(best, oracle::dijkstra_cost(walls, g.cell(from), {r, c}) * g.resolution);
    EXPECT_NEAR(got, best, 1e-9);
  }
  EXPECT_EQ(geodesic_distance(walls, {6.5, 3.0}, {&target}, 1.0), 0.0);
}

TEST(Geodesic, UnreachableIsInfinite) {
  auto b = fixture::two_rooms();
  b.wall(3.95, 1.5, 4.05, 2.5);
  Instance target = fixture::point_instance("t", "bed", {6.5, 2.0});
  EXPECT_TRUE(std::isinf(geodesic_distance(b.walls(), {1.0, 1.0}, {&target}, 1.0)));
  EXPECT_TRUE(std::isinf(geodesic_distance(b.walls(), {1.0, 1.0}, {}, 1.0)));
}
