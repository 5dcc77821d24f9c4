#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "navkit/vfh.hpp"
#include "oracles.hpp"

using namespace navkit;

namespace {

constexpr double kPi = std::numbers::pi;

OccupancyGrid empty_grid() { return OccupancyGrid(Geometry{60, 60, 0.1, {}}); }

OccupancyGrid grid_with(const std::vector<CellIndex>& cells) {
  Geometry g{60, 60, 0.1, {}};
  BinaryMask m(g);
  for (auto c : cells) m[c] = true;
  return OccupancyGrid(g, m);
}

}  // namespace

TEST(Vfh, OpenSpaceHeadsStraightForTarget) {
  OccupancyGrid grid = empty_grid();
  Pose pose{{3.0, 3.0}, 0.0};
  EXPECT_EQ(vfh_step(grid, pose, {5.0, 3.0}), DiscreteAction::MoveForward);
  EXPECT_EQ(vfh_step(grid, pose, {3.0, 5.0}), DiscreteAction::TurnLeft);
  EXPECT_EQ(vfh_step(grid, pose, {3.0, 1.0}), DiscreteAction::TurnRight);
  // small offsets stay inside the forward lattice heading
  EXPECT_EQ(vfh_step(grid, pose, {5.0, 3.3}), DiscreteAction::MoveForward);
}

TEST(Vfh, WallAheadForcesTurn) {
  std::vector<CellIndex> wall;
  for (int r = 10; r < 50; ++r) wall.push_back({r, 33});
  OccupancyGrid grid = grid_with(wall);
  Pose pose{{3.05, 3.05}, 0.0};
  auto d = vfh_decide(grid, pose, {5.0, 3.05});
  ASSERT_TRUE(d.sector.has_value());
  EXPECT_NE(d.action, DiscreteAction::MoveForward);
}

TEST(Vfh, EnclosedRobotSpinsLeft) {
  std::vector<CellIndex> ring;
  for (int r = 26; r <= 34; ++r)
    for (int c = 26; c <= 34; ++c)
      if (r == 26 || r == 34 || c == 26 || c == 34) ring.push_back({r, c});
  OccupancyGrid grid = grid_with(ring);
  auto d = vfh_decide(grid, {{3.05, 3.05}, 0.0}, {5.0, 3.0});
  EXPECT_FALSE(d.sector.has_value());
  EXPECT_EQ(d.action, DiscreteAction::TurnLeft);
}

TEST(Vfh, HistogramIsZeroWithoutObstacles) {
  auto h = polar_histogram(empty_grid(), {3.0, 3.0}, {});
  ASSERT_EQ(h.size(), 36u);
  for (double v : h) EXPECT_EQ(v, 0.0);
}

TEST(Vfh, SingleObstacleLandsInItsSector) {
  OccupancyGrid grid = grid_with({{30, 40}});  // 1 m east of (3.05, 3.05)
  VfhConfig cfg;
  auto h = polar_histogram(grid, {3.05, 3.05}, cfg);
  double w = (1.0 - 1.0 / cfg.window_radius) * 0.1;
  // bearing 0 sits on the boundary between sectors 17 and 18
  EXPECT_NEAR(h[17], w, 1e-12);
  EXPECT_NEAR(h[18], w, 1e-12);
  EXPECT_EQ(h[0], 0.0);
  EXPECT_EQ(h[27], 0.0);
}

TEST(LatticeTurns, HalfTurnRoundsTowardCurrentHeading) {
  double t = kPi / 6;
  EXPECT_EQ(lattice_turns(0.0, 0.0, t), 0);
  EXPECT_EQ(lattice_turns(0.0, kPi / 12, t), 0);
  EXPECT_EQ(lattice_turns(0.0, -kPi / 12, t), 0);
  EXPECT_EQ(lattice_turns(0.0, kPi / 4, t), 1);
  EXPECT_EQ(lattice_turns(0.0, -kPi / 4, t), -1);
  EXPECT_EQ(lattice_turns(0.0, kPi / 2, t), 3);
  EXPECT_EQ(lattice_turns(kPi, -kPi + 0.01, t), 0);
}

TEST(StepClear, BlockedByCellOnSegment) {
  OccupancyGrid grid = grid_with({{30, 32}});
  EXPECT_FALSE(step_clear(grid, {3.05, 3.05}, 0.0, 0.25));
  EXPECT_TRUE(step_clear(grid, {3.05, 3.05}, kPi, 0.25));
  EXPECT_FALSE(step_clear(empty_grid(), {0.05, 3.0}, kPi, 0.25));  // leaving the grid
}

TEST(Vfh, DecisionIsMinimumCostAdmissibleSectorOnRandomGrids) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(1.0, 5.0), ang(-kPi, kPi);
  VfhConfig cfg;
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    BinaryMask occ = oracle::random_mask(60, 60, 0.01, rng, 0.1);
    OccupancyGrid grid(occ.geometry(), occ);
    Pose pose{{pos(rng), pos(rng)}, normalize_angle(std::round(ang(rng) / (kPi / 6)) * kPi / 6)};
    if (occ[occ.geometry().cell(pose.position)]) continue;
    WorldPoint wp{pos(rng), pos(rng)};
    const Geometry& g = occ.geometry();

    // independent histogram over every cell plus a margin outside the grid,
    // where cells count as occupied
    std::vector<double> hist(36, 0.0);
    for (int r = -20; r < 80; ++r)
      for (int c = -20; c < 80; ++c) {
        if (g.contains({r, c}) && !occ(r, c)) continue;
        WorldPoint p = g.world({r, c});
        double d = distance(pose.position, p);
        if (d >= cfg.window_radius) continue;
        double rad = cfg.safety_radius + 0.05;
        double spread = d > rad ? std::asin(rad / d) : kPi / 2;
        for (int i = 0; i < 36; ++i) {
          double centre = -kPi + (i + 0.5) * (2 * kPi / 36);
          if (angle_diff(centre, bearing_to(pose.position, p)) <= spread + kPi / 36) hist[i] += (1 - d / 1.5) * 0.1;
        }
      }
    auto dense_clear = [&](double heading) {
      for (int k = 1; k <= 2000; ++k) {
        WorldPoint q = advance(pose.position, heading, cfg.step_length * k / 2000.0);
        CellIndex c = g.cell(q);
        if (!g.contains(c) || occ[c]) return false;
      }
      return true;
    };
    double target = bearing_to(pose.position, wp);
    double best = std::numeric_limits<double>::infinity();
    std::optional<int> want;
    for (int i = 0; i < 36; ++i) {
      if (hist[i] >= cfg.density_threshold) continue;
      double a = -kPi + (i + 0.5) * (2 * kPi / 36);
      if (!dense_clear(lattice_heading(pose.heading, a, cfg.turn_angle))) continue;
      double cost = 5 * angle_diff(a, target) + 2 * angle_diff(a, pose.heading);
      if (cost < best) {
        best = cost;
        want = i;
      }
    }
    auto d = vfh_decide(grid, pose, wp, cfg);
    ASSERT_EQ(d.sector, want) << "trial " << trial;
    if (want) {
      int k = lattice_turns(pose.heading, d.bearing, cfg.turn_angle);
      DiscreteAction expect = k == 0 ? DiscreteAction::MoveForward
                                     : (k > 0 ? DiscreteAction::TurnLeft : DiscreteAction::TurnRight);
      EXPECT_EQ(d.action, expect);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}
