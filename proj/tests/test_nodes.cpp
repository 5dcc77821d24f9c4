#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "navkit/nodes.hpp"
#include "navkit/procgen.hpp"
#include "oracles.hpp"

using namespace navkit;

namespace {

// Separation, padding and maximality checked against a full scan of the mask.
void check_pds(const BinaryMask& walkable, const NodeSet& ns, const SamplingConfig& cfg) {
  const Geometry& g = walkable.geometry();
  int pad = int(std::ceil(cfg.padding / g.resolution - 1e-9));
  BinaryMask padded(g);
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      bool ok = r >= pad && c >= pad && r < g.height - pad && c < g.width - pad;
      for (int dr = -pad; ok && dr <= pad; ++dr)
        for (int dc = -pad; ok && dc <= pad; ++dc) ok = walkable(r + dr, c + dc);
      padded(r, c) = ok;
    }
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const NavNode& a = ns.nodes[i];
    ASSERT_EQ(a.id, int(i) + 1);
    ASSERT_TRUE(padded[g.cell(a.position)]) << "node " << a.id << " outside padded free space";
    for (std::size_t j = i + 1; j < ns.size(); ++j)
      ASSERT_GE(distance(a.position, ns.nodes[j].position), cfg.radius - 1e-12);
  }
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      if (!padded(r, c)) continue;
      WorldPoint p = g.world({r, c});
      bool covered = false;
      for (const auto& n : ns.nodes)
        if (distance(p, n.position) < cfg.radius) {
          covered = true;
          break;
        }
      ASSERT_TRUE(covered) << "cell " << r << "," << c << " could take another node";
    }
}

}  // namespace

TEST(SampleNodes, InvariantsOnGeneratedMaps) {
  for (int k = 0; k < 50; ++k) {
    ProcgenConfig pc;
    GeneratedScenario gen = generate_scenario(1000 + std::uint64_t(k), k, pc);
    BinaryMask walkable = invert(extract_wall_mask(gen.scenario.map, 128, gen.scenario.polarity));
    SamplingConfig cfg;
    cfg.seed = std::uint64_t(k);
    NodeSet ns = sample_nodes(walkable, cfg);
    ASSERT_FALSE(ns.empty());
    check_pds(walkable, ns, cfg);
    if (HasFatalFailure()) return;
  }
}

TEST(SampleNodes, InvariantsOnFixtureWithRadiusAndPaddingSweep) {
  auto b = fixture::three_rooms();
  BinaryMask walkable = invert(b.walls());
  for (double radius : {0.3, 0.5, 1.0})
    for (double padding : {0.0, 0.1, 0.25}) {
      SamplingConfig cfg{radius, padding, 30, 7};
      check_pds(walkable, sample_nodes(walkable, cfg), cfg);
    }
}

TEST(SampleNodes, SameSeedSameNodes) {
  auto b = fixture::two_rooms();
  BinaryMask walkable = invert(b.walls());
  SamplingConfig cfg;
  cfg.seed = 42;
  auto a = sample_nodes(walkable, cfg), c = sample_nodes(walkable, cfg);
  EXPECT_EQ(a.nodes, c.nodes);
  cfg.seed = 43;
  EXPECT_NE(sample_nodes(walkable, cfg).nodes, a.nodes);
}

TEST(SampleNodes, PaddingThatErasesEverythingRaises) {
  auto b = fixture::one_room();
  BinaryMask walkable = invert(b.walls());
  SamplingConfig cfg{0.5, 3.0, 30, 0};
  try {
    sample_nodes(walkable, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSamplableArea);
  }
}

TEST(SampleNodes, RejectsBadRadius) {
  BinaryMask walkable(Geometry{10, 10, 0.1, {}}, true);
  EXPECT_THROW(sample_nodes(walkable, {0.0, 0.0, 30, 0}), Error);
}

TEST(SampleNodes, DisconnectedComponentsEachGetNodes) {
  auto b = fixture::two_rooms();
  b.wall(3.95, 1.5, 4.05, 2.5);  // seal the door
  BinaryMask walkable = invert(b.walls());
  NodeSet ns = sample_nodes(walkable, {});
  bool left = false, right = false;
  for (const auto& n : ns.nodes) (n.position.x < 4.0 ? left : right) = true;
  EXPECT_TRUE(left);
  EXPECT_TRUE(right);
}

TEST(NodesInRoom, FiltersByRegionAndKeepsIds) {
  auto b = fixture::two_rooms();
  BinaryMask walls = b.walls();
  RoomSegmentation seg = segment_rooms(walls);
  NodeSet all = assign_regions(sample_nodes(invert(walls), {}), seg);
  int room = room_at(seg, {2, 2});
  NodeSet in = nodes_in_room(all, seg, room);
  ASSERT_FALSE(in.empty());
  for (const auto& n : in.nodes) {
    EXPECT_EQ(n.region, room);
    ASSERT_NE(all.find(n.id), nullptr);
    EXPECT_EQ(*all.find(n.id), n);
  }
}

TEST(NodesInRoom, EmptyRoomIsResampledAtHalfRadius) {
  auto b = fixture::two_rooms();
  BinaryMask walls = b.walls();
  RoomSegmentation seg = segment_rooms(walls);
  NodeSet all = assign_regions(sample_nodes(invert(walls), {}), seg);
  int room = room_at(seg, {6, 2});
  NodeSet stripped = all;
  std::erase_if(stripped.nodes, [&](const NavNode& n) { return n.region == room; });
  int max_id = 0;
  for (const auto& n : stripped.nodes) max_id = std::max(max_id, n.id);
  NodeSet re = nodes_in_room(stripped, seg, room, 3);
  ASSERT_FALSE(re.empty());
  for (const auto& n : re.nodes) {
    EXPECT_GT(n.id, max_id);
    EXPECT_EQ(seg.labels[n.cell], room);
  }
  for (std::size_t i = 0; i < re.size(); ++i)
    for (std::size_t j = i + 1; j < re.size(); ++j)
      EXPECT_GE(distance(re.nodes[i].position, re.nodes[j].position), all.radius / 2 - 1e-12);
}

TEST(NodesInRoom, TinyRoomFallsBackToCentroidCell) {
  // A 3x3-cell pocket cannot hold any padded sample, so the centroid cell is used.
  Geometry g{9, 9, 0.1, {}};
  BinaryMask walls(g, true);
  for (int r = 3; r < 6; ++r)
    for (int c = 3; c < 6; ++c) walls(r, c) = false;
  SegmentationConfig sc;
  sc.min_room_area_m2 = 0.0;
  RoomSegmentation seg = segment_rooms(walls, sc);
  ASSERT_EQ(seg.count(), 1);
  NodeSet none;
  none.radius = 0.5;
  none.padding = 0.25;
  NodeSet out = nodes_in_room(none, seg, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.nodes[0].cell, (CellIndex{4, 4}));
  EXPECT_EQ(out.nodes[0].id, 1);
}

TEST(NodesInRoom, InvalidRoomRaises) {
  auto b = fixture::one_room();
  RoomSegmentation seg = segment_rooms(b.walls());
  EXPECT_THROW(nodes_in_room({}, seg, 0), Error);
  EXPECT_THROW(nodes_in_room({}, seg, 2), Error);
}
