#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "navkit/rooms.hpp"
#include "oracles.hpp"

using namespace navkit;

namespace {

void expect_partition(const RoomSegmentation& seg, const BinaryMask& walls) {
  for (std::size_t i = 0; i < walls.size(); ++i) {
    int l = seg.labels.at_index(i);
    if (walls.at_index(i)) {
      EXPECT_EQ(l, 0);
    } else {
      EXPECT_GE(l, 1);
    }
    EXPECT_LE(l, seg.count());
  }
  for (int k = 0; k < seg.count(); ++k) {
    EXPECT_EQ(seg.regions[std::size_t(k)].id, k + 1);
    EXPECT_GT(seg.regions[std::size_t(k)].area, 0u);
  }
}

}  // namespace

TEST(SegmentRooms, SingleRoom) {
  auto b = fixture::one_room();
  BinaryMask walls = b.walls();
  RoomSegmentation seg = segment_rooms(walls);
  EXPECT_EQ(seg.count(), 1);
  expect_partition(seg, walls);
}

TEST(SegmentRooms, TwoRoomsSplitAtDoor) {
  auto b = fixture::two_rooms();
  BinaryMask walls = b.walls();
  RoomSegmentation seg = segment_rooms(walls);
  ASSERT_EQ(seg.count(), 2);
  expect_partition(seg, walls);
  int left = room_at(seg, {2.0, 2.0}), right = room_at(seg, {6.0, 2.0});
  EXPECT_NE(left, right);
  EXPECT_EQ(room_at(seg, {0.5, 0.5}), left);
  EXPECT_EQ(room_at(seg, {7.5, 3.5}), right);
}

TEST(SegmentRooms, ThreeRoomsInARow) {
  auto b = fixture::three_rooms();
  BinaryMask walls = b.walls();
  RoomSegmentation seg = segment_rooms(walls);
  ASSERT_EQ(seg.count(), 3);
  expect_partition(seg, walls);
  std::set<int> ids{room_at(seg, {2, 2}), room_at(seg, {6, 2}), room_at(seg, {10, 2})};
  EXPECT_EQ(ids.size(), 3u);
}

TEST(SegmentRooms, SmallClosetMergesIntoNeighbour) {
  auto b = fixture::two_rooms_with_closet();
  BinaryMask walls = b.walls();
  RoomSegmentation seg = segment_rooms(walls);
  ASSERT_EQ(seg.count(), 2);
  expect_partition(seg, walls);
  EXPECT_EQ(room_at(seg, {0.6, 3.4}), room_at(seg, {2.0, 1.0}));
}

TEST(SegmentRooms, AllWallsRaises) {
  BinaryMask walls(Geometry{4, 4, 0.05, {}}, true);
  try {
    segment_rooms(walls);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoWalkableSpace);
  }
}

TEST(SegmentRooms, RegionStatsMatchLabels) {
  auto b = fixture::three_rooms();
  RoomSegmentation seg = segment_rooms(b.walls());
  for (const auto& reg : seg.regions) {
    std::size_t area = 0;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < seg.labels.size(); ++i)
      if (seg.labels.at_index(i) == reg.id) {
        ++area;
        WorldPoint p = seg.labels.geometry().world(seg.labels.geometry().cell_at(i));
        sx += p.x;
        sy += p.y;
      }
    EXPECT_EQ(area, reg.area);
    EXPECT_NEAR(sx / area, reg.centroid.x, 1e-9);
    EXPECT_NEAR(sy / area, reg.centroid.y, 1e-9);
  }
}

TEST(RoomAt, WallPointFallsToNearestRoom) {
  auto b = fixture::two_rooms();
  RoomSegmentation seg = segment_rooms(b.walls());
  EXPECT_EQ(room_at(seg, {3.97, 0.5}), room_at(seg, {3.5, 0.5}));
  EXPECT_EQ(room_at(seg, {-10, -10}), room_at(seg, {0.3, 0.3}));
}

TEST(Watershed, PartitionsDomainAndKeepsMarkers) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    BinaryMask obstacles = oracle::random_mask(24, 20, 0.15, rng);
    obstacles(0, 0) = true;
    BinaryMask domain = invert(obstacles);
    DistanceField topo = edt(obstacles);
    LabelGrid markers(domain.geometry(), 0);
    std::uniform_int_distribution<int> row(0, 19), col(0, 23);
    for (int k = 2; k <= 4; ++k) {
      CellIndex c{row(rng), col(rng)};
      if (domain[c]) markers[c] = k;
    }
    LabelGrid out = watershed(topo, markers, domain);
    int ncomp = 0;
    auto comp = oracle::flood_components(domain, &ncomp);
    std::set<int> marked_comps;
    for (std::size_t i = 0; i < markers.size(); ++i)
      if (markers.at_index(i) > 0 && domain.at_index(i)) marked_comps.insert(comp[i]);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (markers.at_index(i) > 0) {
        ASSERT_EQ(out.at_index(i), markers.at_index(i));
      }
      if (!domain.at_index(i)) {
        if (markers.at_index(i) == 0) {
          ASSERT_EQ(out.at_index(i), 0);
        }
        continue;
      }
      // every domain cell reachable from a marker gets labeled
      ASSERT_EQ(out.at_index(i) > 0, marked_comps.count(comp[i]) > 0);
    }
    // every label region is 8-connected and contains its marker
    for (int k = 2; k <= 4; ++k) {
      BinaryMask region(domain.geometry());
      bool has = false;
      for (std::size_t i = 0; i < out.size(); ++i) {
        region.at_index(i) = out.at_index(i) == k;
        has |= out.at_index(i) == k;
      }
      if (!has) continue;
      int n = 0;
      oracle::flood_components(region, &n);
      EXPECT_EQ(n, 1) << "label " << k << " trial " << trial;
    }
  }
}

TEST(Watershed, NoMarkersRaises) {
  Geometry g{5, 5, 1.0, {}};
  try {
    watershed(DistanceField(g, 1.0), LabelGrid(g, 0), BinaryMask(g, true));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoMarkers);
  }
}

TEST(Watershed, FloodsFromHighestDistanceFirst) {
  // Distance peaks at both ends with a valley in the middle: each peak
  // takes its own side and the tied valley cell goes to the lower label.
  Geometry g{9, 1, 1.0, {}};
  DistanceField topo(g);
  for (int c = 0; c < 9; ++c) topo(0, c) = std::abs(c - 4);
  LabelGrid m(g, 0);
  m(0, 0) = 2;
  m(0, 8) = 3;
  LabelGrid out = watershed(topo, m, BinaryMask(g, true));
  for (int c = 0; c <= 4; ++c) EXPECT_EQ(out(0, c), 2);
  for (int c = 5; c < 9; ++c) EXPECT_EQ(out(0, c), 3);
}

TEST(MergeSmallRooms, AbsorbsIntoLongestSharedBoundary) {
  Geometry g{10, 4, 1.0, {}};
  LabelGrid l(g, 0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 10; ++c) l(r, c) = c < 4 ? 1 : (c < 9 ? 2 : 3);
  LabelGrid out = merge_small_rooms(l, 5);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(out(r, 9), out(r, 5));
  std::set<int> ids(out.values().begin(), out.values().end());
  EXPECT_EQ(ids.size(), 2u);
}
