#pragma once

// Room partition: exact EDT seeds, marker-driven watershed, then absorption
// of fragments below a minimum area into their best-matching neighbour.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <tuple>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/gridmap.hpp"

namespace navkit {

struct CellRect {
  int row_min = 0, col_min = 0, row_max = -1, col_max = -1;  // inclusive

  int rows() const { return row_max - row_min + 1; }
  int cols() const { return col_max - col_min + 1; }
  bool empty() const { return row_max < row_min || col_max < col_min; }
  friend bool operator==(const CellRect&, const CellRect&) = default;
};

struct RegionInfo {
  int id = 0;
  std::size_t area = 0;  // cells
  WorldPoint centroid;
  CellRect bbox;
};

struct RoomSegmentation {
  LabelGrid labels;  // 0 on walls, 1..k on walkable cells
  std::vector<RegionInfo> regions;  // regions[i].id == i + 1

  int count() const { return int(regions.size()); }
  const RegionInfo& region(int id) const {
    if (id < 1 || id > count()) throw Error(ErrorCode::InvalidArgument, "room id out of range");
    return regions[std::size_t(id - 1)];
  }
};

/// Relabels positive labels to 1..k preserving first-seen raster order.
inline LabelGrid compact_labels(const LabelGrid& in) {
  LabelGrid out(in.geometry(), 0);
  std::map<int, int> remap;
  for (std::size_t i = 0; i < in.size(); ++i) {
    int v = in.at_index(i);
    if (v <= 0) continue;
    auto [it, inserted] = remap.try_emplace(v, int(remap.size()) + 1);
    out.at_index(i) = it->second;
  }
  return out;
}

/// Priority flood from the positive marker labels. Cells are claimed in
/// order of decreasing distance (the topography is the negated field);
/// equal heights resolve to the lower label, then insertion order.
inline LabelGrid watershed(const DistanceField& topography, const LabelGrid& markers, const BinaryMask& domain) {
  require_same_geometry(topography.geometry(), markers.geometry(), "watershed markers");
  require_same_geometry(topography.geometry(), domain.geometry(), "watershed domain");

  LabelGrid out(markers.geometry(), 0);
  bool any = false;
  for (std::size_t i = 0; i < markers.size(); ++i)
    if (markers.at_index(i) > 0 && domain.at_index(i)) {
      out.at_index(i) = markers.at_index(i);
      any = true;
    }
  if (!any) throw Error(ErrorCode::NoMarkers, "no positive marker inside the domain");

  // (elevation, label, sequence, cell index); min-heap
  using Entry = std::tuple<double, int, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  std::uint64_t seq = 0;
  const Geometry& geo = markers.geometry();
  std::vector<std::uint8_t> queued(markers.size(), 0);

  auto push_neighbours = [&](std::size_t idx, int label) {
    CellIndex c = geo.cell_at(idx);
    for (int k = 0; k < 8; ++k) {
      CellIndex n{c.row + kDy8[k], c.col + kDx8[k]};
      if (!geo.contains(n)) continue;
      std::size_t ni = geo.index(n);
      if (!domain.at_index(ni) || out.at_index(ni) != 0 || queued[ni]) continue;
      queued[ni] = 1;
      pq.emplace(-topography.at_index(ni), label, seq++, ni);
    }
  };

  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.at_index(i) > 0) push_neighbours(i, out.at_index(i));

  while (!pq.empty()) {
    auto [elev, label, s, idx] = pq.top();
    pq.pop();
    if (out.at_index(idx) != 0) continue;
    out.at_index(idx) = label;
    push_neighbours(idx, label);
  }
  return out;
}

namespace detail {

struct RegionStats {
  std::size_t area = 0;
  double sum_r = 0.0, sum_c = 0.0;
};

inline std::map<int, RegionStats> region_stats(const LabelGrid& labels) {
  std::map<int, RegionStats> st;
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c)
      if (int v = labels(r, c); v > 0) {
        auto& s = st[v];
        ++s.area;
        s.sum_r += r;
        s.sum_c += c;
      }
  return st;
}

// Number of cells of `from` with a 4-neighbour in each other region.
inline std::map<int, std::size_t> shared_boundary(const LabelGrid& labels, int from) {
  std::map<int, std::size_t> out;
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c) {
      if (labels(r, c) != from) continue;
      int seen[4];
      int nseen = 0;
      for (int k = 0; k < 4; ++k) {
        CellIndex n{r + kDy4[k], c + kDx4[k]};
        if (!labels.contains(n)) continue;
        int v = labels[n];
        if (v <= 0 || v == from || std::find(seen, seen + nseen, v) != seen + nseen) continue;
        seen[nseen++] = v;
        ++out[v];
      }
    }
  return out;
}

}  // namespace detail

/// Absorbs every region smaller than min_area into the adjacent region with
/// the highest score = shared_boundary / (1 + centroid distance in cells).
/// Smallest regions go first; isolated small regions are kept.
inline LabelGrid merge_small_rooms(const LabelGrid& labels, std::size_t min_area) {
  LabelGrid cur = labels;
  std::vector<int> isolated;
  while (true) {
    auto stats = detail::region_stats(cur);
    int victim = 0;
    std::size_t victim_area = 0;
    for (auto& [id, s] : stats) {
      if (s.area >= min_area) continue;
      if (std::find(isolated.begin(), isolated.end(), id) != isolated.end()) continue;
      if (victim == 0 || s.area < victim_area) {
        victim = id;
        victim_area = s.area;
      }
    }
    if (victim == 0) break;

    auto boundary = detail::shared_boundary(cur, victim);
    if (boundary.empty()) {
      isolated.push_back(victim);
      continue;
    }
    const auto& vs = stats[victim];
    int best = 0;
    double best_score = -1.0;
    for (auto& [other, len] : boundary) {
      const auto& os = stats[other];
      double dr = vs.sum_r / vs.area - os.sum_r / os.area;
      double dc = vs.sum_c / vs.area - os.sum_c / os.area;
      double score = double(len) / (1.0 + std::hypot(dr, dc));
      if (score > best_score) {  // map order: ties keep the lower id
        best_score = score;
        best = other;
      }
    }
    for (auto& v : cur.values())
      if (v == victim) v = best;
  }
  return compact_labels(cur);
}

inline std::vector<RegionInfo> describe_regions(const LabelGrid& labels) {
  int k = 0;
  for (int v : labels.values()) k = std::max(k, v);
  std::vector<RegionInfo> regions(static_cast<std::size_t>(k));
  std::vector<double> sr(k, 0.0), sc(k, 0.0);
  for (int i = 0; i < k; ++i) regions[i].id = i + 1;
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c) {
      int v = labels(r, c);
      if (v <= 0) continue;
      auto& reg = regions[std::size_t(v - 1)];
      if (reg.area == 0) reg.bbox = {r, c, r, c};
      ++reg.area;
      sr[v - 1] += r;
      sc[v - 1] += c;
      reg.bbox.row_min = std::min(reg.bbox.row_min, r);
      reg.bbox.row_max = std::max(reg.bbox.row_max, r);
      reg.bbox.col_min = std::min(reg.bbox.col_min, c);
      reg.bbox.col_max = std::max(reg.bbox.col_max, c);
    }
  const Geometry& g = labels.geometry();
  for (int i = 0; i < k; ++i) {
    auto& reg = regions[i];
    if (reg.area == 0) continue;
    double row = sr[i] / reg.area, col = sc[i] / reg.area;
    reg.centroid = {g.origin.x + (col + 0.5) * g.resolution, g.origin.y + (row + 0.5) * g.resolution};
  }
  return regions;
}

struct SegmentationConfig {
  int close_radius = 1;       // cells
  int background_radius = 3;  // cells, dilation of free space that bounds the unknown band
  double min_room_area_m2 = 2.0;
  SeedOptions seeds;
};

namespace detail {

// Walkable cells left unlabeled (closed doorways, pockets with no seed)
// take the label of the nearest labeled walkable cell; unreachable pockets
// become rooms of their own.
inline void fill_walkable(LabelGrid& labels, const BinaryMask& walkable) {
  const Geometry& geo = labels.geometry();
  std::deque<std::size_t> q;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.at_index(i) > 0) q.push_back(i);
  // Multi-source BFS; within one wave lower labels are seeded first via a stable sort.
  std::stable_sort(q.begin(), q.end(), [&](std::size_t a, std::size_t b) { return labels.at_index(a) < labels.at_index(b); });
  while (!q.empty()) {
    std::size_t i = q.front();
    q.pop_front();
    CellIndex c = geo.cell_at(i);
    for (int k = 0; k < 8; ++k) {
      CellIndex n{c.row + kDy8[k], c.col + kDx8[k]};
      if (!geo.contains(n)) continue;
      std::size_t ni = geo.index(n);
      if (!walkable.at_index(ni) || labels.at_index(ni) != 0) continue;
      labels.at_index(ni) = labels.at_index(i);
      q.push_back(ni);
    }
  }
  BinaryMask rest(geo);
  bool any = false;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (walkable.at_index(i) && labels.at_index(i) == 0) rest.at_index(i) = any = true;
  if (!any) return;
  int next = 0;
  for (int v : labels.values()) next = std::max(next, v);
  auto cc = connected_components(rest);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (int v = cc.labels.at_index(i); v > 0) labels.at_index(i) = next + v;
}

}  // namespace detail

/// Full partition pipeline from a raw wall mask.
inline RoomSegmentation segment_rooms(const BinaryMask& wall_mask, const SegmentationConfig& cfg = {}) {
  const BinaryMask walkable = invert(wall_mask);
  if (count_true(walkable) == 0) throw Error(ErrorCode::NoWalkableSpace, "map has no walkable cell");

  BinaryMask closed = morphology(wall_mask, MorphOp::Close, cfg.close_radius);
  BinaryMask free = invert(closed);
  if (count_true(free) == 0) free = walkable;

  DistanceField dist = count_true(closed) > 0 ? edt(closed) : DistanceField(free.geometry(), 1.0);
  BinaryMask seeds = compute_seeds(dist, free, cfg.seeds);

  // Markers: sure background (outside the dilated free space) = 1,
  // unknown band = 0, seed components = 2..n+1.
  BinaryMask bg_bound = morphology(free, MorphOp::Dilate, cfg.background_radius);
  auto cc = connected_components(seeds);
  LabelGrid markers(free.geometry(), 0);
  for (std::size_t i = 0; i < markers.size(); ++i) {
    if (!bg_bound.at_index(i)) markers.at_index(i) = 1;
    else if (cc.labels.at_index(i) > 0) markers.at_index(i) = cc.labels.at_index(i) + 1;
  }

  LabelGrid flooded = watershed(dist, markers, free);
  for (auto& v : flooded.values()) v = v >= 2 ? v - 1 : 0;
  detail::fill_walkable(flooded, walkable);
  for (std::size_t i = 0; i < flooded.size(); ++i)
    if (!walkable.at_index(i)) flooded.at_index(i) = 0;

  const double res = wall_mask.resolution();
  auto min_cells = std::size_t(std::ceil(cfg.min_room_area_m2 / (res * res)));
  RoomSegmentation seg;
  seg.labels = merge_small_rooms(compact_labels(flooded), min_cells);
  seg.regions = describe_regions(seg.labels);
  return seg;
}

/// Room containing p, or the room of the nearest labeled cell when p sits on
/// a wall. Returns 0 only for a segmentation with no labels at all.
inline int room_at(const RoomSegmentation& seg, WorldPoint p) {
  const Geometry& g = seg.labels.geometry();
  CellIndex c = g.cell(p);
  c.row = std::clamp(c.row, 0, g.height - 1);
  c.col = std::clamp(c.col, 0, g.width - 1);
  if (seg.labels[c] > 0) return seg.labels[c];
  int best = 0;
  long best_d = -1;
  for (int r = 0; r < g.height; ++r)
    for (int col = 0; col < g.width; ++col) {
      int v = seg.labels(r, col);
      if (v <= 0) continue;
      long d = long(r - c.row) * (r - c.row) + long(col - c.col) * (col - c.col);
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best = v;
      }
    }
  return best;
}

}  // namespace navkit
