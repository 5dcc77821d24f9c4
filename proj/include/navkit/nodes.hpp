#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/gridmap.hpp"
#include "navkit/rooms.hpp"

namespace navkit {

struct NavNode {
  int id = 0;
  WorldPoint position;
  CellIndex cell;
  int region = 0;

  friend bool operator==(const NavNode&, const NavNode&) = default;
};

struct NodeSet {
  std::vector<NavNode> nodes;
  double radius = 0.5;   // meters
  double padding = 0.0;  // meters

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  const NavNode* find(int id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
};

struct SamplingConfig {
  double radius = 0.5;   // meters
  double padding = 0.25; // meters
  int k_attempts = 30;
  std::uint64_t seed = 0;
};

namespace detail {

inline double unit_random(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

// Bridson sampling restricted to the cells of one component.
class DiskSampler {
 public:
  DiskSampler(const Geometry& geo, double radius) : geo_(geo), r_(radius), cell_(radius / std::numbers::sqrt2) {
    double w = geo.width * geo.resolution, h = geo.height * geo.resolution;
    gw_ = std::max(1, int(std::ceil(w / cell_)));
    gh_ = std::max(1, int(std::ceil(h / cell_)));
    grid_.assign(std::size_t(gw_) * gh_, -1);
  }

  bool far_enough(WorldPoint p) const {
    int gx = int((p.x - geo_.origin.x) / cell_), gy = int((p.y - geo_.origin.y) / cell_);
    for (int y = std::max(0, gy - 2); y <= std::min(gh_ - 1, gy + 2); ++y)
      for (int x = std::max(0, gx - 2); x <= std::min(gw_ - 1, gx + 2); ++x) {
        int i = grid_[std::size_t(y) * gw_ + x];
        if (i >= 0 && distance(points_[std::size_t(i)], p) < r_) return false;
      }
    return true;
  }

  void add(WorldPoint p) {
    int gx = std::clamp(int((p.x - geo_.origin.x) / cell_), 0, gw_ - 1);
    int gy = std::clamp(int((p.y - geo_.origin.y) / cell_), 0, gh_ - 1);
    grid_[std::size_t(gy) * gw_ + gx] = int(points_.size());
    points_.push_back(p);
  }

  const std::vector<WorldPoint>& points() const { return points_; }

 private:
  Geometry geo_;
  double r_, cell_;
  int gw_ = 0, gh_ = 0;
  std::vector<int> grid_;
  std::vector<WorldPoint> points_;
};

inline std::vector<WorldPoint> sample_component(const LabelGrid& comps, int label, const std::vector<CellIndex>& cells,
                                                double radius, int k_attempts, std::uint64_t seed) {
  const Geometry& geo = comps.geometry();
  std::mt19937_64 rng(seed);
  DiskSampler sampler(geo, radius);
  auto inside = [&](WorldPoint p) {
    CellIndex c = geo.cell(p);
    return geo.contains(c) && comps[c] == label;
  };

  CellIndex first = cells[std::size_t(rng() % cells.size())];
  sampler.add(geo.world(first));
  std::vector<std::size_t> active{0};
  while (!active.empty()) {
    std::size_t slot = std::size_t(rng() % active.size());
    WorldPoint cur = sampler.points()[active[slot]];
    bool found = false;
    for (int i = 0; i < k_attempts; ++i) {
      // uniform by area over the annulus [r, 2r]
      double u = unit_random(rng), t = unit_random(rng) * 2.0 * std::numbers::pi;
      double d = radius * std::sqrt(1.0 + 3.0 * u);
      WorldPoint cand{cur.x + d * std::cos(t), cur.y + d * std::sin(t)};
      if (inside(cand) && sampler.far_enough(cand)) {
        active.push_back(sampler.points().size());
        sampler.add(cand);
        found = true;
        break;
      }
    }
    if (!found) {
      active[slot] = active.back();
      active.pop_back();
    }
  }

  // Raster sweep closes the gaps the dart throwing missed, making the set maximal.
  for (CellIndex c : cells) {
    WorldPoint p = geo.world(c);
    if (sampler.far_enough(p)) sampler.add(p);
  }
  return sampler.points();
}

}  // namespace detail

/// Multi-region Poisson disk sampling over the walkable mask eroded by padding.
/// Components are sampled independently and appended in label order.
inline NodeSet sample_nodes(const BinaryMask& walkable, const SamplingConfig& cfg) {
  if (!(cfg.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling radius must be > 0");
  if (cfg.padding < 0.0) throw Error(ErrorCode::InvalidArgument, "padding must be >= 0");
  const double res = walkable.resolution();
  int pad_cells = int(std::ceil(cfg.padding / res - 1e-9));
  BinaryMask padded = morphology(walkable, MorphOp::Erode, pad_cells);
  // the raster border counts as an obstacle for padding purposes
  for (int r = 0; r < padded.height(); ++r)
    for (int c = 0; c < padded.width(); ++c)
      if (pad_cells > 0 && (r < pad_cells || c < pad_cells || r >= padded.height() - pad_cells ||
                            c >= padded.width() - pad_cells))
        padded(r, c) = false;
  auto comps = connected_components(padded);
  if (comps.count == 0) throw Error(ErrorCode::NoSamplableArea, "padding removed every walkable cell");

  std::vector<std::vector<CellIndex>> cells(std::size_t(comps.count));
  for (int r = 0; r < padded.height(); ++r)
    for (int c = 0; c < padded.width(); ++c)
      if (int l = comps.labels(r, c); l > 0) cells[std::size_t(l - 1)].push_back({r, c});

  NodeSet out;
  out.radius = cfg.radius;
  out.padding = cfg.padding;
  const Geometry& geo = walkable.geometry();
  for (int l = 1; l <= comps.count; ++l) {
    std::uint64_t seed = cfg.seed * 0x9E3779B97F4A7C15ull + std::uint64_t(l);
    for (WorldPoint p : detail::sample_component(comps.labels, l, cells[std::size_t(l - 1)], cfg.radius,
                                                 cfg.k_attempts, seed))
      out.nodes.push_back({int(out.nodes.size()) + 1, p, geo.cell(p), 0});
  }
  return out;
}

inline NodeSet assign_regions(NodeSet nodes, const RoomSegmentation& seg) {
  for (auto& n : nodes.nodes) n.region = seg.labels.contains(n.cell) ? seg.labels[n.cell] : 0;
  return nodes;
}

/// Nodes inside room_id, ids preserved. An empty room is resampled at half
/// radius; if that still yields nothing, the room cell nearest its centroid
/// becomes a synthetic node. New ids continue after the largest existing id.
inline NodeSet nodes_in_room(const NodeSet& nodes, const RoomSegmentation& seg, int room_id,
                             std::uint64_t seed = 0) {
  if (room_id < 1 || room_id > seg.count()) throw Error(ErrorCode::InvalidArgument, "invalid room id");
  NodeSet out;
  out.radius = nodes.radius;
  out.padding = nodes.padding;
  for (const auto& n : nodes.nodes)
    if (n.region == room_id) out.nodes.push_back(n);
  if (!out.empty()) return out;

  const RegionInfo& info = seg.region(room_id);
  if (info.area == 0) throw Error(ErrorCode::EmptyRoom, "room has no cells");
  int next_id = 0;
  for (const auto& n : nodes.nodes) next_id = std::max(next_id, n.id);

  BinaryMask room(seg.labels.geometry());
  for (std::size_t i = 0; i < room.size(); ++i) room.at_index(i) = seg.labels.at_index(i) == room_id;
  SamplingConfig half{nodes.radius / 2.0, nodes.padding / 2.0, 30, seed ^ std::uint64_t(room_id)};
  try {
    NodeSet re = sample_nodes(room, half);
    for (auto& n : re.nodes) {
      if (seg.labels[n.cell] != room_id) continue;
      n.id = ++next_id;
      n.region = room_id;
      out.nodes.push_back(n);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSamplableArea) throw;
  }
  if (!out.empty()) return out;

  const Geometry& g = seg.labels.geometry();
  CellIndex target = g.cell(info.centroid), best{};
  long best_d = -1;
  for (int r = info.bbox.row_min; r <= info.bbox.row_max; ++r)
    for (int c = info.bbox.col_min; c <= info.bbox.col_max; ++c) {
      if (seg.labels(r, c) != room_id) continue;
      long d = long(r - target.row) * (r - target.row) + long(c - target.col) * (c - target.col);
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best = {r, c};
      }
    }
  out.nodes.push_back({next_id + 1, g.world(best), best, room_id});
  return out;
}

}  // namespace navkit
