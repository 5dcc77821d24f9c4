#pragma once

// Two-stage target selection (room, then node) and the two-unit ensemble.

#include <future>
#include <optional>
#include <string>
#include <vector>

#include "navkit/backend.hpp"
#include "navkit/nodes.hpp"
#include "navkit/prompts.hpp"
#include "navkit/render.hpp"
#include "navkit/rooms.hpp"

namespace navkit {

struct GlobalTarget {
  WorldPoint point;  // p_global
  int room = 0;      // r*
  int node = 0;      // n*
  std::string provenance;
};

struct ReasoningConfig {
  int retries = 2;
  double marker_margin = 1.5;  // meters around each proposal in discriminator crops
  int node_crop_margin = 5;    // cells
  std::uint64_t seed = 0;      // forwarded to nodes_in_room
};

inline int largest_room(const RoomSegmentation& seg) {
  int best = 1;
  for (const auto& r : seg.regions)
    if (r.area > seg.region(best).area) best = r.id;
  return best;
}

inline int select_room(ReasoningBackend& backend, const GridMap& map, const RoomSegmentation& seg,
                       const GoalSpec& goal, int retries = 2) {
  if (seg.count() < 1) throw Error(ErrorCode::InvalidArgument, "segmentation has no rooms");
  std::vector<PromptMessage> msgs{build_room_prompt(goal, render_room_map(map, seg))};
  for (int attempt = 0; attempt <= retries; ++attempt) {
    if (attempt > 0) msgs.push_back({Role::User, std::string(kRoomRetrySuffix), {}});
    auto id = parse_room_response(backend.query(msgs));
    if (id && *id >= 1 && *id <= seg.count() && seg.region(*id).area > 0) return *id;
  }
  return largest_room(seg);
}

inline const NavNode& node_nearest(const NodeSet& nodes, WorldPoint p) {
  const NavNode* best = &nodes.nodes.front();
  for (const auto& n : nodes.nodes)
    if (distance(n.position, p) < distance(best->position, p)) best = &n;
  return *best;
}

inline GlobalTarget select_node(ReasoningBackend& backend, const GridMap& map, const RoomSegmentation& seg,
                                const NodeSet& nodes, int room_id, const GoalSpec& goal,
                                const ReasoningConfig& cfg = {}) {
  NodeSet cands = nodes_in_room(nodes, seg, room_id, cfg.seed);
  auto make = [&](const NavNode& n) { return GlobalTarget{n.position, room_id, n.id, "single:" + backend.name()}; };
  if (cands.size() == 1) return make(cands.nodes.front());

  auto imgs = render_node_map(map, seg.region(room_id).bbox, cands, cfg.node_crop_margin);
  std::vector<PromptMessage> msgs{build_node_prompt(goal, imgs.plain, imgs.annotated)};
  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    if (attempt > 0) msgs.push_back({Role::User, std::string(kNodeRetrySuffix), {}});
    auto id = parse_node_response(backend.query(msgs));
    if (id)
      if (const NavNode* n = cands.find(*id)) return make(*n);
  }
  return make(node_nearest(cands, seg.region(room_id).centroid));
}

inline GlobalTarget reason_global(ReasoningBackend& backend, const GridMap& map, const RoomSegmentation& seg,
                                  const NodeSet& nodes, const GoalSpec& goal, const ReasoningConfig& cfg = {}) {
  int room = select_room(backend, map, seg, goal, cfg.retries);
  return select_node(backend, map, seg, nodes, room, goal, cfg);
}

struct EnsembleResult {
  GlobalTarget chosen;
  GlobalTarget a, b;
  bool discriminator_called = false;
  std::optional<std::string> discriminator_text;
};

/// Both units run concurrently. Agreeing units skip the discriminator; an
/// unparsable verdict keeps Model 1.
inline EnsembleResult ensemble_select(ReasoningBackend& unit_a, ReasoningBackend& unit_b,
                                      ReasoningBackend& discriminator, const GridMap& map, const RoomSegmentation& seg,
                                      const NodeSet& nodes, const GoalSpec& goal, const ReasoningConfig& cfg = {}) {
  auto fut_b = std::async(std::launch::async, [&] { return reason_global(unit_b, map, seg, nodes, goal, cfg); });
  EnsembleResult out;
  try {
    out.a = reason_global(unit_a, map, seg, nodes, goal, cfg);
  } catch (...) {
    fut_b.wait();
    throw;
  }
  out.b = fut_b.get();
  if (out.a.node == out.b.node) {
    out.chosen = out.a;
    out.chosen.provenance = "ensemble:agree";
    return out;
  }
  auto crop_a = render_marker_crop(map, out.a.point, cfg.marker_margin, colors::blue);
  auto crop_b = render_marker_crop(map, out.b.point, cfg.marker_margin, colors::red);
  out.discriminator_called = true;
  out.discriminator_text = discriminator.query({build_discriminator_prompt(goal, crop_a, crop_b)});
  auto d = parse_decision(*out.discriminator_text);
  out.chosen = d && *d == 2 ? out.b : out.a;
  out.chosen.provenance = d && *d == 2 ? "ensemble:model2" : "ensemble:model1";
  return out;
}

}  // namespace navkit
