#pragma once

// Reasoning prompts, response parsers, and the goal/message types they use.

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navkit/error.hpp"
#include "navkit/image_io.hpp"

namespace navkit {

enum class GoalKind { ObjectCategory, InstanceImage, TextDescription };

inline std::string_view to_string(GoalKind k) {
  switch (k) {
    case GoalKind::ObjectCategory: return "object_category";
    case GoalKind::InstanceImage: return "instance_image";
    case GoalKind::TextDescription: return "text_description";
  }
  return "object_category";
}

inline GoalKind parse_goal_kind(std::string_view s) {
  if (s == "object_category") return GoalKind::ObjectCategory;
  if (s == "instance_image") return GoalKind::InstanceImage;
  if (s == "text_description") return GoalKind::TextDescription;
  throw Error(ErrorCode::SchemaError, "unknown goal kind: " + std::string(s));
}

struct GoalSpec {
  GoalKind kind = GoalKind::ObjectCategory;
  std::string text;
  std::optional<RgbImage> image;
  std::string image_path;  // as written in the scenario, empty when absent

  void validate() const {
    if (kind == GoalKind::InstanceImage && !image && image_path.empty())
      throw Error(ErrorCode::SchemaError, "instance_image goal requires an image");
    if (kind != GoalKind::InstanceImage && (image || !image_path.empty()))
      throw Error(ErrorCode::SchemaError, "only instance_image goals carry an image");
  }

  /// Text substituted for {goal_object}.
  std::string prompt_text() const {
    if (kind == GoalKind::InstanceImage && text.empty()) return "object shown in the goal image";
    return text;
  }
};

enum class Role { System, User };

struct PromptMessage {
  Role role = Role::User;
  std::string text;
  std::vector<RgbImage> images;  // referenced by order: first image, second image, ...
};

// Templates; {goal_object} is the only placeholder.
inline constexpr std::string_view kRoomPromptTemplate = R"PROMPT(You are an AI assistant for a robot's navigation system. Your task is to identify a certain room.

CONTEXT:
You will be provided with a top-down floor plan showing furniture and layout with room segmentation. (The floor plan is segmented to at least one room/region with numbered room annotations. The boundaries of different rooms are noted in white.)

GOAL:
Identify the room number that contains the {goal_object}.

INSTRUCTIONS:

1.  If you can find the object directly from map, describe the object's location using text.


2.  Analyze the Goal Object: Determine the room number where the {goal_object} can be found.
 If you cannot find {goal_object} on the top-down view, then please consider the most-possible room that the
{goal_object} may locate at. (e.g., a "bed" is in a bedroom)


3.  Verify the Room: Scan the top-down view to make sure that the
{goal_object} indeed locates in the chosen room.  If {goal_object} cannot be found, make sure the chosen room is the most appropriate room to search. Note that you should consider the precise semantics of {goal_object} during verification. (e.g., "sofa chair" is different from "sofa")


Note that you should choose the room that contains the {goal_object} instead of the room that is the closest to the {goal_object}!

Repeat the instruction until the verification (3.) is passed.

Provide your answer in the last line in the form of: "Room X" where X is your chosen number. (e.g. Room 1)

Goal Object: {goal_object}
)PROMPT";

inline constexpr std::string_view kNodePromptTemplate = R"PROMPT(CONTEXT:
You are given two images:

1.  Map Image: A top-down schematic of the room's layout.

2.  Node Image: The same map with numbered navigation nodes.

GOAL:
{goal_object}

INSTRUCTIONS:

1.  Analyze the Goal: Consider the common placement of a {goal_object}. For example, a "TV" is opposite to sofa in the living room; a "book" is on a shelf or table. Note the precise semantics of {goal_object} and do not misunderstand the target. (e.g., sofa chair is different from sofa).

2.  Locate on Map: Scan the Map Image to find the {goal_object} or the most logical place it would be (e.g., find the dining table if the goal is a "plate").

3.  Select Best Node: Based on your location analysis, choose the single best node from the Node Image. The best node is determined by this priority:

    *   Priority 1: A node located directly on the object.

    *   Priority 2: If no node is on the object, the node closest to the object.

    *   Priority 3: If the object cannot be found on the topdown-view, the node that provides the best vantage point to search the inferred area.

    4.  Verify The Node: Make sure the selected node satisfy the above requirements.

Repeat the instructions until the verification (4.) is passed.

Goal Object: {goal_object}
Provide your answer in the last line in the form of: "node X" where X is your chosen number.
(e.g. node 100)
)PROMPT";

inline constexpr std::string_view kDiscriminatorPromptTemplate = R"PROMPT(You are an expert navigation system evaluator. I need you to analyze a controversial episode where two different AI models disagreed on the success of an object navigation task.

Target Object: {goal_object}

Images Provided:
You will see two separate images:

1. First Image (Model 1): Shows an area around Model 1's target selection with a BLUE circle marking the chosen target location.

2. Second Image (Model 2): Shows a area around Model 2's target selection with a RED circle marking the chosen target location.


Your Task:
Please analyze these navigation scenarios and determine which model made the better decision. Consider:

1. Target Identification: Which model identified a more plausible target location for "{goal_object}"? Look at the environment around each colored circle, find the corresponding node that is closer to the {goal_object}.

2. Accessibility: If two nodes are both at a plausible position of the {goal_object}, which target location appears more accessible and reachable in a real navigation scenario? (i.e. more close to the navigable/walkable area and more close to the open space. (e.g. Two chairs. The one that is closer to the open area is more suitable than the one that is closer to the wall.))
Please respond with:
1. Your analysis of both models' target selections based on the environmental context
2. Which model you believe made the better decision (Model 1 or Model 2)
3. Key reasoning points for your decision

Output Format:
Decision: [Model 1 or Model 2]
)PROMPT";

inline std::string substitute_goal(std::string_view tmpl, std::string_view goal) {
  static constexpr std::string_view key = "{goal_object}";
  std::string out;
  out.reserve(tmpl.size() + 8 * goal.size());
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = tmpl.find(key, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(goal);
    pos = hit + key.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

/// P_1(g): room-map image, plus the goal image for instance-image goals.
inline PromptMessage build_room_prompt(const GoalSpec& goal, const RgbImage& room_map) {
  PromptMessage m{Role::User, substitute_goal(kRoomPromptTemplate, goal.prompt_text()), {room_map}};
  if (goal.kind == GoalKind::InstanceImage && goal.image) m.images.push_back(*goal.image);
  return m;
}

/// P_2(g): plain room crop, then the node-annotated crop, then the goal image if any.
inline PromptMessage build_node_prompt(const GoalSpec& goal, const RgbImage& room_crop, const RgbImage& node_crop) {
  PromptMessage m{Role::User, substitute_goal(kNodePromptTemplate, goal.prompt_text()), {room_crop, node_crop}};
  if (goal.kind == GoalKind::InstanceImage && goal.image) m.images.push_back(*goal.image);
  return m;
}

/// P_dis(g): Model 1 crop (blue marker) then Model 2 crop (red marker).
inline PromptMessage build_discriminator_prompt(const GoalSpec& goal, const RgbImage& crop_a, const RgbImage& crop_b) {
  return {Role::User, substitute_goal(kDiscriminatorPromptTemplate, goal.prompt_text()), {crop_a, crop_b}};
}

inline constexpr std::string_view kRoomRetrySuffix =
    "Your previous answer could not be used. Reply again and end with a single last line of the form \"Room X\" "
    "where X is one of the room numbers shown on the map.";
inline constexpr std::string_view kNodeRetrySuffix =
    "Your previous answer could not be used. Reply again and end with a single last line of the form \"node X\" "
    "where X is one of the node numbers shown in the Node Image.";

namespace detail {

inline char lower(char c) { return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c; }
inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct ChoicePattern {
  std::string_view keyword;  // lowercase
  bool require_space;        // keyword\s+digits vs keyword\s*digits
};

// Every match of keyword [ws] number, returning the last one that fits in an int.
inline std::optional<int> last_match(std::string_view text, const ChoicePattern& pat) {
  std::optional<int> found;
  const std::size_t n = text.size(), k = pat.keyword.size();
  for (std::size_t i = 0; i + k <= n; ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < k && hit; ++j) hit = lower(text[i + j]) == pat.keyword[j];
    if (!hit) continue;
    std::size_t p = i + k, ws = 0;
    while (p < n && is_space(text[p])) ++p, ++ws;
    if (pat.require_space && ws == 0) continue;
    std::size_t d = p;
    while (d < n && is_digit(text[d])) ++d;
    if (d == p) continue;
    int v = 0;
    auto [end, ec] = std::from_chars(text.data() + p, text.data() + d, v);
    if (ec == std::errc{} && end == text.data() + d) found = v;
  }
  return found;
}

// Last non-empty line first, then the last match anywhere in the text.
inline std::optional<int> parse_choice(std::string_view text, const ChoicePattern& pat) {
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end != std::string_view::npos) {
    std::size_t begin = text.find_last_of('\n', end);
    begin = begin == std::string_view::npos ? 0 : begin + 1;
    if (auto v = last_match(text.substr(begin, end - begin + 1), pat)) return v;
  }
  return last_match(text, pat);
}

}  // namespace detail

/// "Room X" -> X, case-insensitive. nullopt means the response is unusable; never throws.
inline std::optional<int> parse_room_response(std::string_view text) {
  return detail::parse_choice(text, {"room", true});
}

inline std::optional<int> parse_node_response(std::string_view text) {
  return detail::parse_choice(text, {"node", true});
}

namespace detail {

inline bool starts_with_icase(std::string_view t, std::string_view lower_kw) {
  if (t.size() < lower_kw.size()) return false;
  for (std::size_t j = 0; j < lower_kw.size(); ++j)
    if (lower(t[j]) != lower_kw[j]) return false;
  return true;
}

inline std::optional<int> last_decision(std::string_view t) {
  std::optional<int> last;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!starts_with_icase(t.substr(i), "decision:")) continue;
    std::size_t p = i + 9;
    while (p < t.size() && is_space(t[p])) ++p;
    if (!starts_with_icase(t.substr(p), "model")) continue;
    p += 5;
    while (p < t.size() && is_space(t[p])) ++p;
    if (p >= t.size() || (t[p] != '1' && t[p] != '2')) continue;
    char next = p + 1 < t.size() ? t[p + 1] : ' ';
    bool word = is_digit(next) || next == '_' || (lower(next) >= 'a' && lower(next) <= 'z');
    if (!word) last = t[p] - '0';
  }
  return last;
}

}  // namespace detail

/// "Decision: Model k" -> k in {1, 2}; same last-line-first rule as the other parsers.
inline std::optional<int> parse_decision(std::string_view text) {
  std::size_t end = text.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos) return std::nullopt;
  std::size_t begin = text.find_last_of('\n', end);
  begin = begin == std::string_view::npos ? 0 : begin + 1;
  if (auto v = detail::last_decision(text.substr(begin, end - begin + 1))) return v;
  return detail::last_decision(text);
}

}  // namespace navkit
