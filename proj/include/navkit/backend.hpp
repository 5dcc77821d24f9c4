#pragma once

// Reasoning backends: scripted ground-truth oracles, canned scripts, and an
// HTTP chat-completions client.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "navkit/error.hpp"
#include "navkit/image_io.hpp"
#include "navkit/nodes.hpp"
#include "navkit/prompts.hpp"
#include "navkit/render.hpp"
#include "navkit/rooms.hpp"

namespace navkit {

/// query() must be safe to call from several threads at once.
class ReasoningBackend {
 public:
  virtual ~ReasoningBackend() = default;
  virtual std::string query(const std::vector<PromptMessage>& messages) = 0;
  virtual std::string name() const = 0;
};

enum class PromptStage { Room, Node, Discriminator, Unknown };

inline PromptStage prompt_stage(const std::vector<PromptMessage>& messages) {
  for (const auto& m : messages) {
    if (m.text.find("Identify the room number") != std::string::npos) return PromptStage::Room;
    if (m.text.find("Select Best Node") != std::string::npos) return PromptStage::Node;
    if (m.text.find("expert navigation system evaluator") != std::string::npos) return PromptStage::Discriminator;
  }
  return PromptStage::Unknown;
}

/// What a scripted oracle knows about the episode.
struct GroundTruth {
  WorldPoint target;
  const RoomSegmentation* seg = nullptr;
  const NodeSet* nodes = nullptr;
  std::uint64_t seed = 0;  // must match the seed the reasoning stage passes to nodes_in_room
};

/// Answers from ground truth. The adversarial variant names the room farthest
/// from the target, the farthest node, and the worse of two proposals.
class OracleBackend : public ReasoningBackend {
 public:
  OracleBackend(GroundTruth truth, bool adversarial = false) : truth_(truth), adversarial_(adversarial) {
    if (!truth_.seg || !truth_.nodes) throw Error(ErrorCode::InvalidArgument, "oracle needs segmentation and nodes");
  }

  std::string name() const override { return adversarial_ ? "adversarial" : "oracle"; }

  std::string query(const std::vector<PromptMessage>& messages) override {
    switch (prompt_stage(messages)) {
      case PromptStage::Room: return "Judging from the layout, this is where the target should be.\nRoom " +
                                     std::to_string(room_choice());
      case PromptStage::Node: return "This node is the closest reachable spot.\nnode " + std::to_string(node_choice());
      case PromptStage::Discriminator: return discriminate(messages);
      case PromptStage::Unknown: break;
    }
    return "I cannot tell what is being asked.";
  }

  int room_choice() const {
    const auto& seg = *truth_.seg;
    int truth = room_at(seg, truth_.target);
    if (!adversarial_ || seg.count() == 1) return truth;
    int best = 0;
    double bd = -1.0;
    for (const auto& r : seg.regions) {
      if (r.id == truth || r.area == 0) continue;
      double d = distance(r.centroid, truth_.target);
      if (d > bd) {
        bd = d;
        best = r.id;
      }
    }
    return best > 0 ? best : truth;
  }

  int node_choice() const {
    NodeSet cands = nodes_in_room(*truth_.nodes, *truth_.seg, room_choice(), truth_.seed);
    const NavNode* best = nullptr;
    double bd = 0.0;
    for (const auto& n : cands.nodes) {
      double d = distance(n.position, truth_.target);
      if (!best || (adversarial_ ? d > bd : d < bd)) {
        best = &n;
        bd = d;
      }
    }
    return best->id;
  }

 private:
  std::string discriminate(const std::vector<PromptMessage>& messages) const {
    const PromptMessage* m = nullptr;
    for (const auto& msg : messages)
      if (msg.images.size() >= 2) m = &msg;
    if (!m) return "Both maps are missing.";
    auto a = find_marker(m->images[0], colors::blue);
    auto b = find_marker(m->images[1], colors::red);
    if (!a || !b) return "The markers are not visible.";
    bool pick_a = distance(*a, truth_.target) <= distance(*b, truth_.target);
    if (adversarial_) pick_a = !pick_a;
    return std::string("Comparing both marked locations against the likely object position.\nDecision: Model ") +
           (pick_a ? "1" : "2");
  }

  GroundTruth truth_;
  bool adversarial_;
};

/// Returns canned responses in order; throws BackendError when exhausted.
class ScriptedBackend : public ReasoningBackend {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses, std::string label = "scripted")
      : responses_(std::move(responses)), label_(std::move(label)) {}

  std::string name() const override { return label_; }

  std::string query(const std::vector<PromptMessage>& messages) override {
    std::lock_guard lock(mu_);
    calls_.push_back(messages);
    if (next_ >= responses_.size()) throw Error(ErrorCode::BackendError, "scripted backend exhausted");
    return responses_[next_++];
  }

  std::size_t call_count() const {
    std::lock_guard lock(mu_);
    return calls_.size();
  }
  std::vector<std::vector<PromptMessage>> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  std::vector<std::vector<PromptMessage>> calls_;
  std::string label_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key_env = "NAVKIT_API_KEY";
  double timeout_s = 60.0;
  int retries = 2;
  int max_image_side = 1024;
  double retry_backoff_s = 1.0;
};

namespace detail {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "endpoint must be an absolute URL");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

/// Chat-completions request body: text part first, then one data-URL PNG part per image.
inline nlohmann::json chat_request_body(const std::string& model, const std::vector<PromptMessage>& messages,
                                        int max_image_side) {
  nlohmann::json body{{"model", model}, {"messages", nlohmann::json::array()}};
  for (const auto& m : messages) {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& img : m.images) {
      auto png = encode_png(cap_longest_side(img, max_image_side));
      content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
    }
    body["messages"].push_back({{"role", m.role == Role::System ? "system" : "user"}, {"content", content}});
  }
  return body;
}

/// Pulls choices[0].message.content out of a response body, as a string or
/// as concatenated text parts.
inline std::string chat_response_text(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::BackendError, "response is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string out;
    for (const auto& part : content)
      if (part.value("type", "") == "text") out += part.value("text", "");
    return out;
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::BackendError, "response lacks choices[0].message.content");
  }
}

class HttpChatBackend : public ReasoningBackend {
 public:
  explicit HttpChatBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)), url_(detail::split_url(cfg_.endpoint)) {
    if (cfg_.model.empty()) throw Error(ErrorCode::InvalidArgument, "http backend needs a model name");
  }

  std::string name() const override { return "http:" + cfg_.model; }

  std::string query(const std::vector<PromptMessage>& messages) override {
    std::string payload = chat_request_body(cfg_.model, messages, cfg_.max_image_side).dump();
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
      headers.emplace("Authorization", std::string("Bearer ") + key);
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      if (attempt > 0 && cfg_.retry_backoff_s > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(cfg_.retry_backoff_s * attempt));
      httplib::Client cli(url_.base);
      auto secs = std::chrono::duration<double>(cfg_.timeout_s);
      cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
      cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
      cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
      auto res = cli.Post(url_.path, headers, payload, "application/json");
      if (!res) {
        last_error = "transport: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return chat_response_text(res->body);
      last_error = "HTTP " + std::to_string(res->status);
      if (res->status != 429 && res->status < 500) break;
    }
    throw Error(ErrorCode::BackendError, last_error);
  }

 private:
  HttpBackendConfig cfg_;
  detail::SplitUrl url_;
};

}  // namespace navkit
