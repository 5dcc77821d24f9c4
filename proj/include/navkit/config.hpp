#pragma once

// Run configuration and its JSON form.

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "navkit/backend.hpp"
#include "navkit/localnav.hpp"
#include "navkit/nodes.hpp"
#include "navkit/reasoning.hpp"
#include "navkit/rooms.hpp"
#include "navkit/simulator.hpp"
#include "navkit/verification.hpp"

namespace navkit {

enum class BackendKind { Oracle, Adversarial, Http };

inline std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Oracle: return "oracle";
    case BackendKind::Adversarial: return "adversarial";
    case BackendKind::Http: return "http";
  }
  return "oracle";
}

inline BackendKind parse_backend_kind(std::string_view s) {
  if (s == "oracle") return BackendKind::Oracle;
  if (s == "adversarial") return BackendKind::Adversarial;
  if (s == "http") return BackendKind::Http;
  throw Error(ErrorCode::InvalidArgument, "unknown backend: " + std::string(s));
}

enum class SuccessMetric { Euclidean, Geodesic };

struct RunConfig {
  BackendKind backend = BackendKind::Oracle;
  HttpBackendConfig http;
  bool ensemble = false;
  std::string ensemble_model_a, ensemble_model_b;
  std::string discriminator_model;
  std::string detector = "oracle";

  int wall_threshold = 128;
  SegmentationConfig segmentation;
  SamplingConfig sampling;
  ReasoningConfig reasoning;
  NavConfig nav;
  VerifyConfig verify;
  OracleDetectorConfig detection;
  SensorConfig sensors;
  SuccessMetric success_metric = SuccessMetric::Euclidean;
  double spl_warn_ratio = 1.05;

  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Copies shared values into the sub-configs that need them. Call after edits.
inline void sync_derived(RunConfig& c) {
  c.nav.vfh.step_length = c.sensors.step_length;
  c.nav.vfh.turn_angle = c.sensors.turn_angle;
  c.sampling.seed = c.seed;
  c.reasoning.seed = c.seed;
  if (c.jobs < 1) throw Error(ErrorCode::SchemaError, "jobs must be >= 1");
}

inline nlohmann::json to_json(const RunConfig& c) {
  using nlohmann::json;
  const auto& n = c.nav;
  return json{
      {"backend", to_string(c.backend)},
      {"endpoint", c.http.endpoint},
      {"model", c.http.model},
      {"api_key_env", c.http.api_key_env},
      {"timeout_s", c.http.timeout_s},
      {"http_retries", c.http.retries},
      {"max_image_side", c.http.max_image_side},
      {"ensemble", c.ensemble},
      {"ensemble_models", {c.ensemble_model_a, c.ensemble_model_b}},
      {"discriminator_model", c.discriminator_model},
      {"detector", c.detector},
      {"wall_threshold", c.wall_threshold},
      {"close_radius", c.segmentation.close_radius},
      {"background_radius", c.segmentation.background_radius},
      {"min_room_area_m2", c.segmentation.min_room_area_m2},
      {"seed_blur_sigma", c.segmentation.seeds.blur_sigma},
      {"pds_radius", c.sampling.radius},
      {"pds_padding", c.sampling.padding},
      {"pds_attempts", c.sampling.k_attempts},
      {"reasoning_retries", c.reasoning.retries},
      {"marker_margin", c.reasoning.marker_margin},
      {"replan_interval", n.replan_interval},
      {"waypoint_distance", n.waypoint_distance},
      {"prox1", n.prox1},
      {"prox2", n.prox2},
      {"final_stop_radius", n.final_stop_radius},
      {"astar_clearance_weight", n.planner.clearance_weight},
      {"astar_safe_distance", n.planner.safe_distance},
      {"vfh_sectors", n.vfh.sectors},
      {"vfh_window", n.vfh.window_radius},
      {"vfh_threshold", n.vfh.density_threshold},
      {"vfh_safety_radius", n.vfh.safety_radius},
      {"vfh_target_weight", n.vfh.target_weight},
      {"vfh_heading_weight", n.vfh.heading_weight},
      {"confidence_threshold", c.verify.confidence_threshold},
      {"approach_guard", c.verify.approach_guard},
      {"final_guard", c.verify.final_guard},
      {"detector_range", c.detection.range},
      {"depth_rays", c.sensors.rays},
      {"depth_fov_deg", rad2deg(c.sensors.fov)},
      {"depth_max_range", c.sensors.max_range},
      {"step_length", c.sensors.step_length},
      {"turn_deg", rad2deg(c.sensors.turn_angle)},
      {"camera_width", c.sensors.camera.width},
      {"camera_height", c.sensors.camera.height},
      {"camera_hfov_deg", rad2deg(c.sensors.camera.hfov)},
      {"success_metric", c.success_metric == SuccessMetric::Euclidean ? "euclidean" : "geodesic"},
      {"seed", c.seed},
      {"jobs", c.jobs},
  };
}

/// Fields absent from `j` keep their defaults. Unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig c = {}) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "config must be a JSON object");
  const nlohmann::json known = to_json(c);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw Error(ErrorCode::SchemaError, "unknown config key: " + it.key());
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    auto get_deg = [&](const char* key, double& rad) {
      if (j.contains(key)) rad = deg2rad(j.at(key).get<double>());
    };
    std::string s;
    if (j.contains("backend")) c.backend = parse_backend_kind(j.at("backend").get<std::string>());
    get("endpoint", c.http.endpoint);
    get("model", c.http.model);
    get("api_key_env", c.http.api_key_env);
    get("timeout_s", c.http.timeout_s);
    get("http_retries", c.http.retries);
    get("max_image_side", c.http.max_image_side);
    get("ensemble", c.ensemble);
    if (j.contains("ensemble_models")) {
      auto m = j.at("ensemble_models").get<std::vector<std::string>>();
      if (m.size() != 2) throw Error(ErrorCode::SchemaError, "ensemble_models needs two names");
      c.ensemble_model_a = m[0];
      c.ensemble_model_b = m[1];
    }
    get("discriminator_model", c.discriminator_model);
    get("detector", c.detector);
    get("wall_threshold", c.wall_threshold);
    get("close_radius", c.segmentation.close_radius);
    get("background_radius", c.segmentation.background_radius);
    get("min_room_area_m2", c.segmentation.min_room_area_m2);
    get("seed_blur_sigma", c.segmentation.seeds.blur_sigma);
    get("pds_radius", c.sampling.radius);
    get("pds_padding", c.sampling.padding);
    get("pds_attempts", c.sampling.k_attempts);
    get("reasoning_retries", c.reasoning.retries);
    get("marker_margin", c.reasoning.marker_margin);
    get("replan_interval", c.nav.replan_interval);
    get("waypoint_distance", c.nav.waypoint_distance);
    get("prox1", c.nav.prox1);
    get("prox2", c.nav.prox2);
    get("final_stop_radius", c.nav.final_stop_radius);
    get("astar_clearance_weight", c.nav.planner.clearance_weight);
    get("astar_safe_distance", c.nav.planner.safe_distance);
    get("vfh_sectors", c.nav.vfh.sectors);
    get("vfh_window", c.nav.vfh.window_radius);
    get("vfh_threshold", c.nav.vfh.density_threshold);
    get("vfh_safety_radius", c.nav.vfh.safety_radius);
    get("vfh_target_weight", c.nav.vfh.target_weight);
    get("vfh_heading_weight", c.nav.vfh.heading_weight);
    get("confidence_threshold", c.verify.confidence_threshold);
    get("approach_guard", c.verify.approach_guard);
    get("final_guard", c.verify.final_guard);
    get("detector_range", c.detection.range);
    get("depth_rays", c.sensors.rays);
    get_deg("depth_fov_deg", c.sensors.fov);
    get("depth_max_range", c.sensors.max_range);
    get("step_length", c.sensors.step_length);
    get_deg("turn_deg", c.sensors.turn_angle);
    get("camera_width", c.sensors.camera.width);
    get("camera_height", c.sensors.camera.height);
    get_deg("camera_hfov_deg", c.sensors.camera.hfov);
    if (j.contains("success_metric")) {
      s = j.at("success_metric").get<std::string>();
      if (s != "euclidean" && s != "geodesic") throw Error(ErrorCode::SchemaError, "success_metric: " + s);
      c.success_metric = s == "euclidean" ? SuccessMetric::Euclidean : SuccessMetric::Geodesic;
    }
    get("seed", c.seed);
    get("jobs", c.jobs);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("config: ") + e.what());
  }
  sync_derived(c);
  return c;
}

}  // namespace navkit
