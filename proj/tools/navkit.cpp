// navkit command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "navkit/navkit.hpp"

namespace fs = std::filesystem;
using namespace navkit;

namespace {

struct Options {
  std::string map, scenario, scenarios_dir, config, out = "navkit_out", trajectory;
  std::string backend = "oracle", endpoint, model, ensemble_models, discriminator_model, detector = "oracle";
  bool ensemble = false, dump_artifacts = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  double resolution = 0.05;
  std::vector<double> origin{0.0, 0.0};
  std::string polarity = "high";
  int count = 20;
};

RunConfig make_config(const Options& o) {
  RunConfig c;
  if (!o.config.empty()) {
    auto bytes = read_file(o.config);
    auto j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "config is not valid JSON");
    c = run_config_from_json(j);
  }
  c.backend = parse_backend_kind(o.backend);
  if (!o.endpoint.empty()) c.http.endpoint = o.endpoint;
  if (!o.model.empty()) c.http.model = o.model;
  if (!o.ensemble_models.empty()) {
    auto comma = o.ensemble_models.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--ensemble-models expects A,B");
    c.ensemble_model_a = o.ensemble_models.substr(0, comma);
    c.ensemble_model_b = o.ensemble_models.substr(comma + 1);
    c.ensemble = true;
  }
  if (o.ensemble) c.ensemble = true;
  if (!o.discriminator_model.empty()) c.discriminator_model = o.discriminator_model;
  c.detector = o.detector;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  sync_derived(c);
  return c;
}

// Map plus metadata, from a scenario file or from --map with explicit metadata.
struct MapInput {
  GridMap map;
  WallPolarity polarity;
  std::optional<Scenario> scenario;
};

MapInput load_map_input(const Options& o, const RunConfig& cfg) {
  if (!o.scenario.empty()) {
    Scenario s = load_scenario(o.scenario, cfg.wall_threshold);
    return {s.map, s.polarity, s};
  }
  if (o.map.empty()) throw Error(ErrorCode::InvalidArgument, "need --scenario or --map");
  if (o.origin.size() != 2) throw Error(ErrorCode::InvalidArgument, "--origin expects two numbers");
  GridMap m = navkit::load_map(read_file(o.map), {o.resolution, {o.origin[0], o.origin[1]}});
  return {m, o.polarity == "low" ? WallPolarity::Low : WallPolarity::High, std::nullopt};
}

nlohmann::json regions_json(const RoomSegmentation& seg) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : seg.regions)
    j.push_back({{"id", r.id},
                 {"area_cells", r.area},
                 {"centroid", {r.centroid.x, r.centroid.y}},
                 {"bbox", {r.bbox.row_min, r.bbox.col_min, r.bbox.row_max, r.bbox.col_max}}});
  return j;
}

nlohmann::json nodes_json(const NodeSet& nodes) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& n : nodes.nodes) j.push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}, {"room", n.region}});
  return j;
}

int cmd_segment(const Options& o) {
  RunConfig cfg = make_config(o);
  MapInput in = load_map_input(o, cfg);
  auto seg = segment_rooms(extract_wall_mask(in.map, cfg.wall_threshold, in.polarity), cfg.segmentation);
  fs::path out(o.out);
  write_file(out / "labels.pgm", encode_pgm16(seg.labels));
  write_file(out / "rooms.png", encode_png(render_room_map(in.map, seg)));
  write_file(out / "rooms.json", regions_json(seg).dump(2) + "\n");
  std::cout << seg.count() << " rooms -> " << out.string() << "\n";
  return 0;
}

int cmd_nodes(const Options& o) {
  RunConfig cfg = make_config(o);
  MapInput in = load_map_input(o, cfg);
  BinaryMask walls = extract_wall_mask(in.map, cfg.wall_threshold, in.polarity);
  auto seg = segment_rooms(walls, cfg.segmentation);
  auto nodes = assign_regions(sample_nodes(invert(walls), cfg.sampling), seg);
  fs::path out(o.out);
  write_file(out / "nodes.json", nodes_json(nodes).dump(2) + "\n");
  write_file(out / "nodes.png", encode_png(render_overlay(in.map, &seg, &nodes, {}, nullptr)));
  std::cout << nodes.size() << " nodes in " << seg.count() << " rooms -> " << out.string() << "\n";
  return 0;
}

int cmd_reason(const Options& o) {
  RunConfig cfg = make_config(o);
  if (o.scenario.empty()) throw Error(ErrorCode::InvalidArgument, "reason needs --scenario");
  Scenario s = load_scenario(o.scenario, cfg.wall_threshold);
  BinaryMask walls = extract_wall_mask(s.map, cfg.wall_threshold, s.polarity);
  auto seg = segment_rooms(walls, cfg.segmentation);
  auto nodes = assign_regions(sample_nodes(invert(walls), cfg.sampling), seg);
  GroundTruth truth{s.start.position, &seg, &nodes, cfg.reasoning.seed};
  if (const Instance* gi = nearest_goal_instance(s, walls)) truth.target = gi->center();
  BackendSet b = default_backends(cfg, truth);
  GlobalTarget t = cfg.ensemble ? ensemble_select(*b.unit_a, *b.unit_b, *b.discriminator, s.map, seg, nodes, s.goal,
                                                  cfg.reasoning)
                                      .chosen
                                : reason_global(*b.single, s.map, seg, nodes, s.goal, cfg.reasoning);
  nlohmann::json j{{"x", t.point.x}, {"y", t.point.y}, {"room", t.room}, {"node", t.node}, {"provenance", t.provenance}};
  std::cout << j.dump(2) << "\n";
  if (o.dump_artifacts) {
    fs::path out(o.out);
    write_file(out / "room_map.png", encode_png(render_room_map(s.map, seg)));
    auto imgs = render_node_map(s.map, seg.region(t.room).bbox, nodes_in_room(nodes, seg, t.room, cfg.reasoning.seed));
    write_file(out / "room_crop.png", encode_png(imgs.plain));
    write_file(out / "node_crop.png", encode_png(imgs.annotated));
    write_file(out / "room_prompt.txt", build_room_prompt(s.goal, imgs.plain).text);
    write_file(out / "node_prompt.txt", build_node_prompt(s.goal, imgs.plain, imgs.annotated).text);
  }
  return 0;
}

int cmd_run(const Options& o) {
  RunConfig cfg = make_config(o);
  if (o.scenario.empty()) throw Error(ErrorCode::InvalidArgument, "run needs --scenario");
  Scenario s = load_scenario(o.scenario, cfg.wall_threshold);
  EpisodeArtifacts art;
  EpisodeResult r = run_episode(s, cfg, default_backends, &art);
  fs::path out(o.out);
  write_file(out / (s.id + ".trajectory.jsonl"), trajectory_jsonl(r));
  write_file(out / (s.id + ".result.json"), to_json(r).dump(2) + "\n");
  if (o.dump_artifacts) write_artifacts(out / "artifacts" / s.id, s, r, art);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << to_json(r).dump(2) << "\n";
  return r.error.empty() ? 0 : 2;
}

int cmd_batch(const Options& o) {
  RunConfig cfg = make_config(o);
  if (o.scenarios_dir.empty()) throw Error(ErrorCode::InvalidArgument, "batch needs --scenarios-dir");
  BatchOptions opt{fs::path(o.out), o.dump_artifacts};
  auto results = run_batch(o.scenarios_dir, cfg, opt);
  for (const auto& r : results) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << r.scenario_id << ": " << w << "\n";
    if (!r.error.empty()) std::cerr << "error: " << r.scenario_id << ": " << r.error << "\n";
  }
  std::cout << metrics_table(results);
  return 0;
}

int cmd_render(const Options& o) {
  RunConfig cfg = make_config(o);
  if (o.scenario.empty()) throw Error(ErrorCode::InvalidArgument, "render needs --scenario");
  Scenario s = load_scenario(o.scenario, cfg.wall_threshold);
  BinaryMask walls = extract_wall_mask(s.map, cfg.wall_threshold, s.polarity);
  auto seg = segment_rooms(walls, cfg.segmentation);
  auto nodes = assign_regions(sample_nodes(invert(walls), cfg.sampling), seg);
  std::vector<WorldPoint> path{s.start.position};
  std::optional<WorldPoint> target;
  if (!o.trajectory.empty()) {
    auto bytes = read_file(o.trajectory);
    std::istringstream lines(std::string(bytes.begin(), bytes.end()));
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "bad trajectory line");
      path.push_back({j.at("x").get<double>(), j.at("y").get<double>()});
    }
  }
  if (const Instance* gi = nearest_goal_instance(s, walls)) target = gi->center();
  fs::path out(o.out);
  fs::path file = out.extension() == ".png" ? out : out / (s.id + ".png");
  write_file(file, encode_png(render_overlay(s.map, &seg, &nodes, path, target ? &*target : nullptr)));
  std::cout << file.string() << "\n";
  return 0;
}

int cmd_generate(const Options& o) {
  std::uint64_t seed = o.seed.value_or(0);
  for (int i = 0; i < o.count; ++i) std::cout << save_generated(generate_scenario(seed, i), o.out).string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navkit: map-reasoning object navigation toolkit"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--map", o.map, "Map image (PGM or PNG)");
    sub->add_option("--resolution", o.resolution, "Map resolution in meters per cell (with --map)");
    sub->add_option("--origin", o.origin, "World coordinates of the map's first cell corner (with --map)")->expected(2);
    sub->add_option("--polarity", o.polarity, "Wall polarity for --map")->check(CLI::IsMember({"high", "low"}));
    sub->add_option("--scenario", o.scenario, "Scenario JSON");
    sub->add_option("--scenarios-dir", o.scenarios_dir, "Directory of scenario JSON files");
    sub->add_option("--config", o.config, "RunConfig JSON");
    sub->add_option("--backend", o.backend, "Reasoning backend")->check(CLI::IsMember({"oracle", "adversarial", "http"}));
    sub->add_option("--endpoint", o.endpoint, "Chat-completions URL for the http backend");
    sub->add_option("--model", o.model, "Model name for the http backend");
    sub->add_flag("--ensemble", o.ensemble, "Use two reasoning units and a discriminator");
    sub->add_option("--ensemble-models", o.ensemble_models, "Models for the two units, as A,B");
    sub->add_option("--discriminator-model", o.discriminator_model, "Model for the discriminator");
    sub->add_option("--detector", o.detector, "Target detector")->check(CLI::IsMember({"oracle"}));
    sub->add_option("--seed", o.seed, "RNG seed");
    sub->add_option("--jobs", o.jobs, "Parallel episodes");
    sub->add_option("--out", o.out, "Output directory (or .png file for render)");
    sub->add_flag("--dump-artifacts", o.dump_artifacts, "Write intermediate images and prompts");
  };

  auto* segment = app.add_subcommand("segment", "Segment a map into rooms");
  auto* nodes = app.add_subcommand("nodes", "Sample navigation nodes");
  auto* reason = app.add_subcommand("reason", "Pick the global target for a scenario");
  auto* run = app.add_subcommand("run", "Run one episode");
  auto* batch = app.add_subcommand("batch", "Run every scenario in a directory");
  auto* render = app.add_subcommand("render", "Draw a trajectory over a scenario map");
  auto* generate = app.add_subcommand("generate", "Write procedurally generated scenarios");
  for (auto* s : {segment, nodes, reason, run, batch, render, generate}) common(s);
  render->add_option("--trajectory", o.trajectory, "Trajectory log (JSON lines)");
  generate->add_option("--count", o.count, "Number of scenarios");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*segment) return cmd_segment(o);
    if (*nodes) return cmd_nodes(o);
    if (*reason) return cmd_reason(o);
    if (*run) return cmd_run(o);
    if (*batch) return cmd_batch(o);
    if (*render) return cmd_render(o);
    if (*generate) return cmd_generate(o);
  } catch (const Error& e) {
    std::cerr << "navkit: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "navkit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
