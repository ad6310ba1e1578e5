#include "imd/json_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "imd/errors.hpp"

namespace imd {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<T>();
  }
}

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Wraps library type errors (wrong JSON types) as configuration errors.
template <typename Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

// Texture and scene ----------------------------------------------------------

ordered_json texture_json(const TextureSpec& t) {
  ordered_json j;
  j["kind"] = t.kind == TextureKind::Checkerboard ? "checkerboard" : "blobs";
  j["cell_m"] = t.cell_m;
  j["edge_m"] = t.edge_m;
  j["mean_log"] = t.mean_log;
  j["amplitude"] = t.amplitude;
  j["phase_u_m"] = t.phase_u_m;
  j["phase_v_m"] = t.phase_v_m;
  j["angle_deg"] = t.angle_deg;
  j["seed"] = t.seed;
  return j;
}

void texture_from(const json& j, const std::string& where, TextureSpec& t) {
  check_keys(j, where, {"kind", "cell_m", "edge_m", "mean_log", "amplitude", "phase_u_m", "phase_v_m", "angle_deg", "seed"});
  if (j.contains("kind")) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "checkerboard") {
      t.kind = TextureKind::Checkerboard;
    } else if (kind == "blobs") {
      t.kind = TextureKind::Blobs;
    } else {
      throw ConfigError(where + ": unknown texture kind '" + kind + "'");
    }
  }
  read(j, "cell_m", t.cell_m);
  read(j, "edge_m", t.edge_m);
  read(j, "mean_log", t.mean_log);
  read(j, "amplitude", t.amplitude);
  read(j, "phase_u_m", t.phase_u_m);
  read(j, "phase_v_m", t.phase_v_m);
  read(j, "angle_deg", t.angle_deg);
  read(j, "seed", t.seed);
}

ordered_json scene_json(const SceneConfig& s) {
  ordered_json j;
  j["sensor_width"] = s.sensor.width;
  j["sensor_height"] = s.sensor.height;
  j["focal_length_px"] = s.focal_length_px;
  j["background"] = texture_json(s.background);
  j["background_depth_m"] = s.background_depth_m;
  j["contrast_threshold"] = s.contrast_threshold;
  j["render_rate_hz"] = s.render_rate_hz;
  j["noise_rate_hz"] = s.noise_rate_hz;
  j["label_margin_px"] = s.label_margin_px;
  return j;
}

void scene_from(const json& j, SceneConfig& s) {
  check_keys(j, "scene", {"sensor_width", "sensor_height", "focal_length_px", "background", "background_depth_m",
                          "contrast_threshold", "render_rate_hz", "noise_rate_hz", "label_margin_px"});
  read(j, "sensor_width", s.sensor.width);
  read(j, "sensor_height", s.sensor.height);
  read(j, "focal_length_px", s.focal_length_px);
  if (j.contains("background")) texture_from(j.at("background"), "scene.background", s.background);
  read(j, "background_depth_m", s.background_depth_m);
  read(j, "contrast_threshold", s.contrast_threshold);
  read(j, "render_rate_hz", s.render_rate_hz);
  read(j, "noise_rate_hz", s.noise_rate_hz);
  read(j, "label_margin_px", s.label_margin_px);
}

ordered_json trajectory_json(const TrajectorySpec& t) {
  ordered_json j;
  j["pan0_deg"] = t.pan0_deg;
  j["tilt0_deg"] = t.tilt0_deg;
  auto camera = ordered_json::array();
  for (const auto& s : t.camera) {
    camera.push_back(ordered_json{{"duration_s", s.duration_s}, {"pan_rate_dps", s.pan_rate_dps},
                                  {"tilt_rate_dps", s.tilt_rate_dps}});
  }
  j["camera"] = std::move(camera);
  if (t.object) {
    const auto& o = *t.object;
    ordered_json obj;
    obj["width_m"] = o.width_m;
    obj["height_m"] = o.height_m;
    obj["depth_m"] = o.depth_m;
    obj["x0_m"] = o.x0_m;
    obj["y0_m"] = o.y0_m;
    obj["texture"] = texture_json(o.texture);
    auto segments = ordered_json::array();
    for (const auto& s : o.segments) {
      segments.push_back(ordered_json{{"duration_s", s.duration_s}, {"vx_mps", s.vx_mps}, {"vy_mps", s.vy_mps}});
    }
    obj["segments"] = std::move(segments);
    j["object"] = std::move(obj);
  } else {
    j["object"] = nullptr;
  }
  return j;
}

void trajectory_from(const json& j, TrajectorySpec& t) {
  check_keys(j, "trajectory", {"pan0_deg", "tilt0_deg", "camera", "object"});
  read(j, "pan0_deg", t.pan0_deg);
  read(j, "tilt0_deg", t.tilt0_deg);
  if (j.contains("camera")) {
    t.camera.clear();
    for (const auto& s : j.at("camera")) {
      check_keys(s, "trajectory.camera[]", {"duration_s", "pan_rate_dps", "tilt_rate_dps"});
      JointSegment seg;
      read(s, "duration_s", seg.duration_s);
      read(s, "pan_rate_dps", seg.pan_rate_dps);
      read(s, "tilt_rate_dps", seg.tilt_rate_dps);
      t.camera.push_back(seg);
    }
  }
  if (j.contains("object")) {
    const auto& o = j.at("object");
    if (o.is_null()) {
      t.object.reset();
      return;
    }
    check_keys(o, "trajectory.object", {"width_m", "height_m", "depth_m", "x0_m", "y0_m", "texture", "segments"});
    ObjectSpec obj = t.object.value_or(ObjectSpec{});
    read(o, "width_m", obj.width_m);
    read(o, "height_m", obj.height_m);
    read(o, "depth_m", obj.depth_m);
    read(o, "x0_m", obj.x0_m);
    read(o, "y0_m", obj.y0_m);
    if (o.contains("texture")) texture_from(o.at("texture"), "trajectory.object.texture", obj.texture);
    if (o.contains("segments")) {
      obj.segments.clear();
      for (const auto& s : o.at("segments")) {
        check_keys(s, "trajectory.object.segments[]", {"duration_s", "vx_mps", "vy_mps"});
        ObjectSegment seg;
        read(s, "duration_s", seg.duration_s);
        read(s, "vx_mps", seg.vx_mps);
        read(s, "vy_mps", seg.vy_mps);
        obj.segments.push_back(seg);
      }
    }
    t.object = std::move(obj);
  }
}

std::string anchor_name(DistanceAnchor a) { return a == DistanceAnchor::LastMember ? "last_member" : "centroid"; }

}  // namespace

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  ordered_json j;
  j["detector"] = ordered_json{{"l", cfg.detector.radius},
                               {"harris_k", cfg.detector.harris_k},
                               {"harris_threshold", cfg.detector.threshold},
                               {"sigma", optional_json(cfg.detector.gaussian_sigma)},
                               {"kernel", cfg.detector.kernel == GradientKernel::Sobel5 ? "sobel5" : "sobel3"},
                               {"split_polarity", cfg.detector.split_polarity},
                               {"skip_border", cfg.detector.skip_border}};
  j["tracker"] = ordered_json{{"D", cfg.tracker.max_distance},
                              {"S", cfg.tracker.max_size},
                              {"m", cfg.tracker.min_events},
                              {"t_refresh_s", cfg.tracker.refresh_s},
                              {"anchor", anchor_name(cfg.tracker.anchor)}};
  j["learner"] = ordered_json{{"n", cfg.learner.min_clusters},
                              {"gamma", optional_json(cfg.learner.gamma)},
                              {"lambda", cfg.learner.lambda},
                              {"epsilon", cfg.learner.epsilon},
                              {"max_examples", cfg.learner.max_examples}};
  j["classifier"] = ordered_json{{"T", cfg.classifier.threshold}};
  j["encoder"] = ordered_json{{"alpha", cfg.encoder.alpha}};
  j["stages"] = ordered_json{
      {"learn", cfg.stages.learn}, {"classify", cfg.stages.classify}, {"evaluate", cfg.stages.evaluate}};
  j["evaluation"] = ordered_json{{"thresholds", cfg.thresholds}, {"trace_bin_s", cfg.trace_bin_s}};
  return j.dump(2) + "\n";
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  const json j = parse(text, "pipeline config");
  PipelineConfig cfg;
  guarded("pipeline config", [&] {
    check_keys(j, "config", {"detector", "tracker", "learner", "classifier", "encoder", "stages", "evaluation"});
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      check_keys(d, "detector", {"l", "harris_k", "harris_threshold", "sigma", "kernel", "split_polarity", "skip_border"});
      read(d, "l", cfg.detector.radius);
      read(d, "harris_k", cfg.detector.harris_k);
      read(d, "harris_threshold", cfg.detector.threshold);
      read_optional(d, "sigma", cfg.detector.gaussian_sigma);
      if (d.contains("kernel")) {
        const auto k = d.at("kernel").get<std::string>();
        if (k == "sobel5") {
          cfg.detector.kernel = GradientKernel::Sobel5;
        } else if (k == "sobel3") {
          cfg.detector.kernel = GradientKernel::Sobel3;
        } else {
          throw ConfigError("detector: unknown kernel '" + k + "'");
        }
      }
      read(d, "split_polarity", cfg.detector.split_polarity);
      read(d, "skip_border", cfg.detector.skip_border);
    }
    if (j.contains("tracker")) {
      const auto& t = j.at("tracker");
      check_keys(t, "tracker", {"D", "S", "m", "t_refresh_s", "anchor"});
      read(t, "D", cfg.tracker.max_distance);
      read(t, "S", cfg.tracker.max_size);
      read(t, "m", cfg.tracker.min_events);
      read(t, "t_refresh_s", cfg.tracker.refresh_s);
      if (t.contains("anchor")) {
        const auto a = t.at("anchor").get<std::string>();
        if (a == "last_member") {
          cfg.tracker.anchor = DistanceAnchor::LastMember;
        } else if (a == "centroid") {
          cfg.tracker.anchor = DistanceAnchor::Centroid;
        } else {
          throw ConfigError("tracker: unknown anchor '" + a + "'");
        }
      }
    }
    cfg.learner.min_events = cfg.tracker.min_events;
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      check_keys(l, "learner", {"n", "gamma", "lambda", "epsilon", "max_examples"});
      read(l, "n", cfg.learner.min_clusters);
      read_optional(l, "gamma", cfg.learner.gamma);
      read(l, "lambda", cfg.learner.lambda);
      read(l, "epsilon", cfg.learner.epsilon);
      read(l, "max_examples", cfg.learner.max_examples);
    }
    if (j.contains("classifier")) {
      check_keys(j.at("classifier"), "classifier", {"T"});
      read(j.at("classifier"), "T", cfg.classifier.threshold);
    }
    if (j.contains("encoder")) {
      check_keys(j.at("encoder"), "encoder", {"alpha"});
      read(j.at("encoder"), "alpha", cfg.encoder.alpha);
    }
    if (j.contains("stages")) {
      const auto& s = j.at("stages");
      check_keys(s, "stages", {"learn", "classify", "evaluate"});
      read(s, "learn", cfg.stages.learn);
      read(s, "classify", cfg.stages.classify);
      read(s, "evaluate", cfg.stages.evaluate);
    }
    if (j.contains("evaluation")) {
      const auto& e = j.at("evaluation");
      check_keys(e, "evaluation", {"thresholds", "trace_bin_s"});
      read(e, "thresholds", cfg.thresholds);
      read(e, "trace_bin_s", cfg.trace_bin_s);
    }
  });
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return pipeline_config_from_json(slurp(path));
}

std::string scenario_to_json(const ScenarioVariant& scenario) {
  ordered_json j;
  j["name"] = scenario.name;
  j["duration_s"] = scenario.duration_s;
  j["scene"] = scene_json(scenario.scene);
  j["trajectory"] = trajectory_json(scenario.trajectory);
  auto pauses = ordered_json::array();
  for (const auto& p : scenario.object_pauses) pauses.push_back(ordered_json::array({p[0], p[1]}));
  j["object_pauses"] = std::move(pauses);
  return j.dump(2) + "\n";
}

ScenarioVariant scenario_from_json(const std::string& text) {
  const json j = parse(text, "scenario");
  return guarded("scenario", [&] {
    check_keys(j, "scenario", {"preset", "variant", "name", "duration_s", "scene", "trajectory", "object_pauses"});
    ScenarioVariant v;
    if (j.contains("preset")) {
      v = find_scenario(j.at("preset").get<std::string>(), j.value("variant", std::string()));
    } else if (j.contains("variant")) {
      throw ConfigError("scenario: 'variant' requires 'preset'");
    } else {
      v.name = "custom";
    }
    read(j, "name", v.name);
    read(j, "duration_s", v.duration_s);
    if (j.contains("scene")) scene_from(j.at("scene"), v.scene);
    if (j.contains("trajectory")) trajectory_from(j.at("trajectory"), v.trajectory);
    if (j.contains("object_pauses")) v.object_pauses = j.at("object_pauses").get<std::vector<std::array<double, 2>>>();
    if (!(v.duration_s > 0.0)) throw ConfigError("scenario: duration_s must be > 0");
    return v;
  });
}

ScenarioVariant load_scenario(const std::filesystem::path& path) { return scenario_from_json(slurp(path)); }

ScenarioVariant resolve_scenario(const std::string& spec) {
  if (spec.ends_with(".json") || std::filesystem::is_regular_file(spec)) return load_scenario(spec);
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return find_scenario(spec);
  return find_scenario(spec.substr(0, colon), spec.substr(colon + 1));
}

}  // namespace imd
