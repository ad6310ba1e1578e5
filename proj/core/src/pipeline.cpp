#include "imd/pipeline.hpp"

#include <utility>

#include "imd/errors.hpp"
#include "imd/event_io.hpp"

namespace imd {
namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::vector<JointVelocity> velocities_of(const StreamArtifacts& stream, const PipelineConfig& cfg) {
  if (stream.encoders.empty()) throw InsufficientDataError("no encoder samples");
  return estimate_velocities(stream.encoders, cfg.encoder.alpha);
}

}  // namespace

void PipelineConfig::validate() const {
  detector.validate();
  tracker.validate();
  learner.validate();
  classifier.validate();
  encoder.validate();
  if (learner.min_events != tracker.min_events) {
    throw ConfigError("tracker and learner must share m (min_events)");
  }
  if (!(trace_bin_s > 0.0)) throw ConfigError("trace bin width must be > 0");
  for (double t : thresholds) {
    if (!(t >= 0.0)) throw ConfigError("sweep thresholds must be >= 0");
  }
}

StreamArtifacts load_stream(const StreamInput& input, std::uint64_t seed, const PipelineConfig& cfg) {
  StreamArtifacts out;
  if (input.scenario) {
    staged("simulate", [&] {
      auto sim = simulate(input.scenario->scene, input.scenario->trajectory, input.scenario->duration_s, seed);
      out.header = sim.header;
      out.events = std::move(sim.events);
      out.encoders = std::move(sim.encoders);
    });
  } else {
    staged("load", [&] {
      auto file = read_event_file(input.events);
      out.header = file.header;
      out.events = std::move(file.events);
      if (!input.encoders.empty()) out.encoders = read_encoder_csv(input.encoders);
    });
  }
  out.corners = staged("detect-corners", [&] { return detect_stream(out.events, out.header.sensor, cfg.detector); });
  out.flows = staged("track", [&] { return track_stream(out.corners, cfg.tracker); });
  return out;
}

void write_stream(const std::filesystem::path& dir, const std::string& prefix, const StreamArtifacts& stream,
                  std::vector<std::filesystem::path>& written) {
  auto emit = [&](const std::string& name) { return written.emplace_back(dir / (prefix + name)); };
  write_event_file(emit(".evt"), stream.header, stream.events);
  if (!stream.encoders.empty()) write_encoder_csv(emit("_enc.csv"), stream.encoders);
  if (!stream.velocities.empty()) write_velocity_csv(emit("_vel.csv"), stream.velocities);
  const auto corners = to_labeled_events(stream.corners);
  write_event_file(emit("_corners.evt"), stream.header, corners);
  write_flow_file(emit(".flw"), stream.flows);
}

PipelineArtifacts run_pipeline(const PipelineConfig& cfg, const PipelineInputs& inputs) {
  staged("config", [&] { cfg.validate(); });
  PipelineArtifacts art;

  if (inputs.model) {
    art.model = staged("learn", [&] { return load_model(*inputs.model); });
  } else if (cfg.stages.learn) {
    if (inputs.train.empty()) throw StageError("learn", "no training stream given");
    art.train = load_stream(inputs.train, inputs.seed, cfg);
    art.model = staged("learn", [&] {
      auto& train = *art.train;
      train.velocities = velocities_of(train, cfg);
      TrackerReplay replay(train.corners, cfg.tracker);
      const auto examples = collect_examples(replay, train.velocities, cfg.learner);
      art.training_examples = examples.size();
      return imd::train(examples, cfg.learner);
    });
  }

  if (!inputs.test.empty()) {
    art.test = load_stream(inputs.test, inputs.seed + 1, cfg);
    if (cfg.stages.classify) {
      art.detections = staged("classify", [&] {
        if (!art.model) throw InsufficientDataError("no model: enable learning or pass a model file");
        auto& test = *art.test;
        test.velocities = velocities_of(test, cfg);
        return classify_stream(test.flows, *art.model, test.velocities, cfg.classifier);
      });
      if (cfg.stages.evaluate) {
        staged("evaluate", [&] {
          const auto thresholds = cfg.thresholds.empty() ? default_thresholds() : cfg.thresholds;
          art.pr = pr_sweep(art.detections, thresholds);
          art.trace = distance_trace(art.detections, cfg.trace_bin_s);
        });
      }
    }
  }

  if (!inputs.out_dir.empty()) {
    staged("write", [&] {
      std::filesystem::create_directories(inputs.out_dir);
      const auto& dir = inputs.out_dir;
      if (art.train) write_stream(dir, "train", *art.train, art.written);
      if (art.model) save_model(art.written.emplace_back(dir / "model.json"), *art.model);
      if (art.test) write_stream(dir, "test", *art.test, art.written);
      if (cfg.stages.classify && art.test) {
        write_detections_csv(art.written.emplace_back(dir / "detections.csv"), art.detections);
      }
      if (cfg.stages.classify && cfg.stages.evaluate && art.test) {
        write_pr_csv(art.written.emplace_back(dir / "pr.csv"), art.pr);
        write_trace_csv(art.written.emplace_back(dir / "trace.csv"), art.trace);
      }
    });
  }
  return art;
}

}  // namespace imd
