#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imd/classifier.hpp"
#include "imd/corner_detector.hpp"
#include "imd/ego_model.hpp"
#include "imd/encoder_stream.hpp"
#include "imd/evaluation.hpp"
#include "imd/flow_tracker.hpp"
#include "imd/scene_simulator.hpp"

namespace imd {

struct StageToggles {
  bool learn = true;       // train a model from the training stream
  bool classify = true;    // label the test stream
  bool evaluate = true;    // PR sweep and distance trace
};

struct PipelineConfig {
  DetectorConfig detector;
  TrackerConfig tracker;
  LearnerConfig learner;
  ClassifierConfig classifier;
  EncoderFilterConfig encoder;
  StageToggles stages;
  std::vector<double> thresholds;   // empty: default_thresholds()
  double trace_bin_s = 0.01;

  /// Checks every component; m is shared by the tracker and the learner.
  void validate() const;
};

/// A stream is either simulated from a scenario or read from files.
struct StreamInput {
  std::optional<ScenarioVariant> scenario;
  std::filesystem::path events;     // EVT0
  std::filesystem::path encoders;   // encoder CSV

  bool empty() const { return !scenario && events.empty(); }
};

struct PipelineInputs {
  StreamInput train;
  StreamInput test;
  std::optional<std::filesystem::path> model;   // used instead of learning
  std::uint64_t seed = 1;                       // train noise; test uses seed + 1
  std::filesystem::path out_dir;                // empty: keep artifacts in memory only
};

struct StreamArtifacts {
  StreamHeader header;
  std::vector<LabeledEvent> events;
  std::vector<EncoderSample> encoders;
  std::vector<JointVelocity> velocities;
  std::vector<CornerEvent> corners;
  std::vector<FlowEvent> flows;
};

struct PipelineArtifacts {
  std::optional<StreamArtifacts> train;
  std::optional<StreamArtifacts> test;
  std::optional<EgoMotionModel> model;
  std::size_t training_examples = 0;
  std::vector<Detection> detections;
  std::vector<PRPoint> pr;
  std::vector<TraceBin> trace;
  std::vector<std::filesystem::path> written;
};

/// Runs simulate -> detect-corners -> track -> learn on the training stream
/// and simulate -> detect-corners -> track -> classify -> evaluate on the test
/// stream, writing every artifact under out_dir when it is set. Any failure
/// is rethrown as StageError tagged with the stage name.
PipelineArtifacts run_pipeline(const PipelineConfig& cfg, const PipelineInputs& inputs);

/// Stage building blocks, shared with the command-line tool.
StreamArtifacts load_stream(const StreamInput& input, std::uint64_t seed, const PipelineConfig& cfg);
void write_stream(const std::filesystem::path& dir, const std::string& prefix, const StreamArtifacts& stream,
                  std::vector<std::filesystem::path>& written);

}  // namespace imd
