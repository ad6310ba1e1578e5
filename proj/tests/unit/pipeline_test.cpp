#include <gtest/gtest.h>

#include "imd/errors.hpp"
#include "imd/event_io.hpp"
#include "imd/json_io.hpp"
#include "imd/pipeline.hpp"
#include "test_support.hpp"

namespace imd {
namespace {

ScenarioVariant shortened(const std::string& preset, const std::string& variant, double duration_s) {
  auto v = find_scenario(preset, variant);
  v.duration_s = duration_s;
  return v;
}

std::string stage_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const StageError& e) {
    return e.stage();
  }
  return "";
}

TEST(Pipeline, TrainsFiveRegressorsAndWritesArtifacts) {
  test::TempDir dir("pipe");
  PipelineInputs in;
  in.train.scenario = shortened("train-static", "", 3.0);
  in.test.scenario = shortened("test-object-speed", "140", 1.5);
  in.seed = 3;
  in.out_dir = dir.path();
  const auto art = run_pipeline(PipelineConfig{}, in);
  ASSERT_TRUE(art.model);
  for (const auto& w : art.model->weights) EXPECT_EQ(w.size(), art.model->support.size());
  EXPECT_GT(art.training_examples, 10u);
  EXPECT_FALSE(art.detections.empty());
  EXPECT_EQ(art.pr.size(), 100u);

  const auto model = load_model(dir / "model.json");
  EXPECT_EQ(model_to_json(model), model_to_json(*art.model));
  // Velocities are stored as f32.
  auto narrowed = art.test->flows;
  for (auto& f : narrowed) {
    f.vx = static_cast<float>(f.vx);
    f.vy = static_cast<float>(f.vy);
  }
  const auto stored = read_flow_file(dir / "test.flw");
  ASSERT_EQ(stored.size(), narrowed.size());
  for (std::size_t i = 0; i < stored.size(); ++i) {
    ASSERT_TRUE(stored[i] == narrowed[i]) << "flow " << i;
  }
  EXPECT_EQ(read_event_file(dir / "train_corners.evt").events.size(), art.train->corners.size());
  for (const char* name : {"train.evt", "train_enc.csv", "train_vel.csv", "train.flw", "test.evt", "test_enc.csv",
                           "test_corners.evt", "detections.csv", "pr.csv", "trace.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }

  // Reusing the written model for a file-based test stream.
  PipelineInputs again;
  again.model = dir / "model.json";
  again.test.events = dir / "test.evt";
  again.test.encoders = dir / "test_enc.csv";
  const auto art2 = run_pipeline(PipelineConfig{}, again);
  ASSERT_EQ(art2.detections.size(), art.detections.size());
  for (std::size_t i = 0; i < art.detections.size(); ++i) {
    EXPECT_EQ(art2.detections[i].distance, art.detections[i].distance);
  }
}

TEST(Pipeline, SameSeedSameDigests) {
  test::TempDir a("pipe_a"), b("pipe_b");
  PipelineInputs in;
  in.train.scenario = shortened("train-static", "", 2.5);
  in.test.scenario = shortened("test-head-speed", "10", 1.0);
  in.seed = 9;
  in.out_dir = a.path();
  const auto ra = run_pipeline(PipelineConfig{}, in);
  in.out_dir = b.path();
  run_pipeline(PipelineConfig{}, in);
  ASSERT_FALSE(ra.written.empty());
  for (const auto& p : ra.written) {
    EXPECT_EQ(test::read_bytes(p), test::read_bytes(b / p.filename().string())) << p.filename();
  }
}

TEST(Pipeline, EmptyStreamReportsInsufficientDataAtLearn) {
  test::TempDir dir("pipe");
  write_event_file(dir / "empty.evt", StreamHeader{}, {});
  std::vector<EncoderSample> enc;
  for (int k = 0; k < 10; ++k) enc.push_back({static_cast<Timestamp>(k) * 10'000, {0.0, 0.0}});
  write_encoder_csv(dir / "enc.csv", enc);

  const StreamInput input{std::nullopt, dir / "empty.evt", dir / "enc.csv"};
  const auto stream = load_stream(input, 1, PipelineConfig{});
  EXPECT_TRUE(stream.corners.empty());
  EXPECT_TRUE(stream.flows.empty());

  PipelineInputs in;
  in.train = input;
  try {
    run_pipeline(PipelineConfig{}, in);
    FAIL() << "expected a learn-stage failure";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "learn");
    EXPECT_NE(std::string(e.what()).find("learn: "), std::string::npos);
  }
}

TEST(Pipeline, StageTags) {
  PipelineConfig bad;
  bad.tracker.min_events = 12;   // learner still expects 15
  PipelineInputs in;
  in.train.scenario = shortened("train-static", "", 1.0);
  EXPECT_EQ(stage_of([&] { run_pipeline(bad, in); }), "config");

  PipelineInputs missing;
  missing.train.events = "/nonexistent/x.evt";
  EXPECT_EQ(stage_of([&] { run_pipeline(PipelineConfig{}, missing); }), "load");

  PipelineInputs no_model;
  no_model.test.scenario = shortened("test-object-speed", "120", 0.5);
  PipelineConfig no_learn;
  no_learn.stages.learn = false;
  EXPECT_EQ(stage_of([&] { run_pipeline(no_learn, no_model); }), "classify");

  PipelineInputs bad_geometry;
  bad_geometry.train.scenario = shortened("train-static", "", 1.0);
  bad_geometry.train.scenario->trajectory.pan0_deg = 89.0;
  EXPECT_EQ(stage_of([&] { run_pipeline(PipelineConfig{}, bad_geometry); }), "simulate");
}

}  // namespace
}  // namespace imd
