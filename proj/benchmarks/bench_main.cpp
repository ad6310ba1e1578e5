#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "imd/corner_detector.hpp"
#include "imd/ego_model.hpp"
#include "imd/flow_tracker.hpp"
#include "imd/local_surface.hpp"
#include "imd/scene_simulator.hpp"

namespace {

using namespace imd;

std::vector<Event> random_events(std::size_t n, SensorSize sensor, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> x(0, sensor.width - 1), y(0, sensor.height - 1), p(0, 1);
  std::vector<Event> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(Event{static_cast<std::uint16_t>(x(rng)), static_cast<std::uint16_t>(y(rng)),
                        p(rng) ? Polarity::On : Polarity::Off, i + 1});
  }
  return out;
}

void BM_SurfaceUpdate(benchmark::State& state) {
  const SensorSize sensor{304, 240};
  const auto events = random_events(1 << 16, sensor, 1);
  LocalSurface surface(sensor, static_cast<int>(state.range(0)));
  std::size_t i = 0;
  Timestamp offset = 0;
  for (auto _ : state) {
    Event e = events[i];
    e.t += offset;
    surface.update(e);
    if (++i == events.size()) i = 0, offset += events.size();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SurfaceUpdate)->Arg(3)->Arg(5)->Arg(7);

void BM_HarrisResponse(benchmark::State& state) {
  DetectorConfig cfg;
  cfg.radius = static_cast<int>(state.range(0));
  const HarrisScorer scorer(cfg);
  BinaryPatch patch(cfg.radius);
  for (int d = 0; d <= cfg.radius; ++d) {
    patch.set_offset(d, 0);
    patch.set_offset(0, d);
  }
  for (auto _ : state) benchmark::DoNotOptimize(scorer.response(patch));
}
BENCHMARK(BM_HarrisResponse)->Arg(3)->Arg(5)->Arg(7);

void BM_TrackerStep(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<CornerEvent> corners;
  for (std::size_t i = 0; i < 1 << 16; ++i) {
    const double t = static_cast<double>(i) * 1e-4;
    const int track = static_cast<int>(i % 32);
    const double x = 20 + 8 * (track % 8) + 30 * t + jitter(rng);
    const double y = 20 + 40 * (track / 8) + 10 * t + jitter(rng);
    CornerEvent c;
    c.event = Event{static_cast<std::uint16_t>(std::clamp(x, 0.0, 303.0)),
                    static_cast<std::uint16_t>(std::clamp(y, 0.0, 239.0)), Polarity::On, i + 1};
    corners.push_back(c);
  }
  for (auto _ : state) {
    FlowTracker tracker(TrackerConfig{});
    for (const auto& c : corners) benchmark::DoNotOptimize(tracker.step(c));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corners.size()));
}
BENCHMARK(BM_TrackerStep)->Unit(benchmark::kMillisecond);

void BM_ModelPredict(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<TrainingExample> examples;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    TrainingExample e;
    e.t = static_cast<Timestamp>(i);
    e.input = {u(rng), u(rng)};
    e.target.mu = {e.input[0] * 4.4, e.input[1] * 4.4};
    e.target.cov = {{{25.0, 1.0}, {1.0, 16.0}}};
    examples.push_back(e);
  }
  const auto model = train(examples, LearnerConfig{});
  const std::vector<double> query{1.0, -2.0};
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(query));
}
BENCHMARK(BM_ModelPredict)->Arg(100)->Arg(1500);

void BM_SimulateFrames(benchmark::State& state) {
  auto scenario = find_scenario("test-object-speed", "130");
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(scenario.scene, scenario.trajectory, 0.1, 1));
  }
  state.SetItemsProcessed(state.iterations() * 100);   // frames
}
BENCHMARK(BM_SimulateFrames)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
