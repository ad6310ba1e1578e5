#include <gtest/gtest.h>

#include <random>
#include <set>
#include <tuple>

#include "imd/corner_detector.hpp"
#include "imd/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace imd {
namespace {

// Measured once with the default configuration and frozen.
constexpr double kFrozenLResponse = 29.162626180425185;
constexpr std::size_t kFrozenNoiseCorners = 68;

BinaryPatch l_patch(int l) {
  BinaryPatch p(l);
  for (int d = 0; d <= l; ++d) p.set_offset(d, 0);
  for (int d = 1; d < l; ++d) p.set_offset(0, d);
  return p;
}

BinaryPatch edge_patch(int l) {
  BinaryPatch p(l);
  for (int d = -l; d <= l; ++d) p.set_offset(d, 0);
  return p;
}

TEST(Harris, ZeroPatchHasZeroResponse) {
  const DetectorConfig cfg;
  EXPECT_EQ(HarrisScorer(cfg).response(BinaryPatch(cfg.radius)), 0.0);
}

TEST(Harris, StraightEdgeStaysBelowThreshold) {
  const DetectorConfig cfg;
  const auto p = edge_patch(cfg.radius);
  const double r = HarrisScorer(cfg).response(p);
  EXPECT_NEAR(r, oracle::harris(p.cells(), cfg.radius, cfg.harris_k, cfg.sigma()), 1e-9);
  EXPECT_LT(r, cfg.threshold);
}

TEST(Harris, SyntheticLReachesThreshold) {
  const DetectorConfig cfg;
  const auto p = l_patch(cfg.radius);
  ASSERT_EQ(p.count(), 2 * cfg.radius);   // what a full window can hold
  const double r = HarrisScorer(cfg).response(p);
  EXPECT_NEAR(r, oracle::harris(p.cells(), cfg.radius, cfg.harris_k, cfg.sigma()), 1e-9);
  EXPECT_GE(r, cfg.threshold);
  // Calibration value the default threshold was chosen against.
  EXPECT_NEAR(r, kFrozenLResponse, 1e-6);
}

// Property: the scatter implementation equals dense correlation on random
// patches for both kernels and several radii.
class HarrisOracle : public ::testing::TestWithParam<std::tuple<int, GradientKernel>> {};

TEST_P(HarrisOracle, MatchesDenseCorrelation) {
  const auto [l, kernel] = GetParam();
  DetectorConfig cfg;
  cfg.radius = l;
  cfg.kernel = kernel;
  const HarrisScorer scorer(cfg);
  std::mt19937_64 rng(99 + l);
  std::uniform_int_distribution<int> off(-l, l), cnt(0, 2 * l);
  for (int trial = 0; trial < 300; ++trial) {
    BinaryPatch p(l);
    const int n = cnt(rng);
    for (int i = 0; i < n; ++i) p.set_offset(off(rng), off(rng));
    const double want = oracle::harris(p.cells(), l, cfg.harris_k, cfg.sigma(), kernel == GradientKernel::Sobel5);
    ASSERT_NEAR(scorer.response(p), want, 1e-9 * std::max(1.0, std::abs(want)));
  }
}

INSTANTIATE_TEST_SUITE_P(Kernels, HarrisOracle,
                         ::testing::Combine(::testing::Values(2, 3, 5, 7),
                                            ::testing::Values(GradientKernel::Sobel3, GradientKernel::Sobel5)));

TEST(DetectorConfig, Validation) {
  DetectorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.radius = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.threshold = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.harris_k = 0.25;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gaussian_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_DOUBLE_EQ(DetectorConfig{}.sigma(), 2.5);
}

TEST(DetectStream, EmptyStream) {
  EXPECT_TRUE(detect_stream({}, SensorSize{}, DetectorConfig{}).empty());
}

TEST(DetectStream, LCornerFiresAndBorderIsSkipped) {
  DetectorConfig cfg;
  std::vector<LabeledEvent> events;
  Timestamp t = 1;
  auto add = [&](int x, int y) {
    events.push_back({Event{static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), Polarity::On, t++},
                      Label::Background});
  };
  for (int d = 5; d >= 1; --d) add(100 + d, 100);
  for (int d = 4; d >= 1; --d) add(100, 100 + d);
  add(100, 100);
  const auto corners = detect_stream(events, SensorSize{}, cfg);
  ASSERT_FALSE(corners.empty());
  EXPECT_EQ(corners.back().event, events.back().event);
  EXPECT_EQ(corners.back().label, Label::Background);

  // Same shape against the sensor edge is never reported.
  events.clear();
  for (int d = 5; d >= 1; --d) add(2 + d, 2);
  for (int d = 4; d >= 1; --d) add(2, 2 + d);
  add(2, 2);
  EXPECT_TRUE(detect_stream(events, SensorSize{}, cfg).empty());
  cfg.skip_border = false;
  EXPECT_FALSE(detect_stream(events, SensorSize{}, cfg).empty());
}

TEST(DetectStream, SubsequenceScoreAndDeterminism) {
  std::mt19937_64 rng(17);
  const SensorSize sensor{64, 48};
  // Dense random activity so that some corners appear.
  const auto events = test::random_events(rng, sensor, 20000, 3);
  const DetectorConfig cfg;
  const auto a = detect_stream(events, sensor, cfg);
  const auto b = detect_stream(events, sensor, cfg);
  ASSERT_EQ(a.size(), b.size());
  std::set<std::tuple<Timestamp, int, int, int>> input;
  for (const auto& e : events) input.emplace(e.event.t, e.event.x, e.event.y, static_cast<int>(e.event.polarity));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].event, b[i].event);
    EXPECT_EQ(a[i].score, b[i].score);
    EXPECT_GE(a[i].score, cfg.threshold);
    EXPECT_TRUE(input.count({a[i].event.t, a[i].event.x, a[i].event.y, static_cast<int>(a[i].event.polarity)}));
  }
  EXPECT_FALSE(a.empty());
}

TEST(DetectStream, SparseNoiseRarelyFires) {
  // 0.01 events per pixel per second over a full sensor for 10 s.
  std::mt19937_64 rng(2024);
  const SensorSize sensor{};
  const std::size_t n = static_cast<std::size_t>(0.01 * sensor.width * sensor.height * 10.0);
  const auto events = test::random_events(rng, sensor, n, 2 * 10'000'000 / n);
  const auto corners = detect_stream(events, sensor, DetectorConfig{});
  const double rate = static_cast<double>(corners.size()) / static_cast<double>(events.size());
  EXPECT_LT(rate, 0.01);
  EXPECT_EQ(corners.size(), kFrozenNoiseCorners);
}

TEST(LabeledRoundTrip, CornersSurviveConversion) {
  std::vector<CornerEvent> corners{test::corner(3, 4, 10, Label::IndependentMotion), test::corner(5, 6, 11)};
  const auto back = from_labeled_events(to_labeled_events(corners));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].event, corners[0].event);
  EXPECT_EQ(back[0].label, Label::IndependentMotion);
}

}  // namespace
}  // namespace imd
