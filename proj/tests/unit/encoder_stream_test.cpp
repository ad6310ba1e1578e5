#include <gtest/gtest.h>

#include <random>

#include "imd/encoder_stream.hpp"
#include "imd/errors.hpp"

namespace imd {
namespace {

std::vector<EncoderSample> ramp(double rate_dps, int n) {
  std::vector<EncoderSample> s;
  for (int k = 0; k < n; ++k) s.push_back({static_cast<Timestamp>(k) * 10'000, {rate_dps * 0.01 * k, 2.0}});
  return s;
}

TEST(EstimateVelocities, RampWithAlphaOne) {
  const auto v = estimate_velocities(ramp(10.0, 20), 1.0);
  ASSERT_EQ(v.size(), 19u);
  for (const auto& jv : v) {
    EXPECT_NEAR(jv.velocities[0], 10.0, 1e-9);
    EXPECT_EQ(jv.velocities[1], 0.0);
  }
  EXPECT_EQ(v.front().t, 10'000u);
}

TEST(EstimateVelocities, ConstantPositions) {
  std::vector<EncoderSample> s;
  for (int k = 0; k < 10; ++k) s.push_back({static_cast<Timestamp>(k) * 10'000, {3.0, -1.0}});
  for (const auto& jv : estimate_velocities(s, 0.5)) {
    EXPECT_EQ(jv.velocities[0], 0.0);
    EXPECT_EQ(jv.velocities[1], 0.0);
  }
}

TEST(EstimateVelocities, StepDecaysGeometrically) {
  std::vector<EncoderSample> s;
  for (int k = 0; k < 12; ++k) s.push_back({static_cast<Timestamp>(k) * 10'000, {k >= 4 ? 1.0 : 0.0}});
  const double alpha = 0.5;
  const auto v = estimate_velocities(s, alpha);
  // Hand-rolled recurrence, seeded with the first raw difference.
  double expect = 0.0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double raw = (s[k].positions[0] - s[k - 1].positions[0]) / 0.01;
    expect = k == 1 ? raw : alpha * raw + (1 - alpha) * expect;
    EXPECT_DOUBLE_EQ(v[k - 1].velocities[0], expect) << k;
  }
  EXPECT_DOUBLE_EQ(v[3].velocities[0], 50.0);
  EXPECT_DOUBLE_EQ(v[4].velocities[0], 25.0);
}

TEST(EstimateVelocities, Errors) {
  EXPECT_THROW(estimate_velocities(ramp(1, 1), 0.5), InsufficientDataError);
  auto s = ramp(1, 5);
  s[3].t = s[2].t;
  EXPECT_THROW(estimate_velocities(s, 0.5), OrderingError);
  s = ramp(1, 5);
  s[2].positions.push_back(0.0);
  EXPECT_THROW(estimate_velocities(s, 0.5), ShapeError);
  EXPECT_THROW(estimate_velocities(ramp(1, 5), 0.0), ConfigError);
  EXPECT_THROW(estimate_velocities(ramp(1, 5), 1.5), ConfigError);
}

TEST(EstimateVelocities, LinearInPositions) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 3.0);
  std::vector<EncoderSample> s, scaled;
  double p = 0.0;
  for (int k = 0; k < 200; ++k) {
    p += n(rng);
    s.push_back({static_cast<Timestamp>(k) * 10'000, {p}});
    scaled.push_back({s.back().t, {4.0 * p}});
  }
  const auto a = estimate_velocities(s, 0.5);
  const auto b = estimate_velocities(scaled, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i].velocities[0], 4.0 * a[i].velocities[0], 1e-9);
}

TEST(EstimateVelocities, AlphaOneIsRawDifference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  std::uniform_int_distribution<Timestamp> gap(5'000, 15'000);
  std::vector<EncoderSample> s;
  Timestamp t = 0;
  for (int k = 0; k < 100; ++k) {
    t += gap(rng);
    s.push_back({t, {u(rng), u(rng)}});
  }
  const auto v = estimate_velocities(s, 1.0);
  for (std::size_t k = 1; k < s.size(); ++k) {
    const double dt = seconds_between(s[k].t, s[k - 1].t);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_EQ(v[k - 1].velocities[j], (s[k].positions[j] - s[k - 1].positions[j]) / dt);
    }
  }
}

TEST(JointVelocityLookup, ZeroOrderHold) {
  std::vector<JointVelocity> v{{100, {1}}, {200, {2}}, {300, {3}}};
  const JointVelocityLookup lookup(v);
  EXPECT_EQ(lookup.index_at(50), -1);
  EXPECT_EQ(lookup.at(50), nullptr);
  EXPECT_EQ(lookup.index_at(100), 0);
  EXPECT_EQ(lookup.index_at(250), 1);
  EXPECT_EQ(lookup.at(1000)->velocities[0], 3.0);
}

}  // namespace
}  // namespace imd
