#include <gtest/gtest.h>

#include <random>

#include "imd/ego_model.hpp"
#include "imd/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace imd {
namespace {

ClusterSnapshot mature(std::uint32_t id, double vx, double vy) {
  return ClusterSnapshot{id, 20, 0, Velocity{vx, vy}};
}

TEST(InstantStatistics, TooFewQualifyingClusters) {
  std::vector<ClusterSnapshot> c;
  for (std::uint32_t i = 0; i < 4; ++i) c.push_back(mature(i, 1.0 * i, 0.0));
  EXPECT_FALSE(instant_statistics(c, LearnerConfig{}));
}

TEST(InstantStatistics, IdenticalVelocities) {
  std::vector<ClusterSnapshot> c;
  for (std::uint32_t i = 0; i < 6; ++i) c.push_back(mature(i, 3.0, -1.0));
  const auto s = instant_statistics(c, LearnerConfig{});
  ASSERT_TRUE(s);
  EXPECT_EQ(s->mu[0], 3.0);
  EXPECT_EQ(s->mu[1], -1.0);
  for (const auto& row : s->cov)
    for (double v : row) EXPECT_EQ(v, 0.0);
}

TEST(InstantStatistics, HandComputedCovariance) {
  std::vector<ClusterSnapshot> c;
  for (std::uint32_t i = 1; i <= 5; ++i) c.push_back(mature(i, i, 0.0));
  const auto s = instant_statistics(c, LearnerConfig{});
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(s->mu[0], 3.0);
  EXPECT_EQ(s->mu[1], 0.0);
  EXPECT_DOUBLE_EQ(s->cov[0][0], 2.5);
  EXPECT_EQ(s->cov[0][1], 0.0);
  EXPECT_EQ(s->cov[1][1], 0.0);
}

TEST(InstantStatistics, ImmatureClustersCountTowardsHalf) {
  std::vector<ClusterSnapshot> c;
  for (std::uint32_t i = 0; i < 5; ++i) c.push_back(mature(i, i, 0.0));
  for (std::uint32_t i = 5; i < 11; ++i) c.push_back(ClusterSnapshot{i, 3, 0, std::nullopt});
  // 5 of 11 active: ceil(11/2) = 6 needed.
  EXPECT_FALSE(instant_statistics(c, LearnerConfig{}));
  c.pop_back();
  EXPECT_TRUE(instant_statistics(c, LearnerConfig{}));
}

TEST(InstantQualifies, Rule) {
  for (std::size_t active = 0; active < 40; ++active) {
    for (std::size_t q = 0; q <= active; ++q) {
      const std::size_t half = (active + 1) / 2;
      EXPECT_EQ(instant_qualifies(q, active, 5), q >= 5 && q >= half) << q << "/" << active;
    }
  }
}

// Property: collect_examples statistics match a two-pass computation.
class ScriptedSource final : public FlowStateSource {
 public:
  explicit ScriptedSource(std::vector<std::vector<ClusterSnapshot>> frames) : frames_(std::move(frames)) {}
  std::vector<ClusterSnapshot> clusters_at(Timestamp t) override { return frames_.at(t / 10'000); }
  std::optional<std::pair<Timestamp, Timestamp>> time_range() const override {
    return std::pair<Timestamp, Timestamp>{0, (frames_.size() - 1) * 10'000};
  }

 private:
  std::vector<std::vector<ClusterSnapshot>> frames_;
};

TEST(CollectExamples, TwoPassOracle) {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<int> count(5, 40);
  std::normal_distribution<double> v(0.0, 80.0);
  std::vector<std::vector<ClusterSnapshot>> frames;
  std::vector<std::vector<Velocity>> truth;
  std::vector<JointVelocity> joints;
  for (int k = 0; k < 100; ++k) {
    std::vector<ClusterSnapshot> f;
    std::vector<Velocity> vs;
    const double bias = v(rng);
    for (int i = 0; i < count(rng); ++i) {
      const Velocity vel{bias + v(rng), 1e3 + v(rng)};
      f.push_back(ClusterSnapshot{static_cast<std::uint32_t>(i), 15, 0, vel});
      vs.push_back(vel);
    }
    frames.push_back(f);
    truth.push_back(vs);
    joints.push_back({static_cast<Timestamp>(k) * 10'000, {v(rng), v(rng)}});
  }
  ScriptedSource source(frames);
  const auto ex = collect_examples(source, joints, LearnerConfig{});
  ASSERT_EQ(ex.size(), 100u);
  for (std::size_t k = 0; k < ex.size(); ++k) {
    const auto o = oracle::two_pass(truth[k]);
    const auto& s = ex[k].target;
    EXPECT_NEAR(s.mu[0], o.mx, 1e-12 * std::max(1.0, std::abs(o.mx)));
    EXPECT_NEAR(s.mu[1], o.my, 1e-12 * std::max(1.0, std::abs(o.my)));
    EXPECT_NEAR(s.cov[0][0], o.sxx, 1e-12 * std::max(1.0, o.sxx));
    EXPECT_NEAR(s.cov[0][1], o.sxy, 1e-12 * std::max(1.0, std::abs(o.sxx)));
    EXPECT_NEAR(s.cov[1][1], o.syy, 1e-12 * std::max(1.0, o.syy));
    EXPECT_EQ(s.cov[0][1], s.cov[1][0]);
    EXPECT_EQ(ex[k].input, joints[k].velocities);
  }
}

TEST(CollectExamples, NoOverlap) {
  ScriptedSource source({{mature(0, 1, 1)}});
  std::vector<JointVelocity> joints{{50'000, {1.0}}};
  EXPECT_THROW(collect_examples(source, joints, LearnerConfig{}), InsufficientDataError);
  TrackerReplay empty({}, TrackerConfig{});
  EXPECT_THROW(collect_examples(empty, joints, LearnerConfig{}), InsufficientDataError);
}

TEST(Replay, FlowReplayMatchesTrackerForMatureClusters) {
  std::mt19937_64 rng(6);
  std::vector<CornerEvent> corners;
  std::uniform_int_distribution<int> jitter(-1, 1);
  for (int i = 0; i < 3000; ++i) {
    const int lane = i % 6;
    const Timestamp t = static_cast<Timestamp>(i) * 300;
    corners.push_back(test::corner(static_cast<std::uint16_t>(30 + lane * 40 + (i / 6) % 20 + jitter(rng)),
                                   static_cast<std::uint16_t>(100 + jitter(rng)), t));
  }
  const TrackerConfig cfg;
  const auto flows = track_stream(corners, cfg);
  TrackerReplay tr(corners, cfg);
  FlowReplay fr(flows, cfg);
  for (Timestamp t = 0; t < 900'000; t += 10'000) {
    auto a = tr.clusters_at(t);
    std::erase_if(a, [&](const ClusterSnapshot& c) { return c.size < cfg.min_events; });
    const auto b = fr.clusters_at(t);
    ASSERT_EQ(a.size(), b.size()) << t;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].id, b[i].id);
      EXPECT_EQ(a[i].size, b[i].size);
      EXPECT_NEAR(a[i].velocity->vx, b[i].velocity->vx, 1e-3 * std::max(1.0, std::abs(a[i].velocity->vx)));
    }
  }
}

TEST(Regularize, ClampsAndAddsEpsilon) {
  FlowStatistics s;
  s.cov = {{{4.0, 1.0}, {1.0, 2.0}}};
  const auto r = regularize(s, 1e-6);
  EXPECT_EQ(r.cov[0][0], 4.0 + 1e-6);
  EXPECT_EQ(r.cov[1][1], 2.0 + 1e-6);
  EXPECT_EQ(r.cov[0][1], 1.0);

  s.cov = {{{1.0, 3.0}, {3.0, 1.0}}};   // eigenvalues 4 and -2
  const auto c = regularize(s, 1e-6);
  EXPECT_NEAR(c.cov[0][0], 2.0 + 1e-6, 1e-12);
  EXPECT_NEAR(c.cov[0][1], 2.0, 1e-12);
  EXPECT_GT(c.cov[0][0] * c.cov[1][1] - c.cov[0][1] * c.cov[1][0], 0.0);

  s.cov = {{{-5.0, 0.0}, {0.0, -1.0}}};
  const auto z = regularize(s, 1e-6);
  EXPECT_NEAR(z.cov[0][0], 1e-6, 1e-18);
  EXPECT_NEAR(z.cov[1][1], 1e-6, 1e-18);
}

TEST(Regularize, AlwaysPositiveDefinite) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 10000; ++i) {
    FlowStatistics s;
    const double off = u(rng);
    s.cov = {{{u(rng), off}, {off, u(rng)}}};
    const auto r = regularize(s, 1e-6);
    EXPECT_EQ(r.cov[0][1], r.cov[1][0]);
    EXPECT_GT(r.cov[0][0], 0.0);
    EXPECT_GT(r.cov[0][0] * r.cov[1][1] - r.cov[0][1] * r.cov[0][1], 0.0);
  }
}

std::vector<TrainingExample> constant_targets(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> in(-10, 10);
  std::vector<TrainingExample> ex;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample e;
    e.input = {in(rng), in(rng)};
    e.target.mu = {7.0, -3.0};
    e.target.cov = {{{5.0, 0.5}, {0.5, 2.0}}};
    ex.push_back(e);
  }
  return ex;
}

TEST(Train, ConstantFunctionRecovery) {
  std::mt19937_64 rng(11);
  // A dense sample so that every point is close to many others.
  const auto ex = constant_targets(rng, 400);
  LearnerConfig cfg;
  cfg.lambda = 1e-3;
  cfg.gamma = 0.05;
  const auto m = train(ex, cfg);
  for (const auto& e : ex) {
    const auto r = m.raw_predict(e.input);
    EXPECT_NEAR(r[kMuVx], 7.0, 1e-6);
    EXPECT_NEAR(r[kMuVy], -3.0, 1e-6);
    EXPECT_NEAR(r[kSigmaVx], 5.0, 1e-6);
  }
}

TEST(Train, SingleExampleShrinkage) {
  // One support point: K = [1], weight y / (1 + lambda), prediction at the
  // point shrunk by lambda / (1 + lambda).
  const double lambda = 0.25;
  const std::vector<std::vector<double>> support{{0.3, -0.2}};
  const auto w = kernel_ridge_weights(support, {{8.0}}, 0.7, lambda);
  EXPECT_DOUBLE_EQ(w[0][0], 8.0 / (1.0 + lambda));
  EXPECT_DOUBLE_EQ(w[0][0] * rbf_kernel(support[0], support[0], 0.7), 8.0 - 8.0 * lambda / (1.0 + lambda));
}

TEST(Train, MatchesDenseSolveOracle) {
  std::mt19937_64 rng(21);
  for (int p = 0; p < 20; ++p) {
    const auto ex = oracle::random_linear_problem(rng);
    LearnerConfig cfg;
    const auto m = train(ex, cfg);
    const auto want = oracle::krr_fit_predictions(ex, cfg.lambda);
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const auto got = m.raw_predict(ex[i].input);
      for (std::size_t o = 0; o < kOutputCount; ++o) {
        ASSERT_NEAR(got[o], want[i][o], 1e-9 * std::max(1.0, std::abs(want[i][o]))) << p << " " << i << " " << o;
      }
    }
  }
}

TEST(Train, NearInterpolationAtSupport) {
  std::mt19937_64 rng(31);
  auto ex = oracle::random_linear_problem(rng);
  LearnerConfig cfg;
  cfg.lambda = 1e-12;
  const auto m = train(ex, cfg);
  for (const auto& e : ex) {
    const auto s = m.predict(e.input);
    EXPECT_NEAR(s.mu[0], e.target.mu[0], 1e-3);
    EXPECT_NEAR(s.mu[1], e.target.mu[1], 1e-3);
    EXPECT_NEAR(s.cov[0][0], e.target.cov[0][0] + cfg.epsilon, 1e-3);
    EXPECT_NEAR(s.cov[1][1], e.target.cov[1][1] + cfg.epsilon, 1e-3);
  }
}

TEST(Train, AntisymmetricMeans) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> in(-10, 10);
  std::vector<TrainingExample> ex;
  for (int i = 0; i < 30; ++i) {
    const double a = in(rng), b = in(rng);
    for (double sgn : {1.0, -1.0}) {
      TrainingExample e;
      e.input = {sgn * a, sgn * b};
      e.target.mu = {sgn * (4 * a + std::sin(b)), sgn * (-2 * b)};
      e.target.cov = {{{3.0 + a * a, 0.0}, {0.0, 1.0 + b * b}}};
      ex.push_back(e);
    }
  }
  const auto m = train(ex, LearnerConfig{});
  for (int i = 0; i < 60; i += 2) {
    const auto p = m.predict(ex[i].input);
    const auto q = m.predict(ex[i + 1].input);
    EXPECT_NEAR(p.mu[0], -q.mu[0], 1e-3);
    EXPECT_NEAR(p.mu[1], -q.mu[1], 1e-3);
  }
}

TEST(Train, DeterministicAndPositiveDefinite) {
  std::mt19937_64 rng(51);
  auto ex = oracle::random_linear_problem(rng);
  const auto a = train(ex, LearnerConfig{});
  const auto b = train(ex, LearnerConfig{});
  EXPECT_EQ(model_to_json(a), model_to_json(b));
  std::uniform_real_distribution<double> far(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> q{far(rng), far(rng)};
    const auto s = a.predict(q);
    EXPECT_GT(s.cov[0][0], 0.0);
    EXPECT_GT(s.cov[0][0] * s.cov[1][1] - s.cov[0][1] * s.cov[1][0], 0.0);
  }
}

TEST(Train, Errors) {
  std::mt19937_64 rng(61);
  auto ex = oracle::random_linear_problem(rng);
  EXPECT_THROW(train(std::span(ex).first(1), LearnerConfig{}), InsufficientDataError);
  LearnerConfig bad;
  bad.lambda = 0.0;
  EXPECT_THROW(train(ex, bad), ConfigError);
  const auto m = train(ex, LearnerConfig{});
  EXPECT_THROW(m.predict(std::vector<double>{1.0}), ShapeError);
  // Identical inputs without a ridge term cannot be solved.
  const std::vector<std::vector<double>> same(4, std::vector<double>{1.0, 2.0});
  EXPECT_THROW(kernel_ridge_weights(same, {{1, 2, 3, 4}}, 0.5, 0.0), SingularSystemError);
}

TEST(Train, StrideSubsampling) {
  std::mt19937_64 rng(71);
  const auto ex = constant_targets(rng, 50);
  LearnerConfig cfg;
  cfg.max_examples = 10;
  const auto m = train(ex, cfg);
  EXPECT_EQ(m.support.size(), 10u);
}

TEST(MedianHeuristic, KnownDistances) {
  // Pairwise squared distances 1, 4, 9: median 4.
  const std::vector<std::vector<double>> pts{{0.0}, {1.0}, {3.0}};
  EXPECT_DOUBLE_EQ(median_heuristic_gamma(pts), 1.0 / 8.0);
  EXPECT_EQ(median_heuristic_gamma({{1.0}, {1.0}}), 1.0);
}

TEST(ModelFile, RoundTrip) {
  std::mt19937_64 rng(81);
  const auto m = train(oracle::random_linear_problem(rng), LearnerConfig{});
  test::TempDir dir("model");
  save_model(dir / "m.json", m);
  const auto back = load_model(dir / "m.json");
  EXPECT_EQ(model_to_json(back), model_to_json(m));
  EXPECT_EQ(back.weights[kMuVx], m.weights[kMuVx]);
  EXPECT_EQ(back.offset, m.offset);
  EXPECT_EQ(back.support, m.support);
  EXPECT_THROW(model_from_json("{}"), FormatError);
  EXPECT_THROW(model_from_json("not json"), FormatError);
}

}  // namespace
}  // namespace imd
