#include <algorithm>
#include <gtest/gtest.h>

#include <random>

#include "imd/errors.hpp"
#include "imd/evaluation.hpp"
#include "test_support.hpp"

namespace imd {
namespace {

Detection det(Timestamp t, double distance, Label gt, std::uint32_t cluster = 0, std::uint16_t x = 10) {
  return Detection{FlowEvent{Event{x, 20, Polarity::On, t}, gt, 0.0, 0.0, cluster}, distance,
                   classify(distance, 4.0)};
}

TEST(LogSpaced, EndpointsAndCount) {
  const auto t = default_thresholds();
  ASSERT_EQ(t.size(), 100u);
  EXPECT_DOUBLE_EQ(t.front(), 0.1);
  EXPECT_DOUBLE_EQ(t.back(), 50.0);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(t[i] / t[i - 1], t[1] / t[0], 1e-12);
}

TEST(PrSweep, FourEventHandExample) {
  const std::vector<Detection> d{det(1, 10, Label::IndependentMotion), det(2, 10, Label::IndependentMotion),
                                 det(3, 1, Label::Background), det(4, 1, Label::Background)};
  const std::vector<double> thresholds{0.5, 4.0, 20.0};
  const auto pr = pr_sweep(d, thresholds);
  ASSERT_EQ(pr.size(), 3u);
  EXPECT_DOUBLE_EQ(*pr[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(*pr[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(*pr[1].precision, 1.0);
  EXPECT_DOUBLE_EQ(*pr[1].recall, 1.0);
  EXPECT_FALSE(pr[2].precision);
  EXPECT_DOUBLE_EQ(*pr[2].recall, 0.0);
  EXPECT_EQ(pr[2].fn, 2u);
}

TEST(PrSweep, AllBackgroundIsUndefined) {
  const std::vector<Detection> d{det(1, 0.5, Label::Background), det(2, 0.7, Label::Background)};
  const std::vector<double> thresholds{10.0};
  const auto pr = pr_sweep(d, thresholds);
  EXPECT_FALSE(pr[0].precision);
  EXPECT_FALSE(pr[0].recall);

  test::TempDir dir("pr");
  write_pr_csv(dir / "pr.csv", pr);
  EXPECT_EQ(test::read_bytes(dir / "pr.csv"), "threshold,precision,recall,tp,fp,fn\n10,,,0,0,0\n");
}

TEST(PrSweep, UnknownGroundTruthIsAnError) {
  const std::vector<Detection> d{det(1, 0.5, Label::Unknown)};
  EXPECT_THROW(pr_sweep(d, default_thresholds()), FormatError);
}

std::vector<Detection> separable(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> obj(6.0, 30.0), bg(0.0, 3.0);
  std::vector<Detection> d;
  for (Timestamp t = 0; t < 2'000'000; t += 500) {
    d.push_back(det(t, bg(rng), Label::Background, static_cast<std::uint32_t>(t / 100'000 % 4)));
    if (t % 1500 == 0) d.push_back(det(t, obj(rng), Label::IndependentMotion, 100));
  }
  return d;
}

TEST(PrSweep, SeparablePlateauAndProperties) {
  std::mt19937_64 rng(1);
  const auto d = separable(rng);
  const auto thresholds = default_thresholds();
  const auto pr = pr_sweep(d, thresholds);
  std::uint64_t objects = 0;
  for (const auto& x : d) objects += x.flow.label == Label::IndependentMotion;
  std::size_t first = pr.size(), last = 0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    EXPECT_EQ(pr[i].tp + pr[i].fn, objects);
    if (i > 0 && pr[i].recall && pr[i - 1].recall) {
      EXPECT_LE(*pr[i].recall, *pr[i - 1].recall);
    }
    if (pr[i].precision && *pr[i].precision >= 0.95) {
      first = std::min(first, i);
      last = i;
    }
  }
  ASSERT_LT(first, pr.size());
  for (std::size_t i = first; i <= last; ++i) EXPECT_GE(*pr[i].precision, 0.95);
  EXPECT_LE(thresholds[first], 3.0);
  EXPECT_GE(thresholds[last], 6.0);
}

TEST(DistanceTrace, GapsAndSeparation) {
  std::mt19937_64 rng(2);
  auto d = separable(rng);
  // A silent stretch of 30 ms.
  std::erase_if(d, [](const Detection& x) { return x.flow.event.t >= 1'000'000 && x.flow.event.t < 1'030'000; });
  const auto bins = distance_trace(d, 0.01);
  ASSERT_EQ(bins.size(), 200u);
  std::size_t both = 0, above = 0;
  for (const auto& b : bins) {
    if (b.start >= 1'000'000 && b.start < 1'030'000) {
      EXPECT_FALSE(b.object_mean);
      EXPECT_FALSE(b.background_mean);
      EXPECT_EQ(b.object_count + b.background_count, 0u);
      continue;
    }
    if (b.object_mean && b.background_mean) {
      ++both;
      above += *b.object_mean > *b.background_mean;
    }
  }
  EXPECT_GE(static_cast<double>(above), 0.95 * static_cast<double>(both));

  test::TempDir dir("trace");
  write_trace_csv(dir / "t.csv", bins);
  const auto text = test::read_bytes(dir / "t.csv");
  EXPECT_NE(text.find("\n1000000,,,0,0\n"), std::string::npos);
}

TEST(Trajectories, SingleLineCluster) {
  std::vector<Detection> d;
  for (int i = 0; i < 10; ++i) d.push_back(det(static_cast<Timestamp>(i) * 100, 1.0, Label::Background, 7,
                                               static_cast<std::uint16_t>(50 + 2 * i)));
  const auto tr = export_trajectories(d);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].cluster_id, 7u);
  ASSERT_EQ(tr[0].samples.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(tr[0].samples[static_cast<std::size_t>(i)].x, 50 + 2 * i);
    EXPECT_EQ(tr[0].samples[static_cast<std::size_t>(i)].t, static_cast<Timestamp>(i) * 100);
  }
}

TEST(Trajectories, GroupsAndFiles) {
  std::mt19937_64 rng(3);
  const auto d = separable(rng);
  const auto tr = export_trajectories(d);
  std::size_t object_clusters = 0;
  for (const auto& c : tr) {
    if (c.group != Label::IndependentMotion) continue;
    ++object_clusters;
    std::size_t flagged = 0;
    for (const auto& s : c.samples) flagged += s.predicted == MotionClass::IndependentMotion;
    EXPECT_GE(static_cast<double>(flagged), 0.9 * static_cast<double>(c.samples.size()));
  }
  EXPECT_EQ(object_clusters, 1u);

  test::TempDir dir("traj");
  const auto object = std::find_if(tr.begin(), tr.end(), [](const auto& c) { return c.group == Label::IndependentMotion; });
  ASSERT_NE(object, tr.end());
  const std::vector<ClusterTrajectory> two{tr.front(), *object};
  const auto paths = write_trajectories(dir.path() / "out", two);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0].filename(), "cluster_0_Background.csv");
  EXPECT_EQ(paths[1].filename(), "cluster_100_IndependentMotion.csv");
  const auto text = test::read_bytes(paths[1]);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t_us,x,y,gt_label,label");
}

TEST(Svg, ChartsAreWellFormed) {
  std::mt19937_64 rng(4);
  const auto d = separable(rng);
  const auto pr_svg = pr_curve_svg(pr_sweep(d, default_thresholds()));
  const auto tr_svg = distance_trace_svg(distance_trace(d, 0.05));
  for (const auto& s : {pr_svg, tr_svg}) {
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    EXPECT_NE(s.find("<polyline"), std::string::npos);
  }
  const std::vector<SvgSeries> series{{"a<b", {1.0, 2.0}, {1.0, std::nullopt}}};
  EXPECT_NE(line_chart_svg("t", "x", "y", series).find("a&lt;b"), std::string::npos);
}

}  // namespace
}  // namespace imd
