#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imd/classifier.hpp"

namespace imd {

struct PRPoint {
  double threshold = 0.0;
  std::optional<double> precision;   // empty when tp + fp == 0
  std::optional<double> recall;      // empty when tp + fn == 0
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

/// 100 log-spaced thresholds in [0.1, 50].
std::vector<double> default_thresholds();
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Event-by-event precision/recall of "distance > T" against ground truth.
/// Throws FormatError when a detection has no ground-truth label.
std::vector<PRPoint> pr_sweep(std::span<const Detection> detections, std::span<const double> thresholds);

struct TraceBin {
  Timestamp start = 0;
  std::optional<double> object_mean;       // empty bins are gaps
  std::optional<double> background_mean;
  std::uint64_t object_count = 0;
  std::uint64_t background_count = 0;
};

/// Mean Mahalanobis distance per group in consecutive bins of bin_s seconds,
/// starting at the first detection's bin.
std::vector<TraceBin> distance_trace(std::span<const Detection> detections, double bin_s);

struct TrajectorySample {
  Timestamp t = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Label gt = Label::Unknown;
  MotionClass predicted = MotionClass::EgoMotion;
};

struct ClusterTrajectory {
  std::uint32_t cluster_id = 0;
  Label group = Label::Unknown;   // majority ground-truth label
  std::vector<TrajectorySample> samples;
};

/// Per-cluster (t, x, y) series in order of first appearance.
std::vector<ClusterTrajectory> export_trajectories(std::span<const Detection> detections);

/// One CSV per cluster named cluster_<id>_<group>.csv; returns written paths.
std::vector<std::filesystem::path> write_trajectories(const std::filesystem::path& dir,
                                                      std::span<const ClusterTrajectory> trajectories);

// threshold,precision,recall,tp,fp,fn
void write_pr_csv(const std::filesystem::path& path, std::span<const PRPoint> points);
// t_start_us,object_mean,background_mean,object_count,background_count
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceBin> bins);

struct SvgSeries {
  std::string name;
  std::vector<std::optional<double>> x;
  std::vector<std::optional<double>> y;   // missing points break the polyline
};

/// Minimal static line chart.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const SvgSeries> series);

std::string pr_curve_svg(std::span<const PRPoint> points);
std::string distance_trace_svg(std::span<const TraceBin> bins);

}  // namespace imd
