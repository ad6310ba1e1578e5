#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "imd/ego_model.hpp"
#include "imd/encoder_stream.hpp"
#include "imd/event.hpp"
#include "imd/flow_tracker.hpp"

namespace imd {

enum class MotionClass : std::uint8_t { EgoMotion, IndependentMotion };

std::string_view to_string(MotionClass c);
MotionClass motion_class_from_string(std::string_view name);

struct ClassifierConfig {
  double threshold = 4.0;   // T

  void validate() const;
};

struct Detection {
  FlowEvent flow;
  double distance = 0.0;
  MotionClass label = MotionClass::EgoMotion;
};

/// sqrt((v - mu)^T S^-1 (v - mu)) against the covariance as given.
/// Throws NumericError for non-finite input or a covariance that is not
/// positive definite.
double mahalanobis(Velocity v, const FlowStatistics& stats);

/// Distances strictly above the threshold are independent motion.
constexpr MotionClass classify(double distance, double threshold) {
  return distance > threshold ? MotionClass::IndependentMotion : MotionClass::EgoMotion;
}

/// Labels every flow event against the model prediction for the latest joint
/// velocity at or before its timestamp. Output order follows input order.
/// Throws CoverageError for a flow event earlier than the first joint sample.
std::vector<Detection> classify_stream(std::span<const FlowEvent> flows, const EgoMotionModel& model,
                                       std::span<const JointVelocity> joints, const ClassifierConfig& cfg);

/// Re-labels detections at another threshold without recomputing distances.
std::vector<Detection> relabel(std::span<const Detection> detections, double threshold);

// Detection CSV: t_us,x,y,polarity,cluster_id,vx,vy,distance,label,gt_label
void write_detections_csv(const std::filesystem::path& path, std::span<const Detection> detections);
std::vector<Detection> read_detections_csv(const std::filesystem::path& path);

}  // namespace imd
