#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imd/encoder_stream.hpp"
#include "imd/flow_tracker.hpp"

namespace imd {

/// Mean image velocity and its 2x2 covariance, (px/s) and (px/s)^2.
struct FlowStatistics {
  std::array<double, 2> mu{0.0, 0.0};
  std::array<std::array<double, 2>, 2> cov{{{0.0, 0.0}, {0.0, 0.0}}};

  friend bool operator==(const FlowStatistics&, const FlowStatistics&) = default;
};

/// Sample mean and unbiased (k - 1) covariance of k >= 2 velocities.
FlowStatistics flow_statistics(std::span<const Velocity> velocities);

/// Symmetrises cov, clamps negative eigenvalues to zero and adds eps * I.
/// A positive semi-definite input comes back as exactly cov + eps * I.
FlowStatistics regularize(const FlowStatistics& stats, double epsilon);

struct LearnerConfig {
  std::size_t min_clusters = 5;        // n
  std::size_t min_events = 15;         // m, shared with the tracker
  std::optional<double> gamma;         // RBF bandwidth; median heuristic when unset
  double lambda = 1.0;                 // ridge regulariser
  double epsilon = 1e-6;               // covariance floor, (px/s)^2
  std::size_t max_examples = 1500;     // deterministic stride subsampling above this

  void validate() const;
};

/// An instant contributes iff qualifying >= max(n, ceil(active / 2)).
bool instant_qualifies(std::size_t qualifying, std::size_t active, std::size_t min_clusters);

/// Statistics over the informative clusters of one snapshot, or nothing when
/// the instant is skipped.
std::optional<FlowStatistics> instant_statistics(std::span<const ClusterSnapshot> clusters,
                                                 const LearnerConfig& cfg);

/// Answers "which clusters are active at t" for monotonically increasing t.
class FlowStateSource {
 public:
  virtual ~FlowStateSource() = default;
  virtual std::vector<ClusterSnapshot> clusters_at(Timestamp t) = 0;
  /// First and last timestamps covered, if any.
  virtual std::optional<std::pair<Timestamp, Timestamp>> time_range() const = 0;
};

/// Replays corner events through a tracker; exposes immature clusters too.
class TrackerReplay final : public FlowStateSource {
 public:
  TrackerReplay(std::span<const CornerEvent> corners, const TrackerConfig& cfg);
  std::vector<ClusterSnapshot> clusters_at(Timestamp t) override;
  std::optional<std::pair<Timestamp, Timestamp>> time_range() const override;

 private:
  std::span<const CornerEvent> corners_;
  FlowTracker tracker_;
  std::size_t cursor_ = 0;
};

/// Rebuilds cluster state from a flow stream. Only clusters that emitted flow
/// events (i.e. reached m members) are visible.
class FlowReplay final : public FlowStateSource {
 public:
  FlowReplay(std::span<const FlowEvent> flows, const TrackerConfig& cfg);
  std::vector<ClusterSnapshot> clusters_at(Timestamp t) override;
  std::optional<std::pair<Timestamp, Timestamp>> time_range() const override;

 private:
  std::span<const FlowEvent> flows_;
  TrackerConfig cfg_;
  std::size_t cursor_ = 0;
  std::vector<ClusterSnapshot> clusters_;   // ascending id
};

struct TrainingExample {
  Timestamp t = 0;
  std::vector<double> input;   // joint velocities, deg/s
  FlowStatistics target;
};

/// Pairs qualifying flow-statistics instants with the joint velocity sampled
/// at the same time. Throws InsufficientDataError when the two streams do not
/// overlap in time.
std::vector<TrainingExample> collect_examples(FlowStateSource& source, std::span<const JointVelocity> joints,
                                              const LearnerConfig& cfg);

/// Indices of the five learned outputs.
enum Output : std::size_t { kMuVx = 0, kMuVy, kSigmaVx, kSigmaVxVy, kSigmaVy, kOutputCount };

inline constexpr std::array<const char*, kOutputCount> kOutputNames{"mu_vx", "mu_vy", "s_vx", "s_vxvy", "s_vy"};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// 1 / (2 * median^2) over pairwise Euclidean distances; 1 when the median is 0.
double median_heuristic_gamma(const std::vector<std::vector<double>>& points);

/// Dual weights (K + lambda I)^-1 y for every target column. Throws
/// SingularSystemError when the system cannot be factorised.
std::vector<std::vector<double>> kernel_ridge_weights(const std::vector<std::vector<double>>& support,
                                                      const std::vector<std::vector<double>>& targets,
                                                      double gamma, double lambda);

/// Five RBF kernel ridge regressors sharing support set and normalisation.
/// Each output is offset + sum_i weights[i] * k(x, support[i]).
struct EgoMotionModel {
  static constexpr int kVersion = 1;

  std::size_t joints = 0;
  double gamma = 1.0;
  double lambda = 1.0;
  double epsilon = 1e-6;
  std::vector<double> input_mean;
  std::vector<double> input_scale;
  std::vector<std::vector<double>> support;            // normalised inputs
  std::array<std::vector<double>, kOutputCount> weights;
  std::array<double, kOutputCount> offset{};           // training mean of each output

  std::vector<double> normalize(std::span<const double> input) const;
  /// Unprocessed regressor outputs (mu_vx, mu_vy, s_vx, s_vxvy, s_vy).
  std::array<double, kOutputCount> raw_predict(std::span<const double> joint_velocity) const;
  /// Regularised statistics. Throws ShapeError on dimension mismatch.
  FlowStatistics predict(std::span<const double> joint_velocity) const;
};

/// Throws InsufficientDataError for fewer than 2 examples and ConfigError for
/// an invalid configuration.
EgoMotionModel train(std::span<const TrainingExample> examples, const LearnerConfig& cfg);

std::string model_to_json(const EgoMotionModel& model);
EgoMotionModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const EgoMotionModel& model);
EgoMotionModel load_model(const std::filesystem::path& path);

}  // namespace imd
