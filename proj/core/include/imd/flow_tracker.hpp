#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "imd/corner_detector.hpp"
#include "imd/event.hpp"

namespace imd {

/// Image velocity in px/s.
struct Velocity {
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const Velocity&, const Velocity&) = default;
};

enum class DistanceAnchor { LastMember, Centroid };

struct TrackerConfig {
  double max_distance = 5.0;       // D, px
  std::size_t max_size = 50;       // S, events
  std::size_t min_events = 15;     // m, events
  double refresh_s = 1.0;          // t_refresh, s
  DistanceAnchor anchor = DistanceAnchor::LastMember;

  Timestamp refresh_us() const;
  void validate() const;
};

struct Cluster {
  std::uint32_t id = 0;
  std::deque<CornerEvent> members;   // oldest first
  Timestamp last_update = 0;
  std::optional<Velocity> velocity;
};

/// One cluster as seen by a flow-state query.
struct ClusterSnapshot {
  std::uint32_t id = 0;
  std::size_t size = 0;
  Timestamp last_update = 0;
  std::optional<Velocity> velocity;
};

struct ActiveFlow {
  std::uint32_t cluster_id = 0;
  Velocity velocity;
};

/// Slopes of independent least-squares fits x(t) and y(t), timestamps centred
/// on their mean. Throws DegenerateFitError when fewer than two members are
/// given or all timestamps coincide.
Velocity fit_velocity(std::span<const CornerEvent> members);
Velocity fit_velocity(const std::deque<CornerEvent>& members);

/// Greedy nearest-cluster corner tracking with FIFO clusters.
class FlowTracker {
 public:
  explicit FlowTracker(const TrackerConfig& cfg);

  /// Places c into the nearest cluster within D (ties go to the lowest id) or
  /// a fresh cluster. Does not evict, expire or refit. Returns the cluster id.
  std::uint32_t assign(const CornerEvent& c);

  /// Full per-corner update. Throws OrderingError on timestamp regression.
  std::optional<FlowEvent> step(const CornerEvent& c);

  /// Latest velocity of every non-stale cluster holding at least m members.
  std::vector<ActiveFlow> active_flow(Timestamp t) const;

  /// Every non-stale cluster at time t, informative or not.
  std::vector<ClusterSnapshot> snapshot(Timestamp t) const;

  const std::vector<Cluster>& clusters() const { return clusters_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  double distance_to(const Cluster& cluster, const Event& e) const;
  void expire(Timestamp now);
  bool is_stale(const Cluster& cluster, Timestamp now) const;

  TrackerConfig cfg_;
  std::vector<Cluster> clusters_;   // ascending id
  std::uint32_t next_id_ = 0;
  Timestamp last_t_ = 0;
  bool started_ = false;
};

std::vector<FlowEvent> track_stream(std::span<const CornerEvent> corners, const TrackerConfig& cfg);

}  // namespace imd
