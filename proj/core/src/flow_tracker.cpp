#include "imd/flow_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "imd/errors.hpp"

namespace imd {

Timestamp TrackerConfig::refresh_us() const {
  return static_cast<Timestamp>(std::llround(refresh_s * kMicrosPerSecond));
}

void TrackerConfig::validate() const {
  if (!(max_distance > 0.0)) throw ConfigError("tracker D must be > 0");
  if (min_events < 3) throw ConfigError("tracker m must be >= 3");
  if (max_size < min_events) throw ConfigError("tracker S must be >= m");
  if (!(refresh_s > 0.0)) throw ConfigError("tracker t_refresh must be > 0");
}

namespace {

template <typename Range>
Velocity fit_range(const Range& members) {
  const std::size_t n = std::size(members);
  if (n < 2) throw DegenerateFitError("velocity fit needs at least 2 members");
  // Work in seconds relative to the first member to keep precision with
  // large microsecond stamps, then centre on the mean.
  const Timestamp t0 = std::begin(members)->event.t;
  double mean_t = 0.0, mean_x = 0.0, mean_y = 0.0;
  for (const auto& c : members) {
    mean_t += seconds_between(c.event.t, t0);
    mean_x += c.event.x;
    mean_y += c.event.y;
  }
  mean_t /= static_cast<double>(n);
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double stt = 0.0, stx = 0.0, sty = 0.0;
  for (const auto& c : members) {
    const double dt = seconds_between(c.event.t, t0) - mean_t;
    stt += dt * dt;
    stx += dt * (c.event.x - mean_x);
    sty += dt * (c.event.y - mean_y);
  }
  if (!(stt > 0.0)) throw DegenerateFitError("velocity fit with identical timestamps");
  return Velocity{stx / stt, sty / stt};
}

}  // namespace

Velocity fit_velocity(std::span<const CornerEvent> members) { return fit_range(members); }
Velocity fit_velocity(const std::deque<CornerEvent>& members) { return fit_range(members); }

FlowTracker::FlowTracker(const TrackerConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

double FlowTracker::distance_to(const Cluster& cluster, const Event& e) const {
  double ax = 0.0, ay = 0.0;
  if (cfg_.anchor == DistanceAnchor::LastMember) {
    ax = cluster.members.back().event.x;
    ay = cluster.members.back().event.y;
  } else {
    for (const auto& m : cluster.members) {
      ax += m.event.x;
      ay += m.event.y;
    }
    ax /= static_cast<double>(cluster.members.size());
    ay /= static_cast<double>(cluster.members.size());
  }
  return std::hypot(e.x - ax, e.y - ay);
}

bool FlowTracker::is_stale(const Cluster& cluster, Timestamp now) const {
  return now > cluster.last_update && now - cluster.last_update > cfg_.refresh_us();
}

void FlowTracker::expire(Timestamp now) {
  std::erase_if(clusters_, [&](const Cluster& c) { return is_stale(c, now); });
}

std::uint32_t FlowTracker::assign(const CornerEvent& c) {
  Cluster* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (auto& cluster : clusters_) {
    const double d = distance_to(cluster, c.event);
    // Strict comparison keeps the lowest id on ties (clusters_ is id-ordered).
    if (d <= cfg_.max_distance && d < best_distance) {
      best = &cluster;
      best_distance = d;
    }
  }
  if (best == nullptr) {
    clusters_.push_back(Cluster{next_id_++, {}, c.event.t, std::nullopt});
    best = &clusters_.back();
  }
  best->members.push_back(c);
  best->last_update = c.event.t;
  return best->id;
}

std::optional<FlowEvent> FlowTracker::step(const CornerEvent& c) {
  if (started_ && c.event.t < last_t_) {
    throw OrderingError("corner timestamp " + std::to_string(c.event.t) + " precedes " + std::to_string(last_t_));
  }
  started_ = true;
  last_t_ = c.event.t;

  // Stale clusters go before assignment so an old track is never revived.
  expire(c.event.t);
  const std::uint32_t id = assign(c);
  auto it = std::find_if(clusters_.begin(), clusters_.end(), [id](const Cluster& k) { return k.id == id; });
  Cluster& cluster = *it;
  if (cluster.members.size() > cfg_.max_size) cluster.members.pop_front();
  if (cluster.members.size() < cfg_.min_events) return std::nullopt;

  try {
    cluster.velocity = fit_velocity(cluster.members);
  } catch (const DegenerateFitError&) {
    // Keep the previous velocity, if any.
  }
  if (!cluster.velocity) return std::nullopt;
  return FlowEvent{c.event, c.label, cluster.velocity->vx, cluster.velocity->vy, cluster.id};
}

std::vector<ActiveFlow> FlowTracker::active_flow(Timestamp t) const {
  std::vector<ActiveFlow> out;
  for (const auto& cluster : clusters_) {
    if (is_stale(cluster, t) || cluster.members.size() < cfg_.min_events || !cluster.velocity) continue;
    out.push_back(ActiveFlow{cluster.id, *cluster.velocity});
  }
  return out;
}

std::vector<ClusterSnapshot> FlowTracker::snapshot(Timestamp t) const {
  std::vector<ClusterSnapshot> out;
  out.reserve(clusters_.size());
  for (const auto& cluster : clusters_) {
    if (is_stale(cluster, t)) continue;
    out.push_back(ClusterSnapshot{cluster.id, cluster.members.size(), cluster.last_update, cluster.velocity});
  }
  return out;
}

std::vector<FlowEvent> track_stream(std::span<const CornerEvent> corners, const TrackerConfig& cfg) {
  FlowTracker tracker(cfg);
  std::vector<FlowEvent> flows;
  for (const auto& c : corners) {
    if (auto f = tracker.step(c)) flows.push_back(*f);
  }
  return flows;
}

}  // namespace imd
