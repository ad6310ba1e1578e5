#pragma once

#include <span>
#include <vector>

#include "imd/event.hpp"

namespace imd {

/// Joint angles (degrees) sampled at one instant.
struct EncoderSample {
  Timestamp t = 0;
  std::vector<double> positions;

  friend bool operator==(const EncoderSample&, const EncoderSample&) = default;
};

/// Joint rates (deg/s) estimated at one instant.
struct JointVelocity {
  Timestamp t = 0;
  std::vector<double> velocities;

  friend bool operator==(const JointVelocity&, const JointVelocity&) = default;
};

struct EncoderFilterConfig {
  double alpha = 0.5;

  void validate() const;
};

/// Backward differences of the joint positions followed by a first-order
/// exponential filter v_k = alpha * raw_k + (1 - alpha) * v_{k-1}. The filter
/// is seeded with the first raw difference. Output timestamps are those of
/// samples[1..].
///
/// Throws InsufficientDataError for fewer than two samples, OrderingError for
/// non-increasing timestamps, ShapeError when the joint count changes and
/// ConfigError for alpha outside (0, 1].
std::vector<JointVelocity> estimate_velocities(std::span<const EncoderSample> samples, double alpha);

/// Zero-order hold over a velocity stream: the latest sample at or before t.
class JointVelocityLookup {
 public:
  explicit JointVelocityLookup(std::span<const JointVelocity> stream);

  /// Index of the held sample, or -1 when t precedes the first sample.
  long index_at(Timestamp t) const;
  const JointVelocity* at(Timestamp t) const;

 private:
  std::span<const JointVelocity> stream_;
};

}  // namespace imd
