#include "imd/encoder_stream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "imd/errors.hpp"

namespace imd {

void EncoderFilterConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("encoder filter alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
}

std::vector<JointVelocity> estimate_velocities(std::span<const EncoderSample> samples, double alpha) {
  EncoderFilterConfig{alpha}.validate();
  if (samples.size() < 2) {
    throw InsufficientDataError("velocity estimation needs at least 2 encoder samples, got " +
                                std::to_string(samples.size()));
  }
  const std::size_t joints = samples.front().positions.size();

  std::vector<JointVelocity> out;
  out.reserve(samples.size() - 1);
  std::vector<double> filtered(joints, 0.0);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const auto& prev = samples[k - 1];
    const auto& cur = samples[k];
    if (cur.t <= prev.t) {
      throw OrderingError("encoder timestamps must be strictly increasing (sample " + std::to_string(k) + ")");
    }
    if (cur.positions.size() != joints || prev.positions.size() != joints) {
      throw ShapeError("encoder sample " + std::to_string(k) + " has a different joint count");
    }
    const double dt = seconds_between(cur.t, prev.t);
    JointVelocity v{cur.t, std::vector<double>(joints)};
    for (std::size_t j = 0; j < joints; ++j) {
      const double raw = (cur.positions[j] - prev.positions[j]) / dt;
      filtered[j] = (k == 1) ? raw : alpha * raw + (1.0 - alpha) * filtered[j];
      if (!std::isfinite(filtered[j])) throw NumericError("non-finite joint velocity");
      v.velocities[j] = filtered[j];
    }
    out.push_back(std::move(v));
  }
  return out;
}

JointVelocityLookup::JointVelocityLookup(std::span<const JointVelocity> stream) : stream_(stream) {}

long JointVelocityLookup::index_at(Timestamp t) const {
  auto it = std::upper_bound(stream_.begin(), stream_.end(), t,
                             [](Timestamp value, const JointVelocity& v) { return value < v.t; });
  return static_cast<long>(it - stream_.begin()) - 1;
}

const JointVelocity* JointVelocityLookup::at(Timestamp t) const {
  const long i = index_at(t);
  return i < 0 ? nullptr : &stream_[static_cast<std::size_t>(i)];
}

}  // namespace imd
