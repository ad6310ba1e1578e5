#include "imd/classifier.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "csv_util.hpp"
#include "imd/errors.hpp"
#include "imd/event_io.hpp"

namespace imd {

std::string_view to_string(MotionClass c) {
  return c == MotionClass::IndependentMotion ? "IndependentMotion" : "EgoMotion";
}

MotionClass motion_class_from_string(std::string_view name) {
  if (name == "IndependentMotion") return MotionClass::IndependentMotion;
  if (name == "EgoMotion") return MotionClass::EgoMotion;
  throw FormatError("unknown motion class '" + std::string(name) + "'");
}

void ClassifierConfig::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw ConfigError("classifier threshold T must be > 0");
}

double mahalanobis(Velocity v, const FlowStatistics& stats) {
  const double dx = v.vx - stats.mu[0];
  const double dy = v.vy - stats.mu[1];
  const double a = stats.cov[0][0];
  const double b = stats.cov[0][1];
  const double c = stats.cov[1][1];
  if (!std::isfinite(dx) || !std::isfinite(dy) || !std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw NumericError("non-finite input to Mahalanobis distance");
  }
  const double det = a * c - b * b;
  if (!(a > 0.0) || !(det > 0.0)) throw NumericError("covariance is not positive definite");
  // Closed-form 2x2 inverse: S^-1 = [[c, -b], [-b, a]] / det.
  const double q = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
  return std::sqrt(std::max(q, 0.0));
}

std::vector<Detection> classify_stream(std::span<const FlowEvent> flows, const EgoMotionModel& model,
                                       std::span<const JointVelocity> joints, const ClassifierConfig& cfg) {
  cfg.validate();
  const JointVelocityLookup lookup(joints);
  std::vector<Detection> out;
  out.reserve(flows.size());
  // Predictions only change with the held joint sample.
  long cached_index = -1;
  FlowStatistics cached;
  for (const auto& f : flows) {
    const long i = lookup.index_at(f.event.t);
    if (i < 0) {
      throw CoverageError("flow event at t=" + std::to_string(f.event.t) + " precedes the first joint-velocity sample");
    }
    if (i != cached_index) {
      cached = model.predict(joints[static_cast<std::size_t>(i)].velocities);
      cached_index = i;
    }
    const double d = mahalanobis(Velocity{f.vx, f.vy}, cached);
    out.push_back(Detection{f, d, classify(d, cfg.threshold)});
  }
  return out;
}

std::vector<Detection> relabel(std::span<const Detection> detections, double threshold) {
  std::vector<Detection> out(detections.begin(), detections.end());
  for (auto& d : out) d.label = classify(d.distance, threshold);
  return out;
}

void write_detections_csv(const std::filesystem::path& path, std::span<const Detection> detections) {
  std::ostringstream out;
  out << "t_us,x,y,polarity,cluster_id,vx,vy,distance,label,gt_label\n";
  for (const auto& d : detections) {
    const auto& f = d.flow;
    out << f.event.t << ',' << f.event.x << ',' << f.event.y << ',' << static_cast<int>(f.event.polarity) << ','
        << f.cluster_id << ',' << format_double(f.vx) << ',' << format_double(f.vy) << ','
        << format_double(d.distance) << ',' << to_string(d.label) << ',' << to_string(f.label) << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file << out.str();
  if (!file) throw IoError("write failure on " + path.string());
}

std::vector<Detection> read_detections_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "t_us,x,y,polarity,cluster_id,vx,vy,distance,label,gt_label") {
    throw FormatError("unexpected detection CSV header in " + path.string());
  }
  std::vector<Detection> out;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 10) throw FormatError("detection row with " + std::to_string(cells.size()) + " cells");
    Detection d;
    d.flow.event.t = detail::parse_u64(cells[0]);
    d.flow.event.x = static_cast<std::uint16_t>(detail::parse_u64(cells[1]));
    d.flow.event.y = static_cast<std::uint16_t>(detail::parse_u64(cells[2]));
    d.flow.event.polarity = detail::parse_u64(cells[3]) != 0 ? Polarity::On : Polarity::Off;
    d.flow.cluster_id = static_cast<std::uint32_t>(detail::parse_u64(cells[4]));
    d.flow.vx = detail::parse_double(cells[5]);
    d.flow.vy = detail::parse_double(cells[6]);
    d.distance = detail::parse_double(cells[7]);
    d.label = motion_class_from_string(cells[8]);
    d.flow.label = label_from_string(cells[9]);
    out.push_back(d);
  }
  return out;
}

}  // namespace imd
