#include "imd/corner_detector.hpp"

#include <cmath>
#include <string>

#include "imd/errors.hpp"

namespace imd {

void DetectorConfig::validate() const {
  if (radius < 2) throw ConfigError("detector radius l must be >= 2, got " + std::to_string(radius));
  if (radius > 127) throw ConfigError("detector radius l must be <= 127");
  if (!(threshold > 0.0)) throw ConfigError("Harris threshold must be > 0");
  if (!(harris_k > 0.0 && harris_k < 0.25)) throw ConfigError("harris_k must lie in (0, 0.25)");
  if (!(sigma() > 0.0)) throw ConfigError("gaussian_sigma must be > 0");
}

HarrisScorer::HarrisScorer(const DetectorConfig& cfg) : radius_(cfg.radius), k_(cfg.harris_k) {
  cfg.validate();
  double scale = 1.0;
  if (cfg.kernel == GradientKernel::Sobel5) {
    smooth_ = {1, 4, 6, 4, 1};
    derivative_ = {-1, -2, 0, 2, 1};
    scale = 1.0 / 32.0;
  } else {
    smooth_ = {1, 2, 1};
    derivative_ = {-1, 0, 1};
    scale = 3.0 / 8.0;
  }
  for (double& d : derivative_) d *= scale;
  half_kernel_ = static_cast<int>(smooth_.size() / 2);

  const int side = 2 * radius_ + 1;
  const double sigma = cfg.sigma();
  weights_.resize(static_cast<std::size_t>(side * side));
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const double dy = r - radius_;
      const double dx = c - radius_;
      weights_[static_cast<std::size_t>(r * side + c)] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
}

double HarrisScorer::response(const BinaryPatch& patch) const {
  const int side = patch.side();
  const int h = half_kernel_;
  // Scatter each occupied cell into the gradient images instead of running a
  // dense correlation; a patch holds at most 2l occupied cells.
  std::vector<double> gx(static_cast<std::size_t>(side * side), 0.0);
  std::vector<double> gy(gx.size(), 0.0);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      if (!patch.at(r, c)) continue;
      // Cell (r, c) contributes to gradient at (r - a, c - b) with kernel tap (a, b).
      for (int a = -h; a <= h; ++a) {
        const int gr = r - a;
        if (gr < 0 || gr >= side) continue;
        for (int b = -h; b <= h; ++b) {
          const int gc = c - b;
          if (gc < 0 || gc >= side) continue;
          const std::size_t g = static_cast<std::size_t>(gr * side + gc);
          gx[g] += smooth_[static_cast<std::size_t>(a + h)] * derivative_[static_cast<std::size_t>(b + h)];
          gy[g] += derivative_[static_cast<std::size_t>(a + h)] * smooth_[static_cast<std::size_t>(b + h)];
        }
      }
    }
  }
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double w = weights_[i];
    sxx += w * gx[i] * gx[i];
    syy += w * gy[i] * gy[i];
    sxy += w * gx[i] * gy[i];
  }
  const double det = sxx * syy - sxy * sxy;
  const double trace = sxx + syy;
  return det - k_ * trace * trace;
}

std::optional<CornerEvent> detect(const LocalSurface& surface, const Event& e, const HarrisScorer& scorer,
                                  const DetectorConfig& cfg) {
  const int l = cfg.radius;
  if (cfg.skip_border) {
    const auto sensor = surface.sensor();
    if (e.x < l || e.y < l || e.x + l >= static_cast<int>(sensor.width) ||
        e.y + l >= static_cast<int>(sensor.height)) {
      return std::nullopt;
    }
  }
  const BinaryPatch patch = surface.patch(e.x, e.y, e.polarity);
  const double score = scorer.response(patch);
  if (score < cfg.threshold) return std::nullopt;
  return CornerEvent{e, score, Label::Unknown};
}

CornerDetector::CornerDetector(SensorSize sensor, const DetectorConfig& cfg)
    : cfg_(cfg), scorer_(cfg), surface_(sensor, cfg.radius, cfg.split_polarity) {}

std::optional<CornerEvent> CornerDetector::process(const LabeledEvent& e) {
  surface_.update(e.event);
  auto corner = detect(surface_, e.event, scorer_, cfg_);
  if (corner) corner->label = e.label;
  return corner;
}

std::vector<CornerEvent> detect_stream(std::span<const LabeledEvent> events, SensorSize sensor,
                                       const DetectorConfig& cfg) {
  CornerDetector detector(sensor, cfg);
  std::vector<CornerEvent> corners;
  for (const auto& e : events) {
    if (auto c = detector.process(e)) corners.push_back(*c);
  }
  return corners;
}

std::vector<LabeledEvent> to_labeled_events(std::span<const CornerEvent> corners) {
  std::vector<LabeledEvent> out;
  out.reserve(corners.size());
  for (const auto& c : corners) out.push_back(LabeledEvent{c.event, c.label});
  return out;
}

std::vector<CornerEvent> from_labeled_events(std::span<const LabeledEvent> events) {
  std::vector<CornerEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(CornerEvent{e.event, 0.0, e.label});
  return out;
}

}  // namespace imd
