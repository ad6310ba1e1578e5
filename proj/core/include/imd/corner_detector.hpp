#pragma once

#include <optional>
#include <span>
#include <vector>

#include "imd/event.hpp"
#include "imd/local_surface.hpp"

namespace imd {

enum class GradientKernel { Sobel3, Sobel5 };

struct DetectorConfig {
  int radius = 5;                              // l, in pixels
  double harris_k = 0.04;
  double threshold = 8.0;                      // minimum Harris response
  std::optional<double> gaussian_sigma;        // defaults to radius / 2
  GradientKernel kernel = GradientKernel::Sobel5;
  bool split_polarity = true;
  bool skip_border = true;                     // no decisions within l px of the sensor edge

  double sigma() const { return gaussian_sigma.value_or(radius / 2.0); }
  void validate() const;
};

struct CornerEvent {
  Event event;
  double score = 0.0;
  Label label = Label::Unknown;
};

/// Harris response of a binary patch.
///
/// Gradients come from a Sobel operator correlated over the patch with zero
/// padding outside it; the 5x5 operator is scaled by 1/32 and the 3x3 one by
/// 3/8 so both give the same response to a unit step. The second-moment
/// matrix is weighted by an unnormalised Gaussian centred on the patch.
class HarrisScorer {
 public:
  explicit HarrisScorer(const DetectorConfig& cfg);

  double response(const BinaryPatch& patch) const;
  int radius() const { return radius_; }

 private:
  int radius_;
  int half_kernel_;
  double k_;
  std::vector<double> smooth_;
  std::vector<double> derivative_;
  std::vector<double> weights_;
};

/// Classifies e against a surface that has already absorbed it.
std::optional<CornerEvent> detect(const LocalSurface& surface, const Event& e, const HarrisScorer& scorer,
                                  const DetectorConfig& cfg);

/// Owns a surface and runs update + detect for every incoming event.
class CornerDetector {
 public:
  CornerDetector(SensorSize sensor, const DetectorConfig& cfg);

  std::optional<CornerEvent> process(const LabeledEvent& e);
  const LocalSurface& surface() const { return surface_; }

 private:
  DetectorConfig cfg_;
  HarrisScorer scorer_;
  LocalSurface surface_;
};

std::vector<CornerEvent> detect_stream(std::span<const LabeledEvent> events, SensorSize sensor,
                                       const DetectorConfig& cfg);

/// Corners as labelled events, ready for an EVT0 container.
std::vector<LabeledEvent> to_labeled_events(std::span<const CornerEvent> corners);
std::vector<CornerEvent> from_labeled_events(std::span<const LabeledEvent> events);

}  // namespace imd
