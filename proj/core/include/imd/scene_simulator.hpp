#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imd/encoder_stream.hpp"
#include "imd/event.hpp"

namespace imd {

enum class TextureKind { Checkerboard, Blobs };

/// Planar log-intensity texture. Values are mean_log + amplitude * s with
/// s in [-1, 1]; transitions between cells are linear ramps edge_m wide.
/// Grid coordinates are R(-angle) * (u, v) - phase.
struct TextureSpec {
  TextureKind kind = TextureKind::Checkerboard;
  double cell_m = 0.24;        // checker square size or blob grid pitch
  double edge_m = 0.006;       // width of a light/dark transition
  double mean_log = 0.0;
  double amplitude = 0.5;
  double phase_u_m = 0.0;      // grid origin on the plane
  double phase_v_m = 0.0;
  double angle_deg = 0.0;      // in-plane rotation of the grid about the plane origin
  std::uint64_t seed = 1;      // blob layout

  void validate(const std::string& what) const;
};

/// Log intensity of a texture at plane coordinates (u, v), metres.
double texture_log_intensity(const TextureSpec& texture, double u, double v);

struct SceneConfig {
  SensorSize sensor{304, 240};
  double focal_length_px = 250.0;
  TextureSpec background;
  double background_depth_m = 1.5;
  double contrast_threshold = 0.85;    // C, log-intensity units
  double render_rate_hz = 1000.0;
  double noise_rate_hz = 0.01;         // events per pixel per second
  double label_margin_px = 3.0;        // ground-truth object region dilation

  void validate() const;
};

/// Constant joint rates (deg/s) held for duration_s.
struct JointSegment {
  double duration_s = 0.0;
  double pan_rate_dps = 0.0;
  double tilt_rate_dps = 0.0;
};

/// Constant in-plane object velocity (m/s) held for duration_s.
struct ObjectSegment {
  double duration_s = 0.0;
  double vx_mps = 0.0;
  double vy_mps = 0.0;
};

/// Fronto-parallel textured rectangle at a fixed depth in front of the
/// background; (x0_m, y0_m) is its centre on its plane at t = 0.
struct ObjectSpec {
  double width_m = 0.2;
  double height_m = 0.16;
  double depth_m = 0.6;
  double x0_m = 0.0;
  double y0_m = 0.0;
  TextureSpec texture;
  std::vector<ObjectSegment> segments;
};

/// Camera pan/tilt and optional object motion; both hold still after their
/// last segment.
struct TrajectorySpec {
  double pan0_deg = 0.0;
  double tilt0_deg = 0.0;
  std::vector<JointSegment> camera;
  std::optional<ObjectSpec> object;

  double duration_s() const;
};

struct SimulationResult {
  StreamHeader header;
  std::vector<LabeledEvent> events;
  std::vector<EncoderSample> encoders;   // pan, tilt in degrees, every 10 ms
};

inline constexpr Timestamp kEncoderPeriodUs = 10'000;

/// Geometry of a scene at arbitrary times: joint angles, object pose,
/// rendering and ground truth.
class SceneModel {
 public:
  SceneModel(const SceneConfig& scene, const TrajectorySpec& trajectory);

  /// Pan and tilt in degrees.
  std::array<double, 2> joint_angles(double t) const;
  std::array<double, 2> joint_rates(double t) const;
  /// Object centre on its plane, metres.
  std::array<double, 2> object_position(double t) const;
  std::array<double, 2> object_velocity(double t) const;

  /// Ray slopes (X/Z, Y/Z) in world coordinates through pixel (x, y) at t.
  /// Throws ConfigError when the ray does not point in front of the camera.
  std::array<double, 2> ray(double x, double y, double t) const;

  double log_intensity(double x, double y, double t) const;

  /// Signed distance (metres, positive inside) from the object boundary of
  /// the point where the pixel ray meets the object plane.
  std::optional<double> object_signed_distance(double x, double y, double t) const;

  Label label_at(double x, double y, double t) const;

  /// Projection of a world point; nullopt when behind the camera.
  std::optional<std::array<double, 2>> project(double X, double Y, double Z, double t) const;

  /// Image positions of the object's four outline corners.
  std::vector<std::array<double, 2>> object_polygon(double t) const;

  /// Image positions of background checkerboard corners inside the sensor.
  std::vector<std::array<double, 2>> background_corners(double t) const;

  /// Largest image-plane speed (px/s) reachable by camera plus object motion.
  double max_image_speed() const;

  const SceneConfig& scene() const { return scene_; }
  const TrajectorySpec& trajectory() const { return trajectory_; }

 private:
  std::array<double, 9> rotation(double t) const;

  SceneConfig scene_;
  TrajectorySpec trajectory_;
  double cx_;
  double cy_;
};

/// Per-pixel contrast-threshold event generation on a sequence of
/// log-intensity frames, with crossing times interpolated linearly between
/// frames.
class EventGenerator {
 public:
  EventGenerator(SensorSize sensor, double contrast_threshold);

  void reset(std::span<const double> log_frame, Timestamp t);
  /// Appends events in (t_prev, t] for the new frame; the caller orders them.
  void step(std::span<const double> log_frame, Timestamp t, std::vector<Event>& out);

  /// Log intensity at the pixel's last event (or at reset).
  double reference(std::size_t pixel) const { return reference_[pixel]; }
  double last_frame(std::size_t pixel) const { return previous_[pixel]; }

 private:
  SensorSize sensor_;
  double threshold_;
  Timestamp t_prev_ = 0;
  std::vector<double> reference_;
  std::vector<double> previous_;
};

/// Renders the scene at the configured rate and emits labelled events and
/// encoder samples. Deterministic in (scene, trajectory, duration, seed).
SimulationResult simulate(const SceneConfig& scene, const TrajectorySpec& trajectory, double duration_s,
                          std::uint64_t seed);

struct ScenarioVariant {
  std::string name;
  SceneConfig scene;
  TrajectorySpec trajectory;
  double duration_s = 10.0;
  /// Scripted intervals [start, end) in which the object is at rest, seconds.
  std::vector<std::array<double, 2>> object_pauses;
};

struct ScenarioPreset {
  std::string name;
  std::string description;
  std::vector<ScenarioVariant> variants;
};

/// train-static, test-object-speed, test-head-speed, checkerboard-rotation.
std::vector<ScenarioPreset> scenario_presets();

/// Throws LookupError for an unknown preset or variant. An empty variant
/// selects the first one.
ScenarioVariant find_scenario(const std::string& preset, const std::string& variant = "");

/// Head speeds that the test presets sweep (deg/s).
inline constexpr std::array<double, 3> kHeadSpeedsDps{3.0, 5.0, 10.0};
/// Hand yaw speeds of the object-speed presets (deg/s).
inline constexpr std::array<double, 4> kHandSpeedsDps{120.0, 130.0, 140.0, 150.0};

}  // namespace imd
