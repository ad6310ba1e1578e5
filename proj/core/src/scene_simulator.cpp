#include "imd/scene_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "imd/errors.hpp"

namespace imd {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Cast-based floor; std::floor is a libm call on baseline x86-64.
inline double fast_floor(double v) {
  const auto i = static_cast<double>(static_cast<long long>(v));
  return i > v ? i - 1.0 : i;
}

double unit_from_hash(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Signed ramp across checker boundaries: +-1 inside a cell, 0 on its edge,
// sign alternating between neighbouring cells. p is in cell units.
inline double checker_ramp(double p, double inv_half_edge) {
  const double fl = fast_floor(p);
  const double f = p - fl;
  const double r = std::min(std::min(f, 1.0 - f) * inv_half_edge, 1.0);
  return (static_cast<long long>(fl) & 1) ? -r : r;
}

double blob_value(const TextureSpec& tex, double pu, double pv) {
  const double iu = fast_floor(pu);
  const double iv = fast_floor(pv);
  const auto key = splitmix64(static_cast<std::uint64_t>(static_cast<long long>(iu)) * 0x1F1F1F1Full ^
                              splitmix64(static_cast<std::uint64_t>(static_cast<long long>(iv)) ^ tex.seed));
  const double half = 0.18 + 0.14 * unit_from_hash(splitmix64(key ^ 1));
  const double margin = half + 0.05;
  const double cu = margin + (1.0 - 2.0 * margin) * unit_from_hash(splitmix64(key ^ 2));
  const double cv = margin + (1.0 - 2.0 * margin) * unit_from_hash(splitmix64(key ^ 3));
  const double sign = (splitmix64(key ^ 4) & 1) ? 1.0 : -1.0;
  const double sd = std::min(half - std::abs(pu - iu - cu), half - std::abs(pv - iv - cv)) * tex.cell_m;
  const double r = std::clamp(0.5 + sd / tex.edge_m, 0.0, 1.0);
  return sign * r;
}

// Texture with its per-sample constants folded in.
class TextureSampler {
 public:
  explicit TextureSampler(const TextureSpec& tex)
      : tex_(tex),
        inv_cell_(1.0 / tex.cell_m),
        inv_half_edge_(2.0 * tex.cell_m / tex.edge_m),
        cos_(std::cos(tex.angle_deg * kDegToRad)),
        sin_(std::sin(tex.angle_deg * kDegToRad)) {}

  double operator()(double u, double v) const {
    const double pu = (cos_ * u + sin_ * v - tex_.phase_u_m) * inv_cell_;
    const double pv = (cos_ * v - sin_ * u - tex_.phase_v_m) * inv_cell_;
    const double s = tex_.kind == TextureKind::Checkerboard
                         ? checker_ramp(pu, inv_half_edge_) * checker_ramp(pv, inv_half_edge_)
                         : blob_value(tex_, pu, pv);
    return tex_.mean_log + tex_.amplitude * s;
  }

 private:
  TextureSpec tex_;
  double inv_cell_;
  double inv_half_edge_;
  double cos_;
  double sin_;
};

template <typename Segment>
double total_duration(const std::vector<Segment>& segments) {
  double d = 0.0;
  for (const auto& s : segments) d += s.duration_s;
  return d;
}

// Integrates piecewise-constant rates; returns (position offset, rate) at t.
template <typename Segment, typename RateA, typename RateB>
std::array<double, 4> integrate(const std::vector<Segment>& segments, double t, RateA rate_a, RateB rate_b) {
  double a = 0.0, b = 0.0, start = 0.0;
  for (const auto& s : segments) {
    const double end = start + s.duration_s;
    if (t < end) {
      const double dt = std::max(t - start, 0.0);
      return {a + rate_a(s) * dt, b + rate_b(s) * dt, rate_a(s), rate_b(s)};
    }
    a += rate_a(s) * s.duration_s;
    b += rate_b(s) * s.duration_s;
    start = end;
  }
  return {a, b, 0.0, 0.0};
}

}  // namespace

void TextureSpec::validate(const std::string& what) const {
  if (!(cell_m > 0.0)) throw ConfigError(what + ": texture cell size must be > 0");
  if (!(edge_m > 0.0) || edge_m > cell_m) throw ConfigError(what + ": texture edge width must lie in (0, cell]");
  if (!(amplitude >= 0.0)) throw ConfigError(what + ": texture amplitude must be >= 0");
  if (!std::isfinite(angle_deg)) throw ConfigError(what + ": texture angle must be finite");
}

double texture_log_intensity(const TextureSpec& tex, double u, double v) { return TextureSampler(tex)(u, v); }

void SceneConfig::validate() const {
  if (sensor.width == 0 || sensor.height == 0 || sensor.width > 65535 || sensor.height > 65535) {
    throw ConfigError("scene: invalid sensor size");
  }
  if (!(focal_length_px > 0.0)) throw ConfigError("scene: focal length must be > 0");
  if (!(background_depth_m > 0.0)) throw ConfigError("scene: background depth must be > 0");
  if (!(contrast_threshold > 0.0)) throw ConfigError("scene: contrast threshold C must be > 0");
  if (!(render_rate_hz > 0.0)) throw ConfigError("scene: render rate must be > 0");
  if (!(noise_rate_hz >= 0.0)) throw ConfigError("scene: noise rate must be >= 0");
  if (!(label_margin_px >= 0.0)) throw ConfigError("scene: label margin must be >= 0");
  background.validate("scene background");
}

double TrajectorySpec::duration_s() const {
  double d = total_duration(camera);
  if (object) d = std::max(d, total_duration(object->segments));
  return d;
}

SceneModel::SceneModel(const SceneConfig& scene, const TrajectorySpec& trajectory)
    : scene_(scene),
      trajectory_(trajectory),
      cx_(0.5 * (static_cast<double>(scene.sensor.width) - 1.0)),
      cy_(0.5 * (static_cast<double>(scene.sensor.height) - 1.0)) {
  scene_.validate();
  for (const auto& s : trajectory_.camera) {
    if (!(s.duration_s >= 0.0) || !std::isfinite(s.pan_rate_dps) || !std::isfinite(s.tilt_rate_dps)) {
      throw ConfigError("trajectory: invalid camera segment");
    }
  }
  if (trajectory_.object) {
    const auto& o = *trajectory_.object;
    if (!(o.depth_m > 0.0)) throw ConfigError("object: depth must be > 0 (object behind camera)");
    if (!(o.depth_m < scene_.background_depth_m)) throw ConfigError("object: must lie in front of the background");
    if (!(o.width_m > 0.0) || !(o.height_m > 0.0)) throw ConfigError("object: size must be > 0");
    o.texture.validate("object");
    for (const auto& s : o.segments) {
      if (!(s.duration_s >= 0.0) || !std::isfinite(s.vx_mps) || !std::isfinite(s.vy_mps)) {
        throw ConfigError("trajectory: invalid object segment");
      }
    }
  }
}

std::array<double, 2> SceneModel::joint_angles(double t) const {
  const auto r = integrate(trajectory_.camera, t, [](const JointSegment& s) { return s.pan_rate_dps; },
                           [](const JointSegment& s) { return s.tilt_rate_dps; });
  return {trajectory_.pan0_deg + r[0], trajectory_.tilt0_deg + r[1]};
}

std::array<double, 2> SceneModel::joint_rates(double t) const {
  const auto r = integrate(trajectory_.camera, t, [](const JointSegment& s) { return s.pan_rate_dps; },
                           [](const JointSegment& s) { return s.tilt_rate_dps; });
  return {r[2], r[3]};
}

std::array<double, 2> SceneModel::object_position(double t) const {
  if (!trajectory_.object) return {0.0, 0.0};
  const auto& o = *trajectory_.object;
  const auto r = integrate(o.segments, t, [](const ObjectSegment& s) { return s.vx_mps; },
                           [](const ObjectSegment& s) { return s.vy_mps; });
  return {o.x0_m + r[0], o.y0_m + r[1]};
}

std::array<double, 2> SceneModel::object_velocity(double t) const {
  if (!trajectory_.object) return {0.0, 0.0};
  const auto r = integrate(trajectory_.object->segments, t, [](const ObjectSegment& s) { return s.vx_mps; },
                           [](const ObjectSegment& s) { return s.vy_mps; });
  return {r[2], r[3]};
}

// Row-major R = R_y(pan) * R_x(tilt), camera to world.
std::array<double, 9> SceneModel::rotation(double t) const {
  const auto angles = joint_angles(t);
  const double p = angles[0] * kDegToRad;
  const double q = angles[1] * kDegToRad;
  const double cp = std::cos(p), sp = std::sin(p), cq = std::cos(q), sq = std::sin(q);
  return {cp, sp * sq, sp * cq, 0.0, cq, -sq, -sp, cp * sq, cp * cq};
}

std::array<double, 2> SceneModel::ray(double x, double y, double t) const {
  const auto R = rotation(t);
  const double dx = (x - cx_) / scene_.focal_length_px;
  const double dy = (y - cy_) / scene_.focal_length_px;
  const double wx = R[0] * dx + R[1] * dy + R[2];
  const double wy = R[3] * dx + R[4] * dy + R[5];
  const double wz = R[6] * dx + R[7] * dy + R[8];
  if (!(wz > 1e-6)) throw ConfigError("scene geometry: view ray does not hit the scene planes");
  return {wx / wz, wy / wz};
}

std::optional<double> SceneModel::object_signed_distance(double x, double y, double t) const {
  if (!trajectory_.object) return std::nullopt;
  const auto& o = *trajectory_.object;
  const auto r = ray(x, y, t);
  const auto c = object_position(t);
  const double u = o.depth_m * r[0] - c[0];
  const double v = o.depth_m * r[1] - c[1];
  return std::min(0.5 * o.width_m - std::abs(u), 0.5 * o.height_m - std::abs(v));
}

double SceneModel::log_intensity(double x, double y, double t) const {
  const auto r = ray(x, y, t);
  const double bg =
      texture_log_intensity(scene_.background, scene_.background_depth_m * r[0], scene_.background_depth_m * r[1]);
  if (!trajectory_.object) return bg;
  const auto& o = *trajectory_.object;
  const auto c = object_position(t);
  const double u = o.depth_m * r[0] - c[0];
  const double v = o.depth_m * r[1] - c[1];
  const double sd = std::min(0.5 * o.width_m - std::abs(u), 0.5 * o.height_m - std::abs(v));
  const double alpha = std::clamp(0.5 + sd / o.texture.edge_m, 0.0, 1.0);
  if (alpha <= 0.0) return bg;
  const double fg = texture_log_intensity(o.texture, u + 0.5 * o.width_m, v + 0.5 * o.height_m);
  return alpha * fg + (1.0 - alpha) * bg;
}

Label SceneModel::label_at(double x, double y, double t) const {
  const auto sd = object_signed_distance(x, y, t);
  if (!sd) return Label::Background;
  const double margin_m = scene_.label_margin_px * trajectory_.object->depth_m / scene_.focal_length_px;
  return *sd >= -margin_m ? Label::IndependentMotion : Label::Background;
}

std::optional<std::array<double, 2>> SceneModel::project(double X, double Y, double Z, double t) const {
  const auto R = rotation(t);
  // Camera coordinates are R^T * P.
  const double xc = R[0] * X + R[3] * Y + R[6] * Z;
  const double yc = R[1] * X + R[4] * Y + R[7] * Z;
  const double zc = R[2] * X + R[5] * Y + R[8] * Z;
  if (!(zc > 1e-9)) return std::nullopt;
  return std::array<double, 2>{cx_ + scene_.focal_length_px * xc / zc, cy_ + scene_.focal_length_px * yc / zc};
}

std::vector<std::array<double, 2>> SceneModel::object_polygon(double t) const {
  std::vector<std::array<double, 2>> out;
  if (!trajectory_.object) return out;
  const auto& o = *trajectory_.object;
  const auto c = object_position(t);
  const double hw = 0.5 * o.width_m, hh = 0.5 * o.height_m;
  for (const auto& [sx, sy] : {std::pair{-1.0, -1.0}, std::pair{1.0, -1.0}, std::pair{1.0, 1.0}, std::pair{-1.0, 1.0}}) {
    if (auto p = project(c[0] + sx * hw, c[1] + sy * hh, o.depth_m, t)) out.push_back(*p);
  }
  return out;
}

std::vector<std::array<double, 2>> SceneModel::background_corners(double t) const {
  std::vector<std::array<double, 2>> out;
  const auto& tex = scene_.background;
  if (tex.kind != TextureKind::Checkerboard) return out;
  const double W = scene_.sensor.width, H = scene_.sensor.height;
  const double c = std::cos(tex.angle_deg * kDegToRad), s = std::sin(tex.angle_deg * kDegToRad);
  // Bounds of the visible plane region in grid units.
  double g0 = 1e300, g1 = -1e300, h0 = 1e300, h1 = -1e300;
  for (const auto& [x, y] : {std::pair{0.0, 0.0}, std::pair{W - 1, 0.0}, std::pair{0.0, H - 1}, std::pair{W - 1, H - 1}}) {
    const auto r = ray(x, y, t);
    const double u = r[0] * scene_.background_depth_m, v = r[1] * scene_.background_depth_m;
    const double gu = (c * u + s * v - tex.phase_u_m) / tex.cell_m;
    const double gv = (c * v - s * u - tex.phase_v_m) / tex.cell_m;
    g0 = std::min(g0, gu);
    g1 = std::max(g1, gu);
    h0 = std::min(h0, gv);
    h1 = std::max(h1, gv);
  }
  for (auto j = static_cast<long long>(std::floor(h0)); j <= static_cast<long long>(std::ceil(h1)); ++j) {
    for (auto i = static_cast<long long>(std::floor(g0)); i <= static_cast<long long>(std::ceil(g1)); ++i) {
      const double gu = tex.phase_u_m + static_cast<double>(i) * tex.cell_m;
      const double gv = tex.phase_v_m + static_cast<double>(j) * tex.cell_m;
      const auto p = project(c * gu - s * gv, s * gu + c * gv, scene_.background_depth_m, t);
      if (p && (*p)[0] >= 0.0 && (*p)[0] <= W - 1 && (*p)[1] >= 0.0 && (*p)[1] <= H - 1) out.push_back(*p);
    }
  }
  return out;
}

double SceneModel::max_image_speed() const {
  const double f = scene_.focal_length_px;
  const double half_diag = 0.5 * std::hypot(scene_.sensor.width, scene_.sensor.height);
  // Rotational flow grows towards the image corners by up to 1 + r^2 / f^2.
  const double gain = 1.0 + (half_diag * half_diag) / (f * f);
  double camera = 0.0;
  for (const auto& s : trajectory_.camera) camera = std::max(camera, std::hypot(s.pan_rate_dps, s.tilt_rate_dps));
  double object = 0.0;
  if (trajectory_.object) {
    for (const auto& s : trajectory_.object->segments) object = std::max(object, std::hypot(s.vx_mps, s.vy_mps));
    object *= f / trajectory_.object->depth_m;
  }
  return camera * kDegToRad * f * gain + object;
}

EventGenerator::EventGenerator(SensorSize sensor, double contrast_threshold)
    : sensor_(sensor), threshold_(contrast_threshold) {
  if (!(contrast_threshold > 0.0)) throw ConfigError("contrast threshold must be > 0");
}

void EventGenerator::reset(std::span<const double> log_frame, Timestamp t) {
  const std::size_t n = static_cast<std::size_t>(sensor_.width) * sensor_.height;
  if (log_frame.size() != n) throw ShapeError("frame size does not match sensor");
  reference_.assign(log_frame.begin(), log_frame.end());
  previous_.assign(log_frame.begin(), log_frame.end());
  t_prev_ = t;
}

void EventGenerator::step(std::span<const double> log_frame, Timestamp t, std::vector<Event>& out) {
  if (log_frame.size() != previous_.size()) throw ShapeError("frame size does not match sensor");
  if (t <= t_prev_) throw OrderingError("frames must advance in time");
  const double dt = static_cast<double>(t - t_prev_);
  const std::uint32_t W = sensor_.width;
  for (std::size_t i = 0; i < log_frame.size(); ++i) {
    const double now = log_frame[i];
    const double before = previous_[i];
    double& ref = reference_[i];
    const double delta = now - before;
    if (now - ref >= threshold_ || ref - now >= threshold_) {
      const bool on = now > ref;
      const double step = on ? threshold_ : -threshold_;
      while (on ? (now - ref >= threshold_) : (ref - now >= threshold_)) {
        ref += step;
        // Fraction of the frame interval at which the linear ramp reaches ref.
        const double frac = delta != 0.0 ? std::clamp((ref - before) / delta, 0.0, 1.0) : 1.0;
        const auto te = t_prev_ + static_cast<Timestamp>(std::llround(frac * dt));
        out.push_back(Event{static_cast<std::uint16_t>(i % W), static_cast<std::uint16_t>(i / W),
                            on ? Polarity::On : Polarity::Off, std::max(te, t_prev_ + 1)});
      }
    }
    previous_[i] = now;
  }
  t_prev_ = t;
}

namespace {

class FrameRenderer {
 public:
  explicit FrameRenderer(const SceneModel& model)
      : model_(model),
        background_(model.scene().background),
        object_(model.trajectory().object ? model.trajectory().object->texture : TextureSpec{}) {
    const auto& s = model.scene();
    const double cx = 0.5 * (static_cast<double>(s.sensor.width) - 1.0);
    const double cy = 0.5 * (static_cast<double>(s.sensor.height) - 1.0);
    dx_.resize(s.sensor.width);
    dy_.resize(s.sensor.height);
    for (std::uint32_t x = 0; x < s.sensor.width; ++x) dx_[x] = (x - cx) / s.focal_length_px;
    for (std::uint32_t y = 0; y < s.sensor.height; ++y) dy_[y] = (y - cy) / s.focal_length_px;
  }

  void render(double t, std::vector<double>& frame) const {
    const auto& s = model_.scene();
    const auto& traj = model_.trajectory();
    const auto angles = model_.joint_angles(t);
    const double p = angles[0] * kDegToRad, q = angles[1] * kDegToRad;
    const double cp = std::cos(p), sp = std::sin(p), cq = std::cos(q), sq = std::sin(q);
    const double R0 = cp, R1 = sp * sq, R2 = sp * cq, R4 = cq, R5 = -sq, R6 = -sp, R7 = cp * sq, R8 = cp * cq;
    const double bg_depth = s.background_depth_m;
    const ObjectSpec* obj = traj.object ? &*traj.object : nullptr;
    const auto centre = model_.object_position(t);
    const std::uint32_t W = s.sensor.width;
    frame.resize(static_cast<std::size_t>(W) * s.sensor.height);

    for (std::uint32_t y = 0; y < s.sensor.height; ++y) {
      const double dy = dy_[y];
      const double bx = R1 * dy + R2, by = R4 * dy + R5, bz = R7 * dy + R8;
      double* row = &frame[static_cast<std::size_t>(y) * W];
      for (std::uint32_t x = 0; x < W; ++x) {
        const double dx = dx_[x];
        const double wz = R6 * dx + bz;
        if (!(wz > 1e-6)) throw ConfigError("scene geometry: view ray does not hit the scene planes");
        const double a = (R0 * dx + bx) / wz;
        const double b = by / wz;
        double value = background_(bg_depth * a, bg_depth * b);
        if (obj != nullptr) {
          const double u = obj->depth_m * a - centre[0];
          const double v = obj->depth_m * b - centre[1];
          const double sd = std::min(0.5 * obj->width_m - std::abs(u), 0.5 * obj->height_m - std::abs(v));
          const double alpha = std::clamp(0.5 + sd / obj->texture.edge_m, 0.0, 1.0);
          if (alpha > 0.0) {
            const double fg = object_(u + 0.5 * obj->width_m, v + 0.5 * obj->height_m);
            value = alpha * fg + (1.0 - alpha) * value;
          }
        }
        row[x] = value;
      }
    }
  }

 private:
  const SceneModel& model_;
  TextureSampler background_;
  TextureSampler object_;
  std::vector<double> dx_;
  std::vector<double> dy_;
};

Timestamp frame_time(std::size_t k, double rate_hz) {
  return static_cast<Timestamp>(std::llround(static_cast<double>(k) * kMicrosPerSecond / rate_hz));
}

}  // namespace

SimulationResult simulate(const SceneConfig& scene, const TrajectorySpec& trajectory, double duration_s,
                          std::uint64_t seed) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("simulation duration must be > 0");
  const SceneModel model(scene, trajectory);

  // Crossing interpolation needs several frames per pixel event.
  const double min_cell_px = [&] {
    double px = scene.background.cell_m * scene.focal_length_px / scene.background_depth_m;
    if (trajectory.object) {
      px = std::min(px, trajectory.object->texture.cell_m * scene.focal_length_px / trajectory.object->depth_m);
    }
    return std::max(px, 1.0);
  }();
  const double amplitude = std::max(scene.background.amplitude, trajectory.object ? trajectory.object->texture.amplitude : 0.0);
  const double events_per_crossing = std::ceil(2.0 * amplitude / scene.contrast_threshold) + 1.0;
  const double pixel_event_rate = model.max_image_speed() / min_cell_px * events_per_crossing;
  if (scene.render_rate_hz < 10.0 * pixel_event_rate) {
    throw ConfigError("scene: render rate " + std::to_string(scene.render_rate_hz) + " Hz is below 10x the expected " +
                      "pixel event rate (" + std::to_string(pixel_event_rate) + " Hz)");
  }

  SimulationResult result;
  result.header.sensor = scene.sensor;
  const Timestamp end_us = static_cast<Timestamp>(std::llround(duration_s * kMicrosPerSecond));

  for (Timestamp t = 0; t <= end_us; t += kEncoderPeriodUs) {
    const auto a = model.joint_angles(to_seconds(t));
    result.encoders.push_back(EncoderSample{t, {a[0], a[1]}});
  }

  std::vector<Event> noise;
  if (scene.noise_rate_hz > 0.0) {
    std::mt19937_64 rng(seed);
    const double total_rate = scene.noise_rate_hz * scene.sensor.width * scene.sensor.height;
    std::exponential_distribution<double> gap(total_rate);
    std::uniform_int_distribution<std::uint32_t> px(0, scene.sensor.width - 1);
    std::uniform_int_distribution<std::uint32_t> py(0, scene.sensor.height - 1);
    std::bernoulli_distribution on(0.5);
    double t = gap(rng);
    while (t <= duration_s) {
      const auto ts = std::max<Timestamp>(1, static_cast<Timestamp>(std::llround(t * kMicrosPerSecond)));
      const auto x = static_cast<std::uint16_t>(px(rng));
      const auto y = static_cast<std::uint16_t>(py(rng));
      noise.push_back(Event{x, y, on(rng) ? Polarity::On : Polarity::Off, ts});
      t += gap(rng);
    }
  }

  const FrameRenderer renderer(model);
  EventGenerator generator(scene.sensor, scene.contrast_threshold);
  std::vector<double> frame;
  renderer.render(0.0, frame);
  generator.reset(frame, 0);

  const auto frames = static_cast<std::size_t>(std::ceil(duration_s * scene.render_rate_hz - 1e-9));
  std::vector<Event> chunk;
  std::size_t noise_cursor = 0;
  for (std::size_t k = 1; k <= frames; ++k) {
    const Timestamp tk = std::min(frame_time(k, scene.render_rate_hz), end_us);
    if (tk <= frame_time(k - 1, scene.render_rate_hz)) continue;
    renderer.render(to_seconds(tk), frame);
    chunk.clear();
    generator.step(frame, tk, chunk);
    while (noise_cursor < noise.size() && noise[noise_cursor].t <= tk) chunk.push_back(noise[noise_cursor++]);
    std::sort(chunk.begin(), chunk.end(), [](const Event& a, const Event& b) {
      if (a.t != b.t) return a.t < b.t;
      if (a.y != b.y) return a.y < b.y;
      if (a.x != b.x) return a.x < b.x;
      return a.polarity < b.polarity;
    });
    for (const auto& e : chunk) {
      result.events.push_back(LabeledEvent{e, model.label_at(e.x, e.y, to_seconds(e.t))});
    }
  }
  return result;
}

}  // namespace imd

namespace imd {
namespace {

struct GazeParams {
  std::vector<double> speeds_dps;   // cycled through, one level per hold period
  double hold_s = 2.0;
  double ramp_s = 1.0;
  double bound_deg = 6.0;
  double duration_s = 10.0;
  double segment_s = 0.1;
  std::uint64_t seed = 1;
};

// Smooth random-heading gaze: constant-velocity segments whose heading
// drifts randomly with a bounded turn rate and steers back inside a box.
std::vector<JointSegment> random_gaze(const GazeParams& p) {
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<JointSegment> out;
  const auto n = static_cast<std::size_t>(std::llround(p.duration_s / p.segment_s));
  double heading = std::numbers::pi * unit(rng);
  double pan = 0.0, tilt = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * p.segment_s;
    const auto level = static_cast<std::size_t>(t / p.hold_s);
    const double target = p.speeds_dps[level % p.speeds_dps.size()];
    const double previous = level == 0 ? target : p.speeds_dps[(level - 1) % p.speeds_dps.size()];
    const double into = t - static_cast<double>(level) * p.hold_s;
    const double speed = into < p.ramp_s ? previous + (target - previous) * into / p.ramp_s : target;

    const double max_turn = 1.5 * std::max(speed, 1.0) / p.bound_deg * p.segment_s;
    double turn = 0.5 * max_turn * unit(rng);
    const double r = std::hypot(pan, tilt);
    if (r > 0.5 * p.bound_deg) {
      double towards = std::atan2(-tilt, -pan) - heading;
      towards = std::remainder(towards, 2.0 * std::numbers::pi);
      const double weight = std::min((r - 0.5 * p.bound_deg) / (0.5 * p.bound_deg), 1.0);
      turn = (1.0 - weight) * turn + weight * std::clamp(towards, -max_turn, max_turn);
    }
    heading += turn;
    const JointSegment seg{p.segment_s, speed * std::cos(heading), speed * std::sin(heading)};
    pan += seg.pan_rate_dps * p.segment_s;
    tilt += seg.tilt_rate_dps * p.segment_s;
    out.push_back(seg);
  }
  return out;
}

// Tilted grids keep straight edges off the pixel lattice, so an edge sweeps
// across a pixel row over time instead of firing it in one instant.
constexpr double kBackgroundAngleDeg = 20.0;
constexpr double kObjectAngleDeg = -25.0;

SceneConfig preset_scene() {
  SceneConfig scene;
  scene.background.angle_deg = kBackgroundAngleDeg;
  return scene;
}

constexpr double kHandLeverM = 0.12;
constexpr double kObjectDirectionDeg = 30.0;
constexpr double kObjectLegM = 0.16;
constexpr double kPauseStartS = 4.0;
constexpr double kPauseEndS = 6.5;
constexpr double kTestDurationS = 10.0;

// Back-and-forth motion along a fixed direction, resting in [pause_start, pause_end).
ObjectSpec test_object(double hand_dps) {
  ObjectSpec obj;
  obj.texture.cell_m = 0.04;
  obj.texture.edge_m = 0.004;
  obj.texture.amplitude = 0.5;
  obj.texture.angle_deg = kObjectAngleDeg;
  const double speed = hand_dps * kDegToRad * kHandLeverM;
  const double dir = kObjectDirectionDeg * kDegToRad;
  obj.x0_m = -0.5 * kObjectLegM * std::cos(dir);
  obj.y0_m = -0.5 * kObjectLegM * std::sin(dir);
  double t = 0.0, along = 0.0, sign = 1.0;
  auto move = [&](double until) {
    while (t < until - 1e-12) {
      // Remaining distance of the current leg decides the segment length.
      const double left = sign > 0 ? kObjectLegM - along : along;
      const double dt = std::min(left / speed, until - t);
      obj.segments.push_back(ObjectSegment{dt, sign * speed * std::cos(dir), sign * speed * std::sin(dir)});
      along += sign * speed * dt;
      t += dt;
      if (dt >= left / speed - 1e-12) sign = -sign;
    }
  };
  move(kPauseStartS);
  obj.segments.push_back(ObjectSegment{kPauseEndS - kPauseStartS, 0.0, 0.0});
  t = kPauseEndS;
  move(kTestDurationS);
  return obj;
}

ScenarioVariant test_variant(const std::string& name, double head_dps, double hand_dps, std::uint64_t gaze_seed) {
  ScenarioVariant v;
  v.name = name;
  v.scene = preset_scene();
  v.duration_s = kTestDurationS;
  GazeParams gaze;
  gaze.speeds_dps = {head_dps};
  gaze.bound_deg = 6.0;
  gaze.duration_s = kTestDurationS;
  gaze.seed = gaze_seed;
  v.trajectory.camera = random_gaze(gaze);
  v.trajectory.object = test_object(hand_dps);
  v.object_pauses.push_back({kPauseStartS, kPauseEndS});
  return v;
}

std::string format_speed(double v) { return std::to_string(static_cast<long long>(std::llround(v))); }

}  // namespace

std::vector<ScenarioPreset> scenario_presets() {
  std::vector<ScenarioPreset> presets;

  {
    ScenarioPreset p{"train-static", "static scene, camera swept at several speeds", {}};
    ScenarioVariant v;
    v.name = "default";
    v.scene = preset_scene();
    v.duration_s = 20.0;
    GazeParams gaze;
    gaze.speeds_dps = {2.0, 5.0, 10.0, 3.0, 12.0, 7.0};
    gaze.bound_deg = 8.0;
    gaze.duration_s = v.duration_s;
    gaze.seed = 11;
    v.trajectory.camera = random_gaze(gaze);
    p.variants.push_back(std::move(v));
    presets.push_back(std::move(p));
  }
  {
    ScenarioPreset p{"test-object-speed", "head at 5 deg/s, object driven at four hand speeds (deg/s)", {}};
    std::uint64_t seed = 21;
    for (double hand : kHandSpeedsDps) p.variants.push_back(test_variant(format_speed(hand), 5.0, hand, seed++));
    presets.push_back(std::move(p));
  }
  {
    ScenarioPreset p{"test-head-speed", "object at 130 deg/s hand speed, head at three speeds (deg/s)", {}};
    std::uint64_t seed = 31;
    for (double head : kHeadSpeedsDps) p.variants.push_back(test_variant(format_speed(head), head, 130.0, seed++));
    presets.push_back(std::move(p));
  }
  {
    ScenarioPreset p{"checkerboard-rotation", "diagonal pan/tilt over a checkerboard, no object", {}};
    ScenarioVariant v;
    v.name = "default";
    v.scene = preset_scene();
    v.duration_s = 4.0;
    v.trajectory.pan0_deg = -6.0;
    v.trajectory.tilt0_deg = -4.0;
    v.trajectory.camera.push_back(JointSegment{v.duration_s, 3.0, 2.0});
    p.variants.push_back(std::move(v));
    presets.push_back(std::move(p));
  }
  return presets;
}

ScenarioVariant find_scenario(const std::string& preset, const std::string& variant) {
  for (auto& p : scenario_presets()) {
    if (p.name != preset) continue;
    if (variant.empty()) return p.variants.front();
    for (auto& v : p.variants) {
      if (v.name == variant) return v;
    }
    throw LookupError("unknown variant '" + variant + "' of preset '" + preset + "'");
  }
  throw LookupError("unknown scenario preset '" + preset + "'");
}

}  // namespace imd
