#include "imd/ego_model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "imd/errors.hpp"

namespace imd {

FlowStatistics flow_statistics(std::span<const Velocity> velocities) {
  const std::size_t k = velocities.size();
  if (k < 2) throw InsufficientDataError("flow statistics need at least 2 velocities");
  // Welford accumulation.
  double mx = 0.0, my = 0.0, cxx = 0.0, cyy = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = velocities[i].vx - mx;
    const double dy = velocities[i].vy - my;
    mx += dx / n;
    my += dy / n;
    cxx += dx * (velocities[i].vx - mx);
    cyy += dy * (velocities[i].vy - my);
    cxy += dx * (velocities[i].vy - my);
  }
  const double denom = static_cast<double>(k - 1);
  FlowStatistics s;
  s.mu = {mx, my};
  s.cov = {{{cxx / denom, cxy / denom}, {cxy / denom, cyy / denom}}};
  return s;
}

FlowStatistics regularize(const FlowStatistics& stats, double epsilon) {
  FlowStatistics out = stats;
  const double a = stats.cov[0][0];
  const double c = stats.cov[1][1];
  const double b = 0.5 * (stats.cov[0][1] + stats.cov[1][0]);
  if (a >= 0.0 && c >= 0.0 && a * c - b * b >= 0.0) {
    out.cov = {{{a + epsilon, b}, {b, c + epsilon}}};
    return out;
  }
  // Eigen-decomposition of the symmetric 2x2 matrix [[a, b], [b, c]].
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  const double l1 = std::max(mean + radius, 0.0) + epsilon;
  const double l2 = std::max(mean - radius, 0.0) + epsilon;
  double vx = 1.0, vy = 0.0;   // eigenvector of the larger eigenvalue
  if (radius > 0.0) {
    const double theta = 0.5 * std::atan2(2.0 * b, a - c);
    vx = std::cos(theta);
    vy = std::sin(theta);
  }
  out.cov[0][0] = l1 * vx * vx + l2 * vy * vy;
  out.cov[1][1] = l1 * vy * vy + l2 * vx * vx;
  out.cov[0][1] = out.cov[1][0] = (l1 - l2) * vx * vy;
  return out;
}

void LearnerConfig::validate() const {
  if (min_clusters < 2) throw ConfigError("learner n must be >= 2");
  if (min_events < 1) throw ConfigError("learner m must be >= 1");
  if (!(lambda > 0.0)) throw ConfigError("learner lambda must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("learner epsilon must be > 0");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("learner gamma must be > 0");
  if (max_examples < 2) throw ConfigError("learner max_examples must be >= 2");
}

bool instant_qualifies(std::size_t qualifying, std::size_t active, std::size_t min_clusters) {
  const std::size_t half = (active + 1) / 2;
  return qualifying >= std::max(min_clusters, half);
}

std::optional<FlowStatistics> instant_statistics(std::span<const ClusterSnapshot> clusters,
                                                 const LearnerConfig& cfg) {
  std::vector<Velocity> informative;
  for (const auto& c : clusters) {
    if (c.size >= cfg.min_events && c.velocity) informative.push_back(*c.velocity);
  }
  if (!instant_qualifies(informative.size(), clusters.size(), cfg.min_clusters)) return std::nullopt;
  return flow_statistics(informative);
}

TrackerReplay::TrackerReplay(std::span<const CornerEvent> corners, const TrackerConfig& cfg)
    : corners_(corners), tracker_(cfg) {}

std::vector<ClusterSnapshot> TrackerReplay::clusters_at(Timestamp t) {
  while (cursor_ < corners_.size() && corners_[cursor_].event.t <= t) {
    tracker_.step(corners_[cursor_]);
    ++cursor_;
  }
  return tracker_.snapshot(t);
}

std::optional<std::pair<Timestamp, Timestamp>> TrackerReplay::time_range() const {
  if (corners_.empty()) return std::nullopt;
  return std::pair{corners_.front().event.t, corners_.back().event.t};
}

FlowReplay::FlowReplay(std::span<const FlowEvent> flows, const TrackerConfig& cfg) : flows_(flows), cfg_(cfg) {
  cfg_.validate();
}

std::vector<ClusterSnapshot> FlowReplay::clusters_at(Timestamp t) {
  while (cursor_ < flows_.size() && flows_[cursor_].event.t <= t) {
    const FlowEvent& f = flows_[cursor_++];
    auto it = std::lower_bound(clusters_.begin(), clusters_.end(), f.cluster_id,
                               [](const ClusterSnapshot& c, std::uint32_t id) { return c.id < id; });
    if (it == clusters_.end() || it->id != f.cluster_id) {
      it = clusters_.insert(it, ClusterSnapshot{f.cluster_id, cfg_.min_events - 1, f.event.t, std::nullopt});
    }
    it->size = std::min(cfg_.max_size, it->size + 1);
    it->last_update = f.event.t;
    it->velocity = Velocity{f.vx, f.vy};
  }
  const Timestamp refresh = cfg_.refresh_us();
  std::erase_if(clusters_, [&](const ClusterSnapshot& c) { return t > c.last_update && t - c.last_update > refresh; });
  return clusters_;
}

std::optional<std::pair<Timestamp, Timestamp>> FlowReplay::time_range() const {
  if (flows_.empty()) return std::nullopt;
  return std::pair{flows_.front().event.t, flows_.back().event.t};
}

std::vector<TrainingExample> collect_examples(FlowStateSource& source, std::span<const JointVelocity> joints,
                                              const LearnerConfig& cfg) {
  const auto range = source.time_range();
  if (!range || joints.empty() || joints.back().t < range->first || joints.front().t > range->second) {
    throw InsufficientDataError("flow and joint-velocity streams do not overlap in time");
  }
  std::vector<TrainingExample> examples;
  for (const auto& jv : joints) {
    if (jv.t < range->first) continue;
    if (jv.t > range->second) break;
    const auto clusters = source.clusters_at(jv.t);
    if (auto stats = instant_statistics(clusters, cfg)) {
      examples.push_back(TrainingExample{jv.t, jv.velocities, *stats});
    }
  }
  return examples;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double median_heuristic_gamma(const std::vector<std::vector<double>>& points) {
  std::vector<double> d2;
  d2.reserve(points.size() * (points.size() - (points.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const double d = points[i][k] - points[j][k];
        s += d * d;
      }
      d2.push_back(s);
    }
  }
  if (d2.empty()) return 1.0;
  auto mid = d2.begin() + static_cast<std::ptrdiff_t>(d2.size() / 2);
  std::nth_element(d2.begin(), mid, d2.end());
  double median = *mid;
  if (d2.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(d2.begin(), mid));
  }
  // median holds a squared distance.
  if (!(median > 0.0)) return 1.0;
  return 1.0 / (2.0 * median);
}

std::vector<std::vector<double>> kernel_ridge_weights(const std::vector<std::vector<double>>& support,
                                                      const std::vector<std::vector<double>>& targets,
                                                      double gamma, double lambda) {
  const auto n = static_cast<Eigen::Index>(support.size());
  if (n == 0) throw InsufficientDataError("kernel ridge needs at least one support point");
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = 1.0 + lambda;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = rbf_kernel(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)], gamma);
      K(i, j) = k;
      K(j, i) = k;
    }
  }
  Eigen::MatrixXd Y(n, static_cast<Eigen::Index>(targets.size()));
  for (std::size_t c = 0; c < targets.size(); ++c) {
    if (targets[c].size() != support.size()) throw ShapeError("target column length differs from support size");
    for (Eigen::Index i = 0; i < n; ++i) Y(i, static_cast<Eigen::Index>(c)) = targets[c][static_cast<std::size_t>(i)];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13)) {
    throw SingularSystemError("kernel matrix is singular; use lambda > 0 or distinct inputs");
  }
  const Eigen::MatrixXd W = llt.solve(Y);
  std::vector<std::vector<double>> out(targets.size(), std::vector<double>(support.size()));
  for (std::size_t c = 0; c < targets.size(); ++c) {
    for (Eigen::Index i = 0; i < n; ++i) out[c][static_cast<std::size_t>(i)] = W(i, static_cast<Eigen::Index>(c));
  }
  return out;
}

std::vector<double> EgoMotionModel::normalize(std::span<const double> input) const {
  if (input.size() != joints) {
    throw ShapeError("joint-velocity dimension " + std::to_string(input.size()) + " does not match model dimension " +
                     std::to_string(joints));
  }
  std::vector<double> z(joints);
  for (std::size_t i = 0; i < joints; ++i) z[i] = (input[i] - input_mean[i]) / input_scale[i];
  return z;
}

std::array<double, kOutputCount> EgoMotionModel::raw_predict(std::span<const double> joint_velocity) const {
  const auto z = normalize(joint_velocity);
  std::array<double, kOutputCount> out = offset;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double k = rbf_kernel(z, support[i], gamma);
    for (std::size_t o = 0; o < kOutputCount; ++o) out[o] += k * weights[o][i];
  }
  return out;
}

FlowStatistics EgoMotionModel::predict(std::span<const double> joint_velocity) const {
  const auto r = raw_predict(joint_velocity);
  FlowStatistics s;
  s.mu = {r[kMuVx], r[kMuVy]};
  s.cov = {{{r[kSigmaVx], r[kSigmaVxVy]}, {r[kSigmaVxVy], r[kSigmaVy]}}};
  return regularize(s, epsilon);
}

EgoMotionModel train(std::span<const TrainingExample> all_examples, const LearnerConfig& cfg) {
  cfg.validate();
  if (all_examples.size() < 2) {
    throw InsufficientDataError("training needs at least 2 examples, got " + std::to_string(all_examples.size()));
  }
  const std::size_t joints = all_examples.front().input.size();
  if (joints == 0) throw ShapeError("training inputs are empty");

  std::vector<const TrainingExample*> examples;
  const std::size_t total = all_examples.size();
  const std::size_t keep = std::min(total, cfg.max_examples);
  examples.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) examples.push_back(&all_examples[i * total / keep]);

  for (const auto* e : examples) {
    if (e->input.size() != joints) throw ShapeError("training inputs differ in dimension");
    for (double v : e->input) {
      if (!std::isfinite(v)) throw NumericError("non-finite training input");
    }
  }

  EgoMotionModel model;
  model.joints = joints;
  model.lambda = cfg.lambda;
  model.epsilon = cfg.epsilon;
  model.input_mean.assign(joints, 0.0);
  model.input_scale.assign(joints, 1.0);
  const auto n = static_cast<double>(examples.size());
  for (const auto* e : examples) {
    for (std::size_t j = 0; j < joints; ++j) model.input_mean[j] += e->input[j] / n;
  }
  for (std::size_t j = 0; j < joints; ++j) {
    double ss = 0.0;
    for (const auto* e : examples) ss += (e->input[j] - model.input_mean[j]) * (e->input[j] - model.input_mean[j]);
    const double sd = std::sqrt(ss / (n - 1.0));
    model.input_scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  model.support.reserve(examples.size());
  for (const auto* e : examples) model.support.push_back(model.normalize(e->input));
  model.gamma = cfg.gamma ? *cfg.gamma : median_heuristic_gamma(model.support);

  std::vector<std::vector<double>> targets(kOutputCount, std::vector<double>(examples.size()));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& s = examples[i]->target;
    targets[kMuVx][i] = s.mu[0];
    targets[kMuVy][i] = s.mu[1];
    targets[kSigmaVx][i] = s.cov[0][0];
    targets[kSigmaVxVy][i] = s.cov[0][1];
    targets[kSigmaVy][i] = s.cov[1][1];
  }
  // Intercept: regress the deviation from each output's training mean.
  for (std::size_t o = 0; o < kOutputCount; ++o) {
    double sum = 0.0;
    for (double v : targets[o]) sum += v;
    model.offset[o] = sum / n;
    for (double& v : targets[o]) v -= model.offset[o];
  }
  auto w = kernel_ridge_weights(model.support, targets, model.gamma, model.lambda);
  for (std::size_t o = 0; o < kOutputCount; ++o) model.weights[o] = std::move(w[o]);
  return model;
}

std::string model_to_json(const EgoMotionModel& model) {
  nlohmann::ordered_json j;
  j["version"] = EgoMotionModel::kVersion;
  j["J"] = model.joints;
  j["gamma"] = model.gamma;
  j["lambda"] = model.lambda;
  j["epsilon"] = model.epsilon;
  j["normalization"] = {{"mean", model.input_mean}, {"scale", model.input_scale}};
  j["support"] = model.support;
  nlohmann::ordered_json w;
  for (std::size_t o = 0; o < kOutputCount; ++o) w[kOutputNames[o]] = model.weights[o];
  j["weights"] = w;
  nlohmann::ordered_json off;
  for (std::size_t o = 0; o < kOutputCount; ++o) off[kOutputNames[o]] = model.offset[o];
  j["offset"] = off;
  return j.dump(1) + "\n";
}

EgoMotionModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != EgoMotionModel::kVersion) throw FormatError("unsupported model version");
    EgoMotionModel m;
    m.joints = j.at("J").get<std::size_t>();
    m.gamma = j.at("gamma").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.epsilon = j.at("epsilon").get<double>();
    m.input_mean = j.at("normalization").at("mean").get<std::vector<double>>();
    m.input_scale = j.at("normalization").at("scale").get<std::vector<double>>();
    m.support = j.at("support").get<std::vector<std::vector<double>>>();
    for (std::size_t o = 0; o < kOutputCount; ++o) {
      m.weights[o] = j.at("weights").at(kOutputNames[o]).get<std::vector<double>>();
      if (m.weights[o].size() != m.support.size()) throw FormatError("weight vector length mismatch");
      m.offset[o] = j.at("offset").at(kOutputNames[o]).get<double>();
    }
    if (m.input_mean.size() != m.joints || m.input_scale.size() != m.joints) {
      throw FormatError("normalization length mismatch");
    }
    for (const auto& s : m.support) {
      if (s.size() != m.joints) throw FormatError("support dimension mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const EgoMotionModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << model_to_json(model);
  if (!out) throw IoError("write failure on " + path.string());
}

EgoMotionModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace imd
