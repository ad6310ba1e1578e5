#include "imd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "csv_util.hpp"
#include "imd/errors.hpp"
#include "imd/event_io.hpp"

namespace imd {

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ConfigError("log_spaced: need 0 < lo <= hi and count > 0");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_thresholds() { return log_spaced(0.1, 50.0, 100); }

std::vector<PRPoint> pr_sweep(std::span<const Detection> detections, std::span<const double> thresholds) {
  for (const auto& d : detections) {
    if (d.flow.label == Label::Unknown) throw FormatError("pr_sweep: detection without ground-truth label");
  }
  // Sorting once turns each threshold into two binary searches.
  std::vector<double> object, background;
  for (const auto& d : detections) {
    (d.flow.label == Label::IndependentMotion ? object : background).push_back(d.distance);
  }
  std::sort(object.begin(), object.end());
  std::sort(background.begin(), background.end());
  auto above = [](const std::vector<double>& v, double t) {
    return static_cast<std::uint64_t>(v.end() - std::upper_bound(v.begin(), v.end(), t));
  };

  std::vector<PRPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    PRPoint p;
    p.threshold = t;
    p.tp = above(object, t);
    p.fp = above(background, t);
    p.fn = object.size() - p.tp;
    if (p.tp + p.fp > 0) p.precision = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp);
    if (p.tp + p.fn > 0) p.recall = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
    out.push_back(p);
  }
  return out;
}

std::vector<TraceBin> distance_trace(std::span<const Detection> detections, double bin_s) {
  if (!(bin_s > 0.0)) throw ConfigError("distance_trace: bin width must be > 0");
  std::vector<TraceBin> bins;
  if (detections.empty()) return bins;
  const auto width = std::max<Timestamp>(1, static_cast<Timestamp>(std::llround(bin_s * kMicrosPerSecond)));
  Timestamp t_min = detections.front().flow.event.t, t_max = t_min;
  for (const auto& d : detections) {
    t_min = std::min(t_min, d.flow.event.t);
    t_max = std::max(t_max, d.flow.event.t);
  }
  const Timestamp origin = t_min / width * width;
  const std::size_t count = static_cast<std::size_t>((t_max - origin) / width) + 1;
  std::vector<double> obj_sum(count, 0.0), bg_sum(count, 0.0);
  bins.resize(count);
  for (std::size_t i = 0; i < count; ++i) bins[i].start = origin + i * width;
  for (const auto& d : detections) {
    const auto i = static_cast<std::size_t>((d.flow.event.t - origin) / width);
    if (d.flow.label == Label::IndependentMotion) {
      obj_sum[i] += d.distance;
      ++bins[i].object_count;
    } else if (d.flow.label == Label::Background) {
      bg_sum[i] += d.distance;
      ++bins[i].background_count;
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (bins[i].object_count > 0) bins[i].object_mean = obj_sum[i] / static_cast<double>(bins[i].object_count);
    if (bins[i].background_count > 0) {
      bins[i].background_mean = bg_sum[i] / static_cast<double>(bins[i].background_count);
    }
  }
  return bins;
}

std::vector<ClusterTrajectory> export_trajectories(std::span<const Detection> detections) {
  std::vector<ClusterTrajectory> out;
  std::map<std::uint32_t, std::size_t> index;
  for (const auto& d : detections) {
    auto [it, inserted] = index.try_emplace(d.flow.cluster_id, out.size());
    if (inserted) out.push_back(ClusterTrajectory{d.flow.cluster_id, Label::Unknown, {}});
    out[it->second].samples.push_back(
        TrajectorySample{d.flow.event.t, d.flow.event.x, d.flow.event.y, d.flow.label, d.label});
  }
  for (auto& c : out) {
    std::size_t object = 0, background = 0;
    for (const auto& s : c.samples) {
      object += s.gt == Label::IndependentMotion;
      background += s.gt == Label::Background;
    }
    if (object + background > 0) c.group = object > background ? Label::IndependentMotion : Label::Background;
  }
  return out;
}

std::vector<std::filesystem::path> write_trajectories(const std::filesystem::path& dir,
                                                      std::span<const ClusterTrajectory> trajectories) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (const auto& c : trajectories) {
    std::ostringstream out;
    out << "t_us,x,y,gt_label,label\n";
    for (const auto& s : c.samples) {
      out << s.t << ',' << s.x << ',' << s.y << ',' << to_string(s.gt) << ',' << to_string(s.predicted) << '\n';
    }
    auto path = dir / ("cluster_" + std::to_string(c.cluster_id) + "_" + std::string(to_string(c.group)) + ".csv");
    detail::write_text_file(path, out.str());
    paths.push_back(std::move(path));
  }
  return paths;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void write_pr_csv(const std::filesystem::path& path, std::span<const PRPoint> points) {
  std::ostringstream out;
  out << "threshold,precision,recall,tp,fp,fn\n";
  for (const auto& p : points) {
    out << format_double(p.threshold) << ',' << opt(p.precision) << ',' << opt(p.recall) << ',' << p.tp << ','
        << p.fp << ',' << p.fn << '\n';
  }
  detail::write_text_file(path, out.str());
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceBin> bins) {
  std::ostringstream out;
  out << "t_start_us,object_mean,background_mean,object_count,background_count\n";
  for (const auto& b : bins) {
    out << b.start << ',' << opt(b.object_mean) << ',' << opt(b.background_mean) << ',' << b.object_count << ','
        << b.background_count << '\n';
  }
  detail::write_text_file(path, out.str());
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const SvgSeries> series) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
  constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!s.x[i] || !s.y[i]) continue;
      x0 = std::min(x0, *s.x[i]);
      x1 = std::max(x1, *s.x[i]);
      y0 = std::min(y0, *s.y[i]);
      y1 = std::max(y1, *s.y[i]);
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << escape_xml(title)
      << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n";
  out << "<text x=\"14\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 14 " << kH / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(y_label) << "</text>\n";
  for (double v : {x0, x1}) {
    out << "<text x=\"" << fixed(px(v)) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\" "
        << "font-size=\"10\">" << fixed(v) << "</text>\n";
  }
  for (double v : {y0, y1}) {
    out << "<text x=\"" << kLeft - 4 << "\" y=\"" << fixed(py(v)) << "\" text-anchor=\"end\" font-size=\"10\">"
        << fixed(v) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points
            << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!s.x[i] || !s.y[i]) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fixed(px(*s.x[i])) + "," + fixed(py(*s.y[i]));
    }
    flush();
    out << "<text x=\"" << kW - kRight - 4 << "\" y=\"" << kTop + 14 * (k + 1) << "\" text-anchor=\"end\" "
        << "font-size=\"11\" fill=\"" << color << "\">" << escape_xml(s.name) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string pr_curve_svg(std::span<const PRPoint> points) {
  SvgSeries s{"PR", {}, {}};
  for (const auto& p : points) {
    s.x.push_back(p.recall);
    s.y.push_back(p.precision);
  }
  return line_chart_svg("Precision / recall", "recall", "precision", std::span(&s, 1));
}

std::string distance_trace_svg(std::span<const TraceBin> bins) {
  std::vector<SvgSeries> series{{"object", {}, {}}, {"background", {}, {}}};
  for (const auto& b : bins) {
    const double t = to_seconds(b.start);
    series[0].x.push_back(t);
    series[0].y.push_back(b.object_mean);
    series[1].x.push_back(t);
    series[1].y.push_back(b.background_mean);
  }
  return line_chart_svg("Mean Mahalanobis distance", "time (s)", "distance", series);
}

}  // namespace imd
