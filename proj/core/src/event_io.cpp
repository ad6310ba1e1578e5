#include "imd/event_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "csv_util.hpp"
#include "imd/errors.hpp"

namespace imd {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFFu));
    u = static_cast<U>(u >> 8);
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) u = static_cast<U>((u << 8) | p[i]);
  return static_cast<T>(u);
}

void put_f32(std::string& out, double value) {
  put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return data;
}

void dump(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failure on " + path.string());
}

Label decode_label(std::uint8_t raw, const std::filesystem::path& path) {
  if (raw > 2) throw FormatError("invalid label byte " + std::to_string(raw) + " in " + path.string());
  return static_cast<Label>(raw);
}

Polarity decode_polarity(std::uint8_t raw, const std::filesystem::path& path) {
  if (raw > 1) throw FormatError("invalid polarity byte " + std::to_string(raw) + " in " + path.string());
  return static_cast<Polarity>(raw);
}

}  // namespace

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Background:
      return "Background";
    case Label::IndependentMotion:
      return "IndependentMotion";
    case Label::Unknown:
      break;
  }
  return "Unknown";
}

Label label_from_string(std::string_view name) {
  if (name == "Background") return Label::Background;
  if (name == "IndependentMotion") return Label::IndependentMotion;
  if (name == "Unknown" || name.empty()) return Label::Unknown;
  throw FormatError("unknown label '" + std::string(name) + "'");
}

std::string read_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw IoError("truncated header in " + path.string());
  return std::string(magic, 4);
}

EventFile read_event_file(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  if (data.size() < 4) throw IoError("truncated header in " + path.string());
  if (std::memcmp(data.data(), StreamHeader::kMagic.data(), 4) != 0) {
    throw FormatError("bad magic '" + data.substr(0, 4) + "' in " + path.string());
  }
  if (data.size() < kEventHeaderSize) throw IoError("truncated header in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());

  EventFile file;
  file.header.version = get_le<std::uint32_t>(p + 4);
  if (file.header.version != StreamHeader::kVersion) {
    throw FormatError("unsupported EVT0 version " + std::to_string(file.header.version));
  }
  file.header.sensor.width = get_le<std::uint32_t>(p + 8);
  file.header.sensor.height = get_le<std::uint32_t>(p + 12);

  const std::size_t body = data.size() - kEventHeaderSize;
  if (body % kEventRecordSize != 0) {
    throw IoError("truncated event record in " + path.string());
  }
  const std::size_t count = body / kEventRecordSize;
  file.events.reserve(count);
  Timestamp last = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* r = p + kEventHeaderSize + i * kEventRecordSize;
    LabeledEvent le;
    le.event.t = get_le<std::uint64_t>(r);
    le.event.x = get_le<std::uint16_t>(r + 8);
    le.event.y = get_le<std::uint16_t>(r + 10);
    le.event.polarity = decode_polarity(r[12], path);
    le.label = decode_label(r[13], path);
    if (!file.header.sensor.contains(le.event.x, le.event.y)) {
      throw FormatError("event " + std::to_string(i) + " outside sensor bounds in " + path.string());
    }
    if (i > 0 && le.event.t < last) {
      throw FormatError("event " + std::to_string(i) + " breaks timestamp order in " + path.string());
    }
    last = le.event.t;
    file.events.push_back(le);
  }
  return file;
}

void write_event_file(const std::filesystem::path& path, const StreamHeader& header,
                      std::span<const LabeledEvent> events) {
  if (header.magic != StreamHeader::kMagic || header.version != StreamHeader::kVersion) {
    throw FormatError("refusing to write a non-EVT0 header");
  }
  std::string out;
  out.reserve(kEventHeaderSize + events.size() * kEventRecordSize);
  out.append(header.magic.data(), 4);
  put_le(out, header.version);
  put_le(out, header.sensor.width);
  put_le(out, header.sensor.height);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& le = events[i];
    if (i > 0 && le.event.t < events[i - 1].event.t) {
      throw OrderingError("events must be timestamp-ordered (index " + std::to_string(i) + ")");
    }
    if (!header.sensor.contains(le.event.x, le.event.y)) {
      throw BoundsError("event " + std::to_string(i) + " outside sensor bounds");
    }
    put_le(out, le.event.t);
    put_le(out, le.event.x);
    put_le(out, le.event.y);
    put_le(out, static_cast<std::uint8_t>(le.event.polarity));
    put_le(out, static_cast<std::uint8_t>(le.label));
    put_le(out, std::uint16_t{0});
  }
  dump(path, out);
}

std::vector<FlowEvent> read_flow_file(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  if (data.size() < 4) throw IoError("truncated header in " + path.string());
  if (std::memcmp(data.data(), kFlowMagic.data(), 4) != 0) {
    throw FormatError("bad magic '" + data.substr(0, 4) + "' in " + path.string());
  }
  if (data.size() < kFlowHeaderSize) throw IoError("truncated header in " + path.string());
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const auto version = get_le<std::uint32_t>(p + 4);
  if (version != kFlowVersion) throw FormatError("unsupported FLW0 version " + std::to_string(version));

  const std::size_t body = data.size() - kFlowHeaderSize;
  if (body % kFlowRecordSize != 0) throw IoError("truncated flow record in " + path.string());
  std::vector<FlowEvent> flows(body / kFlowRecordSize);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const unsigned char* r = p + kFlowHeaderSize + i * kFlowRecordSize;
    FlowEvent& f = flows[i];
    f.event.t = get_le<std::uint64_t>(r);
    f.event.x = get_le<std::uint16_t>(r + 8);
    f.event.y = get_le<std::uint16_t>(r + 10);
    f.event.polarity = decode_polarity(r[12], path);
    f.label = decode_label(r[13], path);
    f.cluster_id = get_le<std::uint32_t>(r + 16);
    f.vx = get_f32(r + 20);
    f.vy = get_f32(r + 24);
    if (i > 0 && f.event.t < flows[i - 1].event.t) {
      throw FormatError("flow " + std::to_string(i) + " breaks timestamp order in " + path.string());
    }
  }
  return flows;
}

void write_flow_file(const std::filesystem::path& path, std::span<const FlowEvent> flows) {
  std::string out;
  out.reserve(kFlowHeaderSize + flows.size() * kFlowRecordSize);
  out.append(kFlowMagic.data(), 4);
  put_le(out, kFlowVersion);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    if (i > 0 && f.event.t < flows[i - 1].event.t) {
      throw OrderingError("flows must be timestamp-ordered (index " + std::to_string(i) + ")");
    }
    put_le(out, f.event.t);
    put_le(out, f.event.x);
    put_le(out, f.event.y);
    put_le(out, static_cast<std::uint8_t>(f.event.polarity));
    put_le(out, static_cast<std::uint8_t>(f.label));
    put_le(out, std::uint16_t{0});
    put_le(out, f.cluster_id);
    put_f32(out, f.vx);
    put_f32(out, f.vy);
    put_le(out, std::uint32_t{0});
  }
  dump(path, out);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw NumericError("cannot format double");
  return std::string(buf, ptr);
}

namespace {

template <typename Row>
std::vector<Row> read_joint_csv(const std::filesystem::path& path, std::string_view suffix) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header row in " + path.string());
  const auto header = detail::split_csv(line);
  if (header.empty() || header[0] != "t_us") throw FormatError("first column must be t_us in " + path.string());
  for (std::size_t j = 1; j < header.size(); ++j) {
    const std::string expected = "j" + std::to_string(j - 1) + std::string(suffix);
    if (header[j] != expected) {
      throw FormatError("unexpected column '" + header[j] + "' (wanted " + expected + ") in " + path.string());
    }
  }
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      throw FormatError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(header.size()));
    }
    Row row;
    row.t = detail::parse_u64(cells[0]);
    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t j = 1; j < cells.size(); ++j) values.push_back(detail::parse_double(cells[j]));
    if constexpr (std::is_same_v<Row, EncoderSample>) {
      row.positions = std::move(values);
    } else {
      row.velocities = std::move(values);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Row>
void write_joint_csv(const std::filesystem::path& path, std::span<const Row> rows, std::string_view suffix,
                     std::size_t joints) {
  std::ostringstream out;
  out << "t_us";
  for (std::size_t j = 0; j < joints; ++j) out << ",j" << j << suffix;
  out << '\n';
  for (const auto& row : rows) {
    const std::vector<double>* values = nullptr;
    if constexpr (std::is_same_v<Row, EncoderSample>) {
      values = &row.positions;
    } else {
      values = &row.velocities;
    }
    if (values->size() != joints) throw ShapeError("joint count changes within stream");
    out << row.t;
    for (double v : *values) out << ',' << format_double(v);
    out << '\n';
  }
  dump(path, out.str());
}

}  // namespace

std::vector<EncoderSample> read_encoder_csv(const std::filesystem::path& path) {
  return read_joint_csv<EncoderSample>(path, "_pos_deg");
}

void write_encoder_csv(const std::filesystem::path& path, std::span<const EncoderSample> samples) {
  const std::size_t joints = samples.empty() ? 0 : samples.front().positions.size();
  write_joint_csv<EncoderSample>(path, samples, "_pos_deg", joints);
}

std::vector<JointVelocity> read_velocity_csv(const std::filesystem::path& path) {
  return read_joint_csv<JointVelocity>(path, "_vel_deg_s");
}

void write_velocity_csv(const std::filesystem::path& path, std::span<const JointVelocity> velocities) {
  const std::size_t joints = velocities.empty() ? 0 : velocities.front().velocities.size();
  write_joint_csv<JointVelocity>(path, velocities, "_vel_deg_s", joints);
}

}  // namespace imd
