#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace imd {

/// Event timestamps are integer microseconds, the sensor's native resolution.
using Timestamp = std::uint64_t;

inline constexpr double kMicrosPerSecond = 1e6;

constexpr double to_seconds(Timestamp t) { return static_cast<double>(t) / kMicrosPerSecond; }

/// Signed difference a - b in seconds.
constexpr double seconds_between(Timestamp a, Timestamp b) {
  return (static_cast<double>(a) - static_cast<double>(b)) / kMicrosPerSecond;
}

enum class Polarity : std::uint8_t { Off = 0, On = 1 };

enum class Label : std::uint8_t { Unknown = 0, Background = 1, IndependentMotion = 2 };

std::string_view to_string(Label label);
Label label_from_string(std::string_view name);

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Polarity polarity = Polarity::Off;
  Timestamp t = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

struct LabeledEvent {
  Event event;
  Label label = Label::Unknown;

  friend bool operator==(const LabeledEvent&, const LabeledEvent&) = default;
};

struct SensorSize {
  std::uint32_t width = 304;
  std::uint32_t height = 240;

  constexpr bool contains(long long x, long long y) const {
    return x >= 0 && y >= 0 && x < static_cast<long long>(width) && y < static_cast<long long>(height);
  }
  friend bool operator==(const SensorSize&, const SensorSize&) = default;
};

/// A corner event augmented with the image velocity of its cluster (px/s).
struct FlowEvent {
  Event event;
  Label label = Label::Unknown;
  double vx = 0.0;
  double vy = 0.0;
  std::uint32_t cluster_id = 0;

  friend bool operator==(const FlowEvent&, const FlowEvent&) = default;
};

/// Header of an EVT0 event file.
struct StreamHeader {
  static constexpr std::array<char, 4> kMagic{'E', 'V', 'T', '0'};
  static constexpr std::uint32_t kVersion = 1;

  std::array<char, 4> magic = kMagic;
  std::uint32_t version = kVersion;
  SensorSize sensor;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

}  // namespace imd
