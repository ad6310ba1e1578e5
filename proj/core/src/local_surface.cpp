#include "imd/local_surface.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "imd/errors.hpp"

namespace imd {

BinaryPatch::BinaryPatch(int radius)
    : radius_(radius), cells_(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)), 0) {}

int BinaryPatch::count() const { return std::accumulate(cells_.begin(), cells_.end(), 0); }

LocalSurface::LocalSurface(SensorSize sensor, int radius, bool split_polarity)
    : sensor_(sensor),
      radius_(radius),
      capacity_(static_cast<std::size_t>(2 * radius)),
      split_polarity_(split_polarity) {
  if (radius < 1 || radius > 127) {
    throw ConfigError("local surface radius must lie in [1, 127], got " + std::to_string(radius));
  }
  if (sensor.width == 0 || sensor.height == 0 || sensor.width > 65535 || sensor.height > 65535) {
    throw ConfigError("invalid sensor size");
  }
  const std::size_t channels = split_polarity ? 2 : 1;
  const std::size_t queues = static_cast<std::size_t>(sensor.width) * sensor.height * channels;
  slots_.resize(queues * capacity_);
  head_.assign(queues, 0);
  size_.assign(queues, 0);
}

std::size_t LocalSurface::queue_index(int x, int y, Polarity polarity) const {
  const std::size_t pixel = static_cast<std::size_t>(y) * sensor_.width + static_cast<std::size_t>(x);
  if (!split_polarity_) return pixel;
  return pixel * 2 + static_cast<std::size_t>(polarity);
}

void LocalSurface::check_bounds(int x, int y) const {
  if (!sensor_.contains(x, y)) {
    throw BoundsError("pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") outside " +
                      std::to_string(sensor_.width) + "x" + std::to_string(sensor_.height) + " sensor");
  }
}

void LocalSurface::update(const Event& e) {
  check_bounds(e.x, e.y);
  if (has_events_ && e.t < last_t_) {
    throw OrderingError("event timestamp " + std::to_string(e.t) + " precedes " + std::to_string(last_t_));
  }
  has_events_ = true;
  last_t_ = e.t;

  const int x0 = std::max(0, e.x - radius_);
  const int x1 = std::min(static_cast<int>(sensor_.width) - 1, e.x + radius_);
  const int y0 = std::max(0, e.y - radius_);
  const int y1 = std::min(static_cast<int>(sensor_.height) - 1, e.y + radius_);
  const Slot slot{e.x, e.y, e.polarity, e.t};
  const auto cap = static_cast<std::uint8_t>(capacity_);

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const std::size_t q = queue_index(x, y, e.polarity);
      Slot* ring = &slots_[q * capacity_];
      std::uint8_t& head = head_[q];
      std::uint8_t& size = size_[q];
      // head is the oldest slot; a full ring overwrites it.
      if (size < cap) {
        ring[(head + size) % cap] = slot;
        ++size;
      } else {
        ring[head] = slot;
        head = static_cast<std::uint8_t>((head + 1) % cap);
      }
    }
  }
}

std::vector<Event> LocalSurface::queue(int x, int y, Polarity polarity) const {
  check_bounds(x, y);
  const std::size_t q = queue_index(x, y, polarity);
  const Slot* ring = &slots_[q * capacity_];
  std::vector<Event> out;
  out.reserve(size_[q]);
  for (std::size_t i = 0; i < size_[q]; ++i) {
    const Slot& s = ring[(head_[q] + i) % capacity_];
    out.push_back(Event{s.x, s.y, s.polarity, s.t});
  }
  return out;
}

std::size_t LocalSurface::queue_size(int x, int y, Polarity polarity) const {
  check_bounds(x, y);
  return size_[queue_index(x, y, polarity)];
}

BinaryPatch LocalSurface::patch(int x, int y, Polarity polarity) const {
  check_bounds(x, y);
  BinaryPatch out(radius_);
  const std::size_t q = queue_index(x, y, polarity);
  const Slot* ring = &slots_[q * capacity_];
  for (std::size_t i = 0; i < size_[q]; ++i) {
    const Slot& s = ring[(head_[q] + i) % capacity_];
    out.set_offset(s.x - x, s.y - y);
  }
  return out;
}

}  // namespace imd
