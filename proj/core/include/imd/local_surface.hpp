#pragma once

#include <cstdint>
#include <vector>

#include "imd/event.hpp"

namespace imd {

/// Square binary occupancy grid of side 2l+1 centred on a pixel.
/// Cell (row, col) corresponds to the pixel offset (col - l, row - l).
class BinaryPatch {
 public:
  explicit BinaryPatch(int radius);

  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }

  bool at(int row, int col) const { return cells_[index(row, col)] != 0; }
  void set(int row, int col) { cells_[index(row, col)] = 1; }

  /// Offset accessors relative to the centre pixel.
  bool at_offset(int dx, int dy) const { return at(dy + radius_, dx + radius_); }
  void set_offset(int dx, int dy) { set(dy + radius_, dx + radius_); }

  int count() const;
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  friend bool operator==(const BinaryPatch&, const BinaryPatch&) = default;

 private:
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row * side() + col); }

  int radius_;
  std::vector<std::uint8_t> cells_;
};

/// Per-pixel local event surfaces.
///
/// Every pixel owns a FIFO of the most recent events that fell inside its
/// (2l+1)x(2l+1) neighbourhood, capped at 2l events. An insertion fans out to
/// all neighbourhood queues, so a patch query at any pixel is a read of one
/// queue. Polarities live in separate channels unless split_polarity is off.
class LocalSurface {
 public:
  LocalSurface(SensorSize sensor, int radius, bool split_polarity = true);

  /// Throws BoundsError for out-of-sensor events and OrderingError when
  /// e.t precedes the previously inserted timestamp.
  void update(const Event& e);

  /// Occupancy of the queue at (x, y) for the given polarity channel.
  BinaryPatch patch(int x, int y, Polarity polarity) const;

  /// Queued events at (x, y), oldest first.
  std::vector<Event> queue(int x, int y, Polarity polarity) const;
  std::size_t queue_size(int x, int y, Polarity polarity) const;

  int radius() const { return radius_; }
  std::size_t window_capacity() const { return capacity_; }
  bool split_polarity() const { return split_polarity_; }
  SensorSize sensor() const { return sensor_; }
  Timestamp last_timestamp() const { return last_t_; }

 private:
  struct Slot {
    std::uint16_t x;
    std::uint16_t y;
    Polarity polarity;
    Timestamp t;
  };

  std::size_t queue_index(int x, int y, Polarity polarity) const;
  void check_bounds(int x, int y) const;

  SensorSize sensor_;
  int radius_;
  std::size_t capacity_;
  bool split_polarity_;
  Timestamp last_t_ = 0;
  bool has_events_ = false;

  // Ring buffers, capacity_ slots per queue.
  std::vector<Slot> slots_;
  std::vector<std::uint8_t> head_;
  std::vector<std::uint8_t> size_;
};

}  // namespace imd
