#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imd/encoder_stream.hpp"
#include "imd/event.hpp"

namespace imd {

// EVT0 (little-endian): "EVT0", u32 version = 1, u32 width, u32 height, then
// 16-byte records: u64 t, u16 x, u16 y, u8 polarity, u8 label, u16 reserved.
inline constexpr std::size_t kEventRecordSize = 16;
inline constexpr std::size_t kEventHeaderSize = 16;

// FLW0 (little-endian): "FLW0", u32 version = 1, then 32-byte records:
// u64 t, u16 x, u16 y, u8 polarity, u8 label, u16 reserved, u32 cluster_id,
// f32 vx, f32 vy, u32 reserved.
inline constexpr std::array<char, 4> kFlowMagic{'F', 'L', 'W', '0'};
inline constexpr std::uint32_t kFlowVersion = 1;
inline constexpr std::size_t kFlowRecordSize = 32;
inline constexpr std::size_t kFlowHeaderSize = 8;

struct EventFile {
  StreamHeader header;
  std::vector<LabeledEvent> events;
};

/// Throws FormatError on bad magic/version, ordering or bounds violations
/// and IoError on unreadable or truncated files.
EventFile read_event_file(const std::filesystem::path& path);
void write_event_file(const std::filesystem::path& path, const StreamHeader& header,
                      std::span<const LabeledEvent> events);

std::vector<FlowEvent> read_flow_file(const std::filesystem::path& path);
void write_flow_file(const std::filesystem::path& path, std::span<const FlowEvent> flows);

/// Sniffs the four-byte magic of a binary stream file.
std::string read_magic(const std::filesystem::path& path);

// Encoder CSV: header "t_us,j0_pos_deg,j1_pos_deg,..." then one row per sample.
std::vector<EncoderSample> read_encoder_csv(const std::filesystem::path& path);
void write_encoder_csv(const std::filesystem::path& path, std::span<const EncoderSample> samples);

// Velocity CSV: same shape, columns "t_us,j0_vel_deg_s,...".
std::vector<JointVelocity> read_velocity_csv(const std::filesystem::path& path);
void write_velocity_csv(const std::filesystem::path& path, std::span<const JointVelocity> velocities);

/// Formats a double so that it parses back to the identical value.
std::string format_double(double value);

}  // namespace imd
