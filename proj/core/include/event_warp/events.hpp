#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace event_warp {

enum class Polarity : std::uint8_t { off = 0, on = 1 };

struct Event {
  std::uint64_t t = 0;  // microseconds
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Polarity p = Polarity::off;

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorGeometry {
  int width = 0;
  int height = 0;

  friend bool operator==(const SensorGeometry&, const SensorGeometry&) = default;

  [[nodiscard]] bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

/// Throws std::invalid_argument unless 1 <= width, height <= 65535.
void validate(const SensorGeometry& geometry);

/// Malformed input. `location` is a 1-based line number for the text format
/// and a byte offset for the binary format.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}
  [[nodiscard]] std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

/// A well-formed record that violates the sensor bounds.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::size_t record_index)
      : std::runtime_error(what), record_index_(record_index) {}
  [[nodiscard]] std::size_t record_index() const noexcept { return record_index_; }

 private:
  std::size_t record_index_;
};

/// Immutable, time-sorted sequence of events from one sensor.
class EventStream {
 public:
  EventStream() = default;
  /// Validates coordinates against `geometry` and stable-sorts by timestamp.
  EventStream(std::vector<Event> events, SensorGeometry geometry);

  [[nodiscard]] const std::vector<Event>& events() const noexcept { return events_; }
  [[nodiscard]] const SensorGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
  [[nodiscard]] bool empty() const noexcept { return events_.empty(); }

  auto begin() const noexcept { return events_.begin(); }
  auto end() const noexcept { return events_.end(); }

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  std::vector<Event> events_;
  SensorGeometry geometry_{};
};

struct TimeExtent {
  std::uint64_t t_ref = 0;  // microseconds, first timestamp
  double delta = 0.0;       // seconds, last - first
};

[[nodiscard]] TimeExtent time_extent(const EventStream& stream);

[[nodiscard]] constexpr double microseconds_to_seconds(std::uint64_t us) noexcept {
  return static_cast<double>(us) * 1e-6;
}

enum class EventFormat { text, binary };

inline constexpr std::string_view binary_magic = "EVT1";
inline constexpr std::size_t binary_header_size = 8;
inline constexpr std::size_t binary_record_size = 13;

/// Text: lines "t,x,y,p", '#' starts a comment line. The geometry is required.
/// Binary: "EVT1", u16 width, u16 height, then 13-byte little-endian records
/// (u64 t, u16 x, u16 y, u8 p). The header geometry is used; if `geometry` is
/// also given it must agree with the header.
[[nodiscard]] EventStream parse_events(std::string_view bytes, EventFormat format,
                                       std::optional<SensorGeometry> geometry);

[[nodiscard]] std::string serialize_events(const EventStream& stream, EventFormat format);

/// Binary if the file starts with the magic, text otherwise.
[[nodiscard]] EventFormat detect_format(std::string_view bytes) noexcept;

[[nodiscard]] EventStream read_events_file(const std::filesystem::path& path,
                                           std::optional<SensorGeometry> geometry);
void write_events_file(const std::filesystem::path& path, const EventStream& stream,
                       EventFormat format);

}  // namespace event_warp
