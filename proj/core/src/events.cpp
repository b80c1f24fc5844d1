#include "event_warp/events.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

namespace event_warp {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_field(std::string_view field, T& out) {
  field = trim(field);
  if (field.empty()) return false;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

void check_bounds(const Event& e, const SensorGeometry& geometry, std::size_t index) {
  if (!geometry.contains(e.x, e.y)) {
    std::ostringstream msg;
    msg << "event " << index << ": coordinate (" << e.x << ", " << e.y
        << ") outside " << geometry.width << "x" << geometry.height << " sensor";
    throw ValidationError(msg.str(), index);
  }
}

EventStream parse_text(std::string_view bytes, const SensorGeometry& geometry) {
  std::vector<Event> events;
  std::size_t line_no = 0;
  while (!bytes.empty()) {
    const auto nl = bytes.find('\n');
    const auto raw = bytes.substr(0, nl);
    bytes = nl == std::string_view::npos ? std::string_view{} : bytes.substr(nl + 1);
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::array<std::string_view, 4> fields;
    std::size_t n = 0;
    for (std::string_view rest = line;; ++n) {
      const auto comma = rest.find(',');
      if (n < fields.size()) fields[n] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (n + 1 != fields.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields \"t,x,y,p\"",
                       line_no);
    }

    std::uint64_t t = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    unsigned p = 0;
    if (!parse_field(fields[0], t) || !parse_field(fields[1], x) ||
        !parse_field(fields[2], y) || !parse_field(fields[3], p) || p > 1) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed record '" +
                           std::string(line) + "'",
                       line_no);
    }
    events.push_back({t, x, y, p != 0 ? Polarity::on : Polarity::off});
  }
  return EventStream(std::move(events), geometry);
}

template <typename T>
T load_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T{p[i]} << (8 * i));
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

EventStream parse_binary(std::string_view bytes, std::optional<SensorGeometry> expected) {
  if (bytes.size() < binary_header_size || bytes.substr(0, 4) != binary_magic) {
    throw ParseError("binary stream: missing EVT1 header", 0);
  }
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const SensorGeometry geometry{load_le<std::uint16_t>(data + 4),
                                load_le<std::uint16_t>(data + 6)};
  if (geometry.width < 1 || geometry.height < 1) {
    throw ParseError("binary stream: header geometry must be positive", 4);
  }
  if (expected && *expected != geometry) {
    throw ValidationError("binary stream: header geometry " + std::to_string(geometry.width) +
                              "x" + std::to_string(geometry.height) +
                              " differs from requested " + std::to_string(expected->width) +
                              "x" + std::to_string(expected->height),
                          0);
  }

  const std::size_t payload = bytes.size() - binary_header_size;
  if (payload % binary_record_size != 0) {
    const std::size_t offset =
        binary_header_size + payload / binary_record_size * binary_record_size;
    throw ParseError("binary stream: truncated record at byte offset " + std::to_string(offset),
                     offset);
  }

  const std::size_t count = payload / binary_record_size;
  std::vector<Event> events;
  events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t offset = binary_header_size + i * binary_record_size;
    const unsigned char* rec = data + offset;
    const std::uint8_t p = rec[12];
    if (p > 1) {
      throw ParseError("binary stream: polarity byte " + std::to_string(p) +
                           " at byte offset " + std::to_string(offset + 12),
                       offset + 12);
    }
    events.push_back({load_le<std::uint64_t>(rec), load_le<std::uint16_t>(rec + 8),
                      load_le<std::uint16_t>(rec + 10), static_cast<Polarity>(p)});
  }
  return EventStream(std::move(events), geometry);
}

}  // namespace

void validate(const SensorGeometry& geometry) {
  if (geometry.width < 1 || geometry.height < 1 || geometry.width > 65535 ||
      geometry.height > 65535) {
    throw std::invalid_argument("sensor geometry must be within 1..65535 in both dimensions, got " +
                                std::to_string(geometry.width) + "x" +
                                std::to_string(geometry.height));
  }
}

EventStream::EventStream(std::vector<Event> events, SensorGeometry geometry)
    : events_(std::move(events)), geometry_(geometry) {
  validate(geometry_);
  for (std::size_t i = 0; i < events_.size(); ++i) check_bounds(events_[i], geometry_, i);
  if (!std::is_sorted(events_.begin(), events_.end(),
                      [](const Event& a, const Event& b) { return a.t < b.t; })) {
    std::stable_sort(events_.begin(), events_.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
  }
}

TimeExtent time_extent(const EventStream& stream) {
  if (stream.empty()) return {};
  const auto first = stream.events().front().t;
  const auto last = stream.events().back().t;
  return {first, microseconds_to_seconds(last - first)};
}

EventFormat detect_format(std::string_view bytes) noexcept {
  return bytes.substr(0, binary_magic.size()) == binary_magic ? EventFormat::binary
                                                              : EventFormat::text;
}

EventStream parse_events(std::string_view bytes, EventFormat format,
                         std::optional<SensorGeometry> geometry) {
  if (format == EventFormat::binary) return parse_binary(bytes, geometry);
  if (!geometry) throw std::invalid_argument("text event format requires a sensor geometry");
  validate(*geometry);
  return parse_text(bytes, *geometry);
}

std::string serialize_events(const EventStream& stream, EventFormat format) {
  std::string out;
  if (format == EventFormat::text) {
    out.reserve(stream.size() * 20);
    for (const auto& e : stream) {
      out += std::to_string(e.t);
      out += ',';
      out += std::to_string(e.x);
      out += ',';
      out += std::to_string(e.y);
      out += ',';
      out += e.p == Polarity::on ? '1' : '0';
      out += '\n';
    }
    return out;
  }

  out.reserve(binary_header_size + stream.size() * binary_record_size);
  out.append(binary_magic);
  store_le(out, static_cast<std::uint16_t>(stream.geometry().width));
  store_le(out, static_cast<std::uint16_t>(stream.geometry().height));
  for (const auto& e : stream) {
    store_le(out, e.t);
    store_le(out, e.x);
    store_le(out, e.y);
    out.push_back(static_cast<char>(e.p));
  }
  return out;
}

EventStream read_events_file(const std::filesystem::path& path,
                             std::optional<SensorGeometry> geometry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open event file " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_events(bytes, detect_format(bytes), geometry);
}

void write_events_file(const std::filesystem::path& path, const EventStream& stream,
                       EventFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write event file " + path.string());
  const auto bytes = serialize_events(stream, format);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace event_warp
