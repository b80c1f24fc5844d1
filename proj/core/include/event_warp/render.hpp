#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace event_warp {

enum class Normalization { linear, percentile };

struct RenderOptions {
  Normalization normalization = Normalization::linear;
  double lo_percentile = 1.0;
  double hi_percentile = 99.0;
  double gamma = 1.0;  // output = normalized^(1/gamma)
  bool invert = false;

  /// Percentile clip (1, 99); for event maps where hot pixels would otherwise
  /// crush the display range.
  [[nodiscard]] static RenderOptions for_event_map() {
    return {Normalization::percentile, 1.0, 99.0, 1.0, false};
  }
};

/// Row-major view of a real-valued grid.
struct GridView {
  std::span<const double> values;
  std::size_t width = 0;
  std::size_t height = 0;
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Maps grid values to 0..255. A grid whose normalization range is empty
/// (e.g. constant values) renders as mid-gray 128. Throws
/// std::invalid_argument for an empty grid or invalid options.
[[nodiscard]] GrayImage render_grayscale(const GridView& grid, const RenderOptions& options = {});

/// 8-bit grayscale PNG, single IDAT, no filtering.
[[nodiscard]] std::string encode_png(const GrayImage& image);
/// Binary PGM (P5), maxval 255.
[[nodiscard]] std::string encode_pgm(const GrayImage& image);

/// Writes PGM when the extension is .pgm, PNG otherwise.
void write_image(const std::filesystem::path& path, const GrayImage& image);

}  // namespace event_warp
