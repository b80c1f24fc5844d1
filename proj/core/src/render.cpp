#include "event_warp/render.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace event_warp {

namespace {

double percentile(std::vector<double> sorted_copy, double q) {
  std::sort(sorted_copy.begin(), sorted_copy.end());
  const double pos = q / 100.0 * static_cast<double>(sorted_copy.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted_copy.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted_copy[lo] + frac * (sorted_copy[hi] - sorted_copy[lo]);
}

void put_u32_be(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::string body = std::string(type, 4) + data;
  out += body;
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

GrayImage render_grayscale(const GridView& grid, const RenderOptions& options) {
  if (grid.width == 0 || grid.height == 0 || grid.values.size() != grid.width * grid.height) {
    throw std::invalid_argument("render_grayscale: grid must be non-empty and match its shape");
  }
  if (!(options.gamma > 0.0)) throw std::invalid_argument("render_grayscale: gamma must be > 0");

  double lo = 0.0;
  double hi = 0.0;
  if (options.normalization == Normalization::linear) {
    const auto [mn, mx] = std::minmax_element(grid.values.begin(), grid.values.end());
    lo = *mn;
    hi = *mx;
  } else {
    if (!(options.lo_percentile >= 0.0 && options.lo_percentile < options.hi_percentile &&
          options.hi_percentile <= 100.0)) {
      throw std::invalid_argument("render_grayscale: need 0 <= lo < hi <= 100 percentiles");
    }
    const std::vector<double> copy(grid.values.begin(), grid.values.end());
    lo = percentile(copy, options.lo_percentile);
    hi = percentile(copy, options.hi_percentile);
  }

  GrayImage image{grid.width, grid.height, {}};
  image.pixels.resize(grid.values.size());
  if (!(hi > lo)) {
    std::fill(image.pixels.begin(), image.pixels.end(), std::uint8_t{128});
    return image;
  }
  const double inv_gamma = 1.0 / options.gamma;
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    double x = std::clamp((grid.values[k] - lo) / (hi - lo), 0.0, 1.0);
    if (options.gamma != 1.0) x = std::pow(x, inv_gamma);
    if (options.invert) x = 1.0 - x;
    image.pixels[k] = static_cast<std::uint8_t>(std::lround(x * 255.0));
  }
  return image;
}

std::string encode_png(const GrayImage& image) {
  if (image.width == 0 || image.height == 0) throw std::invalid_argument("encode_png: empty image");

  std::string raw;
  raw.reserve((image.width + 1) * image.height);
  for (std::size_t row = 0; row < image.height; ++row) {
    raw.push_back('\0');  // filter: none
    const auto* begin = image.pixels.data() + row * image.width;
    raw.append(reinterpret_cast<const char*>(begin), image.width);
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                Z_BEST_COMPRESSION) != Z_OK) {
    throw std::runtime_error("encode_png: zlib compression failed");
  }
  compressed.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32_be(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr += std::string("\x08\x00\x00\x00\x00", 5);  // 8-bit, grayscale, deflate, no filter, no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});
  return out;
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

void write_image(const std::filesystem::path& path, const GrayImage& image) {
  const auto bytes = path.extension() == ".pgm" ? encode_pgm(image) : encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write image " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace event_warp
