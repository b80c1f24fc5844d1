#include "event_warp/warp.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace event_warp {

namespace {

// Largest canvas the dense image path will allocate (doubles).
constexpr std::size_t max_dense_pixels = std::size_t{1} << 28;

int checked_extent(double extent, const char* axis) {
  if (!std::isfinite(extent) || extent > static_cast<double>(std::numeric_limits<int>::max())) {
    throw std::length_error(std::string("warped canvas ") + axis + " extent is not representable");
  }
  return static_cast<int>(extent);
}

}  // namespace

CanvasLayout CanvasLayout::for_motion(const SensorGeometry& geometry, const Velocity& theta,
                                      double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("time window must be non-negative");
  if (!std::isfinite(theta.vx) || !std::isfinite(theta.vy)) {
    throw std::invalid_argument("velocity must be finite");
  }
  const double sx = theta.vx * delta;
  const double sy = theta.vy * delta;
  CanvasLayout layout;
  layout.width = checked_extent(std::ceil(geometry.width + std::abs(sx)), "x");
  layout.height = checked_extent(std::ceil(geometry.height + std::abs(sy)), "y");
  layout.offset_x = checked_extent(std::ceil(std::max(0.0, sx)), "x");
  layout.offset_y = checked_extent(std::ceil(std::max(0.0, sy)), "y");
  return layout;
}

double WarpedImage::total() const noexcept {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

std::vector<Point2> warp_events(const EventStream& stream, const Velocity& theta,
                                std::uint64_t t_ref) {
  std::vector<Point2> out;
  out.reserve(stream.size());
  for (const auto& e : stream) {
    // Events before t_ref warp forward in time.
    const double dt = e.t >= t_ref ? microseconds_to_seconds(e.t - t_ref)
                                   : -microseconds_to_seconds(t_ref - e.t);
    out.push_back({e.x - theta.vx * dt, e.y - theta.vy * dt});
  }
  return out;
}

WarpedImage accumulate(std::span<const Point2> points, const SensorGeometry& geometry,
                       const Velocity& theta, double delta, Kernel kernel) {
  WarpedImage image;
  image.layout = CanvasLayout::for_motion(geometry, theta, delta);
  image.theta = theta;
  image.delta = delta;
  image.geometry = geometry;
  if (image.layout.pixel_count() > max_dense_pixels) {
    throw std::length_error("warped canvas of " + std::to_string(image.layout.width) + "x" +
                            std::to_string(image.layout.height) + " pixels is too large");
  }
  image.values.assign(image.layout.pixel_count(), 0.0);

  const auto width = static_cast<std::size_t>(image.layout.width);
  const double ox = image.layout.offset_x;
  const double oy = image.layout.offset_y;
  for (const auto& pt : points) {
    const double cx = pt.x + ox;
    const double cy = pt.y + oy;
    if (kernel == Kernel::nearest) {
      const auto i = static_cast<std::size_t>(detail::nearest_index(cx, image.layout.width));
      const auto j = static_cast<std::size_t>(detail::nearest_index(cy, image.layout.height));
      image.values[j * width + i] += 1.0;
    } else {
      const auto tx = detail::bilinear_taps(cx, image.layout.width);
      const auto ty = detail::bilinear_taps(cy, image.layout.height);
      const auto x0 = static_cast<std::size_t>(tx.lo);
      const auto x1 = static_cast<std::size_t>(tx.hi);
      const auto y0 = static_cast<std::size_t>(ty.lo);
      const auto y1 = static_cast<std::size_t>(ty.hi);
      image.values[y0 * width + x0] += (1.0 - tx.w_hi) * (1.0 - ty.w_hi);
      image.values[y0 * width + x1] += tx.w_hi * (1.0 - ty.w_hi);
      image.values[y1 * width + x0] += (1.0 - tx.w_hi) * ty.w_hi;
      image.values[y1 * width + x1] += tx.w_hi * ty.w_hi;
    }
  }
  return image;
}

WarpedImage warp_accumulate(const EventStream& stream, const Velocity& theta, Kernel kernel) {
  const auto extent = time_extent(stream);
  const auto points = warp_events(stream, theta, extent.t_ref);
  return accumulate(points, stream.geometry(), theta, extent.delta, kernel);
}

}  // namespace event_warp
