#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "event_warp/events.hpp"

namespace event_warp {

/// Candidate motion in px/s.
struct Velocity {
  double vx = 0.0;
  double vy = 0.0;

  friend bool operator==(const Velocity&, const Velocity&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

enum class Kernel { nearest, bilinear };

/// Size of the enlarged canvas that holds every warped event, and the integer
/// shift that maps warped coordinates onto non-negative canvas indices.
struct CanvasLayout {
  int width = 0;
  int height = 0;
  int offset_x = 0;
  int offset_y = 0;

  /// width = ceil(w + |vx| delta), offset_x = ceil(max(0, vx delta));
  /// likewise for the y axis.
  [[nodiscard]] static CanvasLayout for_motion(const SensorGeometry& geometry,
                                               const Velocity& theta, double delta);

  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  friend bool operator==(const CanvasLayout&, const CanvasLayout&) = default;
};

/// Image of warped events: per-pixel accumulated mass on the enlarged canvas,
/// stored row-major (index = row * width + column).
struct WarpedImage {
  std::vector<double> values;
  CanvasLayout layout;
  Velocity theta;
  double delta = 0.0;
  SensorGeometry geometry;

  [[nodiscard]] double at(int column, int row) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(layout.width) +
                  static_cast<std::size_t>(column)];
  }
  [[nodiscard]] double total() const noexcept;
};

/// Shear warp: u' = u - theta * (t - t_ref), with time in seconds.
[[nodiscard]] std::vector<Point2> warp_events(const EventStream& stream, const Velocity& theta,
                                              std::uint64_t t_ref);

/// Accumulates one unit of mass per point. Nearest rounds the shifted
/// coordinate to the closest pixel; bilinear splits the unit over the four
/// surrounding pixels.
[[nodiscard]] WarpedImage accumulate(std::span<const Point2> points,
                                     const SensorGeometry& geometry, const Velocity& theta,
                                     double delta, Kernel kernel = Kernel::nearest);

/// warp_events + accumulate over the stream's own time extent.
[[nodiscard]] WarpedImage warp_accumulate(const EventStream& stream, const Velocity& theta,
                                          Kernel kernel = Kernel::nearest);

namespace detail {

// Canvas column/row of a shifted coordinate, shared by every accumulation path.
inline int clamp_index(double v, int extent) noexcept {
  if (!(v >= 0.0)) return 0;
  if (v >= static_cast<double>(extent - 1)) return extent - 1;
  return static_cast<int>(v);
}

// floor(x + 0.5) keeps ties consistent for non-negative coordinates. Truncation
// equals floor on the unclamped range.
inline int nearest_index(double shifted, int extent) noexcept {
  return clamp_index(shifted + 0.5, extent);
}

struct BilinearTap {
  int lo;
  int hi;
  double w_hi;  // weight of `hi`; `lo` receives 1 - w_hi
};

inline BilinearTap bilinear_taps(double shifted, int extent) noexcept {
  // Taps outside the canvas only occur with zero weight, up to rounding;
  // fold them into the neighbour so mass is conserved.
  if (!(shifted >= 0.0)) return {0, 0, 0.0};
  if (shifted >= static_cast<double>(extent - 1)) return {extent - 1, extent - 1, 0.0};
  const int lo = static_cast<int>(shifted);
  return {lo, lo + 1, shifted - lo};
}

}  // namespace detail

}  // namespace event_warp
