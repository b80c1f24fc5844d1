#include "event_warp/correction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "event_warp/analytic.hpp"

namespace event_warp {

CanvasFrame::CanvasFrame(const SensorGeometry& geometry, const Velocity& theta, double delta,
                         const CanvasLayout& layout)
    : layout_(layout) {
  const double w = geometry.width;
  const double h = geometry.height;
  const double shift_x = theta.vx * delta;
  const double shift_y = theta.vy * delta;
  a_ = std::abs(shift_x) / w;
  b_ = std::abs(shift_y) / h;

  const double cx0 = 0.5 - layout.offset_x;  // warped coordinate of column 0's center
  const double cy0 = 0.5 - layout.offset_y;
  if (shift_x >= 0.0) {
    x_base_ = (cx0 + shift_x) / w;
    x_step_ = 1.0 / w;
  } else {
    x_base_ = 1.0 + a_ - cx0 / w;
    x_step_ = -1.0 / w;
  }
  if (shift_y >= 0.0) {
    y_base_ = (cy0 + shift_y) / h;
    y_step_ = 1.0 / h;
  } else {
    y_base_ = 1.0 + b_ - cy0 / h;
    y_step_ = -1.0 / h;
  }
}

double CanvasFrame::exposure(int column, int row) const noexcept {
  return analytic::exposure(px(column), py(row), a_, b_);
}

std::size_t CorrectionField::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

CorrectionField build_correction_field(const SensorGeometry& geometry, const Velocity& theta,
                                       double delta, const CanvasLayout& layout,
                                       const CorrectionOptions& options) {
  validate(geometry);
  if (layout != CanvasLayout::for_motion(geometry, theta, delta)) {
    throw std::invalid_argument("canvas layout does not match the warp of this motion");
  }
  CorrectionField field;
  field.layout = layout;
  field.theta = theta;
  field.delta = delta;
  field.geometry = geometry;
  field.factors.assign(layout.pixel_count(), 0.0);
  field.mask.assign(layout.pixel_count(), 0);

  const CanvasFrame frame(geometry, theta, delta, layout);
  std::size_t k = 0;
  for (int j = 0; j < layout.height; ++j) {
    for (int i = 0; i < layout.width; ++i, ++k) {
      const double e = frame.exposure(i, j);
      if (exposure_valid(e, options.eta)) {
        field.mask[k] = 1;
        field.factors[k] = correction_factor(e, options);
      }
    }
  }
  return field;
}

std::size_t count_valid_pixels(const CanvasFrame& frame, double eta) {
  const auto& layout = frame.layout();
  const double a = frame.shear_x();
  const double b = frame.shear_y();
  const int last = layout.width - 1;
  std::size_t total = 0;

  for (int j = 0; j < layout.height; ++j) {
    auto valid = [&](int i) { return exposure_valid(frame.exposure(i, j), eta); };

    // Exposure along a row is concave in p_x, so the valid pixels form one
    // run that contains the pixel nearest to the exposure peak.
    double peak = 0.5;
    if (a > 0.0) {
      const double q = frame.py(j);
      const double m1 = b > 0.0 ? std::min(1.0, q / b) : 1.0;
      const double m2 = b > 0.0 ? std::max(0.0, (q - 1.0) / b) : 0.0;
      peak = 0.5 * (a * m1 + 1.0 + a * m2);
    }
    const double col = frame.column_at(peak);
    const int c0 = std::clamp(static_cast<int>(std::floor(std::clamp(col, -1.0, double(last) + 1))),
                              0, last);
    const int c1 = std::min(c0 + 1, last);
    int seed = -1;
    if (valid(c0)) {
      seed = c0;
    } else if (valid(c1)) {
      seed = c1;
    }
    if (seed < 0) continue;

    int lo = 0;
    int hi = seed;  // first valid in [lo, hi]
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (valid(mid)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const int left = lo;
    lo = seed;
    hi = last;  // last valid in [lo, hi]
    while (lo < hi) {
      const int mid = lo + (hi - lo + 1) / 2;
      if (valid(mid)) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    total += static_cast<std::size_t>(lo - left + 1);
  }
  return total;
}

CorrectedImage apply_correction(const WarpedImage& image, const CorrectionField& field) {
  if (image.layout != field.layout || image.values.size() != field.factors.size()) {
    throw std::invalid_argument("warped image and correction field canvases differ");
  }
  CorrectedImage out;
  out.layout = image.layout;
  out.theta = image.theta;
  out.delta = image.delta;
  out.geometry = image.geometry;
  out.mask = field.mask;
  out.values.resize(image.values.size());
  for (std::size_t k = 0; k < image.values.size(); ++k) {
    out.values[k] = field.mask[k] ? image.values[k] * field.factors[k] : 0.0;
  }
  return out;
}

}  // namespace event_warp
