#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "event_warp/events.hpp"
#include "event_warp/warp.hpp"

namespace event_warp {

/// Maps canvas pixel centers to the normalized positive-shear frame of the
/// analytic model.
///
/// A canvas pixel (i, j) collects warped events whose continuous position
/// (sensor pixel x spans [x, x + 1)) falls in [i, i + 1) - offset, so its
/// center sits at warped coordinate i + 0.5 - offset_x. Negative velocities
/// are handled by reflecting the axis.
class CanvasFrame {
 public:
  CanvasFrame(const SensorGeometry& geometry, const Velocity& theta, double delta,
              const CanvasLayout& layout);

  [[nodiscard]] double px(int column) const noexcept { return x_base_ + x_step_ * column; }
  [[nodiscard]] double py(int row) const noexcept { return y_base_ + y_step_ * row; }

  /// Fractional column whose center maps to normalized position p_x.
  [[nodiscard]] double column_at(double p) const noexcept { return (p - x_base_) / x_step_; }

  /// Fraction of the window pixel (i, j) spent in view; 0 when never seen.
  [[nodiscard]] double exposure(int column, int row) const noexcept;

  [[nodiscard]] double shear_x() const noexcept { return a_; }
  [[nodiscard]] double shear_y() const noexcept { return b_; }
  [[nodiscard]] const CanvasLayout& layout() const noexcept { return layout_; }

 private:
  CanvasLayout layout_;
  double a_ = 0.0;  // |sx|
  double b_ = 0.0;  // |sy|
  double x_base_ = 0.0;
  double x_step_ = 0.0;
  double y_base_ = 0.0;
  double y_step_ = 0.0;
};

struct CorrectionOptions {
  /// Pixels in view for less than this fraction of the window are masked.
  double eta = 0.02;
  /// Optional ceiling on the factor.
  std::optional<double> clamp;
};

/// Per-pixel factor flattening the noise height profile, aligned with a
/// warped-image canvas. Off-mask factors are stored as 0.
struct CorrectionField {
  std::vector<double> factors;
  std::vector<std::uint8_t> mask;  // 1 = inside the valid domain
  CanvasLayout layout;
  Velocity theta;
  double delta = 0.0;
  SensorGeometry geometry;

  [[nodiscard]] std::size_t valid_count() const noexcept;
};

/// Samples the analytic factor at every pixel center. A zero window or zero
/// velocity yields an all-ones field with a full mask.
[[nodiscard]] CorrectionField build_correction_field(const SensorGeometry& geometry,
                                                     const Velocity& theta, double delta,
                                                     const CanvasLayout& layout,
                                                     const CorrectionOptions& options = {});

/// Mask predicate and factor for a single exposure value; shared by the
/// dense field and the fused objective.
[[nodiscard]] inline bool exposure_valid(double exposure, double eta) noexcept {
  return exposure > 0.0 && exposure >= eta;
}
[[nodiscard]] inline double correction_factor(double exposure,
                                              const CorrectionOptions& options) noexcept {
  const double factor = 1.0 / exposure;
  return options.clamp && factor > *options.clamp ? *options.clamp : factor;
}

/// Number of valid pixels per the mask rule, computed row by row without
/// materializing the field. Matches CorrectionField::valid_count().
[[nodiscard]] std::size_t count_valid_pixels(const CanvasFrame& frame, double eta);

/// H * alpha on the mask, 0 elsewhere.
struct CorrectedImage {
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  CanvasLayout layout;
  Velocity theta;
  double delta = 0.0;
  SensorGeometry geometry;
};

/// Throws std::invalid_argument if the image and field canvases differ.
[[nodiscard]] CorrectedImage apply_correction(const WarpedImage& image,
                                              const CorrectionField& field);

}  // namespace event_warp
