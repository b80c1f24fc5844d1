#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "event_warp/correction.hpp"
#include "event_warp/events.hpp"
#include "event_warp/warp.hpp"

namespace event_warp {

/// Variance contrast over `pixel_count` valid pixels.
struct ContrastValue {
  double value = 0.0;
  std::size_t pixel_count = 0;
};

/// Mean squared deviation from the mean over the masked pixels. Throws
/// std::invalid_argument on an empty mask or mismatched sizes.
[[nodiscard]] ContrastValue contrast_variance(std::span<const double> values,
                                              std::span<const std::uint8_t> mask);
[[nodiscard]] ContrastValue contrast_variance(const WarpedImage& image,
                                              std::span<const std::uint8_t> mask);
[[nodiscard]] ContrastValue contrast_variance(const CorrectedImage& image);

struct ObjectiveOptions {
  Kernel kernel = Kernel::nearest;
  bool corrected = false;
  /// Thin-support threshold for the corrected image. The raw image always
  /// uses the geometric valid domain (eta = 0).
  double eta = 0.02;
  std::optional<double> clamp;

  [[nodiscard]] CorrectionOptions correction() const {
    return {corrected ? eta : 0.0, clamp};
  }
};

/// Contrast of the (raw or corrected) image of warped events as a function of
/// the candidate velocity, for one immutable stream.
///
/// evaluate() fuses warp, accumulation, correction and variance and touches
/// only occupied pixels; evaluate_dense() composes the individual module
/// operations and serves as its reference. Both return the same value up to
/// floating-point summation order. evaluate() is safe to call concurrently.
///
/// If no canvas pixel is valid (extreme shears with eta > 0), both return a
/// zero value with pixel_count == 0.
class ContrastObjective {
 public:
  ContrastObjective(const EventStream& stream, ObjectiveOptions options = {});

  [[nodiscard]] ContrastValue evaluate(const Velocity& theta) const;
  [[nodiscard]] ContrastValue evaluate_dense(const Velocity& theta) const;

  [[nodiscard]] const ObjectiveOptions& options() const noexcept { return options_; }
  [[nodiscard]] const TimeExtent& extent() const noexcept { return extent_; }
  [[nodiscard]] const SensorGeometry& geometry() const noexcept { return stream_->geometry(); }

 private:
  const EventStream* stream_;
  ObjectiveOptions options_;
  TimeExtent extent_;
  std::vector<std::uint16_t> xs_;
  std::vector<std::uint16_t> ys_;
  std::vector<double> dts_;  // seconds since t_ref
  double slice_seconds_ = 0.0;
};

}  // namespace event_warp
