#pragma once

#include <optional>

// Continuous model of uniformly dense noise under a shear warp.
//
// Dense uniform noise over a w x h sensor and a time window is treated as a
// solid box in (x, y, t). Warping by a constant velocity shears the box; the
// accumulated image of the sheared box is its height profile. All quantities
// here use normalized units: positions p = x / w (and y / h), shears
// s = v * delta / w (and v_y * delta / h), measured from the corner of the
// enlarged canvas so that positions span [0, 1 + |s|].
//
// Negative shears are mapped to the positive quadrant by reflecting the
// matching coordinate, p -> (1 + |s|) - p, so a single set of formulas serves
// every sign combination.

namespace event_warp::analytic {

struct NormalizedShear1D {
  double s = 0.0;
  double c = 1.0;
};

struct NormalizedShear2D {
  double sx = 0.0;
  double sy = 0.0;
  double c = 1.0;
};

/// Normalized shear of a velocity (px/s) over `delta` seconds on an axis of
/// `extent` pixels.
[[nodiscard]] constexpr double normalized_shear(double velocity, double delta,
                                                int extent) noexcept {
  return velocity * delta / static_cast<double>(extent);
}

// ---- one dimension --------------------------------------------------------

/// Height of the sheared unit-density segment scaled by c: the trapezoid
/// c*p/s, c, c*(1 - (p-1)/s) for |s| <= 1 and c*p/s, c/s, c*(s+1-p)/s for
/// |s| >= 1. Throws std::domain_error for p outside [0, 1 + |s|].
[[nodiscard]] double height_1d(double p, double s, double c);

/// c / (1 + |s|).
[[nodiscard]] double mean_1d(double s, double c) noexcept;

/// Variance of height_1d over its support:
///   c^2 s(2-s) / (3(s+1)^2)        |s| <= 1
///   c^2 (2s-1) / (3 s^2 (s+1)^2)   |s| >= 1
/// Maximal at |s| = 1/2 with value c^2 / 9.
[[nodiscard]] double variance_1d(double s, double c) noexcept;

/// Multiplicative factor with alpha_1d * height_1d == c inside the support.
/// Empty at the support endpoints, where the factor is unbounded. Throws
/// std::domain_error outside [0, 1 + |s|].
[[nodiscard]] std::optional<double> alpha_1d(double p, double s);

// ---- two dimensions -------------------------------------------------------

/// Fraction of the time window during which canvas point (p_x, p_y) lies in
/// the sensor's field of view, for non-negative shears (a, b). This is the
/// unit-density height; every 2D height and factor below derives from it.
///
/// With u in [0, 1] the elapsed-time fraction, the point is in view while
/// p_x - 1 <= a*u <= p_x and p_y - 1 <= b*u <= p_y, so the exposure is the
/// length of the intersection of those intervals with [0, 1].
[[nodiscard]] double exposure(double px, double py, double a, double b) noexcept;

/// True unless (p_x, p_y) lies in one of the two corner triangles of the
/// canvas that are never inside the field of view. Shears non-negative.
[[nodiscard]] bool in_field_of_view(double px, double py, double a, double b) noexcept;

struct HeightSample {
  double value = 0.0;
  bool in_domain = false;  // false inside a never-in-view corner triangle
};

/// Height of the sheared box at (p_x, p_y). Points in a corner triangle
/// report height 0 with in_domain == false. Throws std::domain_error outside
/// [0, 1 + |sx|] x [0, 1 + |sy|].
[[nodiscard]] HeightSample height_2d(double px, double py, double sx, double sy, double c);

/// c / (|sx| + |sy| + 1); the valid domain has area (1+sx)(1+sy) - sx*sy.
[[nodiscard]] double mean_2d(double sx, double sy, double c) noexcept;

/// Variance of height_2d over the valid domain. With a >= b the absolute
/// shears sorted so that a is the larger one:
///   a <= 1:  c^2 (a^2 b + a b^2 - 3ab + q(a) + q(b)) / (6 (a+b+1)^2),
///            q(s) = -2s^2 + 4s
///   a >= 1:  c^2 (4a^2 b + 4a^2 - 2ab^2 - 3ab - 2a + b^2 + b) / (6 a^3 (a+b+1)^2)
/// The second form holds for every b <= a, which covers the mixed regimes.
[[nodiscard]] double variance_2d(double sx, double sy, double c) noexcept;

/// Factor with alpha_2d * height_2d == c at every valid interior point.
/// Empty in the corner triangles and wherever the height is zero. Throws
/// std::domain_error outside the canvas rectangle.
[[nodiscard]] std::optional<double> alpha_2d(double px, double py, double sx, double sy);

}  // namespace event_warp::analytic
