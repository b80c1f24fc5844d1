#include "event_warp/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace event_warp::analytic {

namespace {

void check_support(double p, double s, const char* axis) {
  const double upper = 1.0 + std::abs(s);
  if (!(p >= 0.0 && p <= upper)) {
    throw std::domain_error(std::string(axis) + " position " + std::to_string(p) +
                            " outside support [0, " + std::to_string(upper) + "]");
  }
}

// Maps a position under a negative shear onto the positive-shear frame.
double reflect(double p, double s) noexcept {
  return s < 0.0 ? (1.0 - s) - p : p;
}

}  // namespace

double height_1d(double p, double s, double c) {
  check_support(p, s, "normalized");
  p = reflect(p, s);
  s = std::abs(s);
  if (s == 0.0) return c;
  if (s <= 1.0) {
    if (p <= s) return c * p / s;
    if (p <= 1.0) return c;
    return c * (1.0 - (p - 1.0) / s);
  }
  if (p <= 1.0) return c * p / s;
  if (p <= s) return c / s;
  return c * (s + 1.0 - p) / s;
}

double mean_1d(double s, double c) noexcept { return c / (std::abs(s) + 1.0); }

double variance_1d(double s, double c) noexcept {
  s = std::abs(s);
  const double sp1 = s + 1.0;
  if (s <= 1.0) return c * c * s * (2.0 - s) / (3.0 * sp1 * sp1);
  return c * c * (2.0 * s - 1.0) / (3.0 * s * s * sp1 * sp1);
}

std::optional<double> alpha_1d(double p, double s) {
  check_support(p, s, "normalized");
  p = reflect(p, s);
  s = std::abs(s);
  if (s == 0.0) return 1.0;
  if (p <= 0.0 || p >= 1.0 + s) return std::nullopt;
  if (s <= 1.0) {
    if (p <= s) return s / p;
    if (p <= 1.0) return 1.0;
    return s / (s + 1.0 - p);
  }
  if (p <= 1.0) return s / p;
  if (p <= s) return s;
  return s / (s + 1.0 - p);
}

double exposure(double px, double py, double a, double b) noexcept {
  double lo = 0.0;
  double hi = 1.0;
  if (a > 0.0) {
    lo = std::max(lo, (px - 1.0) / a);
    hi = std::min(hi, px / a);
  } else if (px < 0.0 || px > 1.0) {
    return 0.0;
  }
  if (b > 0.0) {
    lo = std::max(lo, (py - 1.0) / b);
    hi = std::min(hi, py / b);
  } else if (py < 0.0 || py > 1.0) {
    return 0.0;
  }
  return std::max(0.0, hi - lo);
}

bool in_field_of_view(double px, double py, double a, double b) noexcept {
  if (a <= 0.0 || b <= 0.0) return true;
  // Lower-right triangle: the x-interval starts after the y-interval ends.
  if ((px - 1.0) / a > py / b) return false;
  // Upper-left triangle, mirrored.
  if ((py - 1.0) / b > px / a) return false;
  return true;
}

HeightSample height_2d(double px, double py, double sx, double sy, double c) {
  check_support(px, sx, "x");
  check_support(py, sy, "y");
  px = reflect(px, sx);
  py = reflect(py, sy);
  const double a = std::abs(sx);
  const double b = std::abs(sy);
  if (!in_field_of_view(px, py, a, b)) return {0.0, false};
  return {c * exposure(px, py, a, b), true};
}

double mean_2d(double sx, double sy, double c) noexcept {
  return c / (std::abs(sx) + std::abs(sy) + 1.0);
}

double variance_2d(double sx, double sy, double c) noexcept {
  double a = std::abs(sx);
  double b = std::abs(sy);
  if (a < b) std::swap(a, b);
  const double sum = a + b + 1.0;
  if (a <= 1.0) {
    const double qa = -2.0 * a * a + 4.0 * a;
    const double qb = -2.0 * b * b + 4.0 * b;
    return c * c * (a * a * b + a * b * b - 3.0 * a * b + qa + qb) / (6.0 * sum * sum);
  }
  const double num = 4.0 * a * a * b + 4.0 * a * a - 2.0 * a * b * b - 3.0 * a * b - 2.0 * a +
                     b * b + b;
  return c * c * num / (6.0 * a * a * a * sum * sum);
}

std::optional<double> alpha_2d(double px, double py, double sx, double sy) {
  const auto h = height_2d(px, py, sx, sy, 1.0);
  if (!h.in_domain || !(h.value > 0.0)) return std::nullopt;
  return 1.0 / h.value;
}

}  // namespace event_warp::analytic
