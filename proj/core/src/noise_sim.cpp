#include "event_warp/noise_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace event_warp {

namespace {

struct Interval {
  double lo;
  double hi;
  [[nodiscard]] double length() const { return std::max(0.0, hi - lo); }
};

// Times in [0, delta] at which p0 + v t lies in [0, extent).
Interval axis_window(double p0, double v, double extent, double delta) {
  if (v == 0.0) {
    if (p0 >= 0.0 && p0 < extent) return {0.0, delta};
    return {0.0, 0.0};
  }
  double t0 = (0.0 - p0) / v;
  double t1 = (extent - p0) / v;
  if (t0 > t1) std::swap(t0, t1);
  return {std::max(0.0, t0), std::min(delta, t1)};
}

Interval visible_window(const Feature& f, const Velocity& theta, const SensorGeometry& g,
                        double delta) {
  const auto wx = axis_window(f.x, theta.vx, g.width, delta);
  const auto wy = axis_window(f.y, theta.vy, g.height, delta);
  return {std::max(wx.lo, wy.lo), std::min(wx.hi, wy.hi)};
}

std::uint64_t to_microseconds(double seconds) {
  return static_cast<std::uint64_t>(std::llround(seconds * 1e6));
}

void check(const NoiseSpec& spec) {
  validate(spec.geometry);
  if (!(spec.rho >= 0.0) || !std::isfinite(spec.rho)) {
    throw std::invalid_argument("noise rate must be finite and non-negative");
  }
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) {
    throw std::invalid_argument("time window must be finite and non-negative");
  }
}

std::vector<Event> noise_events(const NoiseSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  const double mean = spec.rho * spec.delta;
  std::uint64_t count = 0;
  if (spec.exact_count) {
    count = static_cast<std::uint64_t>(std::llround(mean));
  } else if (mean > 0.0) {
    count = std::poisson_distribution<std::uint64_t>(mean)(rng);
  }

  std::uniform_int_distribution<int> ux(0, spec.geometry.width - 1);
  std::uniform_int_distribution<int> uy(0, spec.geometry.height - 1);
  std::uniform_int_distribution<std::uint64_t> ut(0, to_microseconds(spec.delta));
  std::bernoulli_distribution up(0.5);

  std::vector<Event> events;
  events.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Event e;
    e.x = static_cast<std::uint16_t>(ux(rng));
    e.y = static_cast<std::uint16_t>(uy(rng));
    e.t = ut(rng);
    e.p = up(rng) ? Polarity::on : Polarity::off;
    events.push_back(e);
  }
  return events;
}

}  // namespace

EventStream gen_uniform_noise(const NoiseSpec& spec) {
  check(spec);
  return EventStream(noise_events(spec), spec.geometry);
}

double expected_visible_events(const Feature& feature, const Velocity& theta,
                               const SensorGeometry& geometry, double delta) {
  return feature.rate * visible_window(feature, theta, geometry, delta).length();
}

EventStream gen_translating_scene(const SceneSpec& spec) {
  check(spec.noise);
  const auto& g = spec.noise.geometry;
  const double delta = spec.noise.delta;
  if (!std::isfinite(spec.theta_true.vx) || !std::isfinite(spec.theta_true.vy)) {
    throw std::invalid_argument("scene velocity must be finite");
  }

  std::mt19937_64 rng(spec.seed);
  auto events = noise_events(spec.noise);
  std::bernoulli_distribution up(0.5);

  for (const auto& f : spec.features) {
    if (!(f.rate >= 0.0)) throw std::invalid_argument("feature rate must be non-negative");
    const auto window = visible_window(f, spec.theta_true, g, delta);
    const double mean = f.rate * window.length();
    if (!(mean > 0.0)) continue;
    const auto count = std::poisson_distribution<std::uint64_t>(mean)(rng);
    std::uniform_real_distribution<double> ut(window.lo, window.hi);
    for (std::uint64_t k = 0; k < count; ++k) {
      const double t = ut(rng);
      const double px = std::floor(f.x + spec.theta_true.vx * t);
      const double py = std::floor(f.y + spec.theta_true.vy * t);
      if (px < 0.0 || py < 0.0 || px >= g.width || py >= g.height) continue;
      events.push_back({to_microseconds(t), static_cast<std::uint16_t>(px),
                        static_cast<std::uint16_t>(py), up(rng) ? Polarity::on : Polarity::off});
    }
  }
  return EventStream(std::move(events), g);
}

std::vector<Feature> scatter_features(std::size_t count, const Velocity& theta,
                                      const SensorGeometry& geometry, double delta, double rate,
                                      std::uint64_t seed) {
  validate(geometry);
  const double sx = theta.vx * delta;
  const double sy = theta.vy * delta;
  std::uniform_real_distribution<double> ux(std::min(0.0, -sx),
                                            std::max<double>(geometry.width, geometry.width - sx));
  std::uniform_real_distribution<double> uy(std::min(0.0, -sy),
                                            std::max<double>(geometry.height, geometry.height - sy));

  // Longest time any world point can stay in view.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double cross_x = theta.vx != 0.0 ? geometry.width / std::abs(theta.vx) : inf;
  const double cross_y = theta.vy != 0.0 ? geometry.height / std::abs(theta.vy) : inf;
  const double longest = std::min({delta, cross_x, cross_y});

  std::mt19937_64 rng(seed);
  std::vector<Feature> out;
  out.reserve(count);
  while (out.size() < count) {
    const Feature f{ux(rng), uy(rng), rate};
    if (visible_window(f, theta, geometry, delta).length() >= 0.5 * longest) out.push_back(f);
  }
  return out;
}

std::vector<Feature> segment_features(double x0, double y0, double x1, double y1,
                                      std::size_t count, double rate) {
  std::vector<Feature> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count > 1 ? static_cast<double>(k) / static_cast<double>(count - 1) : 0.0;
    out.push_back({x0 + t * (x1 - x0), y0 + t * (y1 - y0), rate});
  }
  return out;
}

}  // namespace event_warp
