#pragma once

#include <cstdint>
#include <vector>

#include "event_warp/events.hpp"
#include "event_warp/warp.hpp"

namespace event_warp {

struct NoiseSpec {
  double rho = 0.0;    // events per second over the whole sensor
  double delta = 1.0;  // seconds
  SensorGeometry geometry{240, 180};
  std::uint64_t seed = 0;
  /// Emit exactly round(rho * delta) events instead of a Poisson count.
  bool exact_count = false;
};

/// Uniformly distributed noise: positions uniform over the sensor pixels,
/// timestamps uniform over [0, delta]. Deterministic for a given seed.
[[nodiscard]] EventStream gen_uniform_noise(const NoiseSpec& spec);

/// A world-fixed point emitter. (x, y) is its sensor position at t = 0; it
/// moves across the sensor at the scene velocity.
struct Feature {
  double x = 0.0;
  double y = 0.0;
  double rate = 100.0;  // events per second while inside the sensor
};

struct SceneSpec {
  Velocity theta_true;
  std::vector<Feature> features;
  NoiseSpec noise;  // geometry and delta of the whole scene
  std::uint64_t seed = 0;
};

/// Features emit Poisson events along their trajectories; only emissions that
/// land inside the sensor are kept. Warping by theta_true stacks each
/// feature's events within one pixel. Noise per `spec.noise` is superposed.
[[nodiscard]] EventStream gen_translating_scene(const SceneSpec& spec);

/// `count` point features placed uniformly over the world region whose
/// trajectories cross the sensor during [0, delta].
[[nodiscard]] std::vector<Feature> scatter_features(std::size_t count, const Velocity& theta,
                                                    const SensorGeometry& geometry, double delta,
                                                    double rate, std::uint64_t seed);

/// `count` features evenly spaced on the segment from (x0, y0) to (x1, y1).
[[nodiscard]] std::vector<Feature> segment_features(double x0, double y0, double x1, double y1,
                                                    std::size_t count, double rate);

/// Expected number of events a feature emits while inside the sensor.
[[nodiscard]] double expected_visible_events(const Feature& feature, const Velocity& theta,
                                             const SensorGeometry& geometry, double delta);

}  // namespace event_warp
