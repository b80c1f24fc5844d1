#include <event_warp/analytic.hpp>
#include <event_warp/noise_sim.hpp>
#include <event_warp/objective.hpp>
#include <event_warp/optimizer.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <thread>
#include <unordered_map>

#include "test_support.hpp"

namespace ew = event_warp;

namespace {

TEST(ContrastVariance, SmallImages) {
  const std::vector<double> constant(7, 3.5);
  const std::vector<std::uint8_t> all(7, 1);
  EXPECT_EQ(ew::contrast_variance(constant, all).value, 0.0);

  const std::vector<double> two{0.0, 2.0, 100.0};
  const std::vector<std::uint8_t> first_two{1, 1, 0};
  const auto v = ew::contrast_variance(two, first_two);
  EXPECT_EQ(v.value, 1.0);
  EXPECT_EQ(v.pixel_count, 2u);
}

TEST(ContrastVariance, Errors) {
  const std::vector<double> img{1.0, 2.0};
  EXPECT_THROW((void)ew::contrast_variance(img, std::vector<std::uint8_t>{0, 0}),
               std::invalid_argument);
  EXPECT_THROW((void)ew::contrast_variance(img, std::vector<std::uint8_t>{1}),
               std::invalid_argument);
}

TEST(ContrastVariance, ScaleEquivariance) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<double> img(999);
  std::vector<std::uint8_t> mask(999);
  for (std::size_t k = 0; k < img.size(); ++k) {
    img[k] = std::round(u(rng));
    mask[k] = k % 7 != 0;
  }
  const double base = ew::contrast_variance(img, mask).value;
  for (double k : {0.25, 2.0, 8.0}) {
    auto scaled = img;
    for (auto& x : scaled) x *= k;
    EXPECT_EQ(ew::contrast_variance(scaled, mask).value, k * k * base);
  }
  auto tripled = img;
  for (auto& x : tripled) x *= 3.0;
  EXPECT_NEAR(ew::contrast_variance(tripled, mask).value, 9.0 * base, 1e-12 * base);
}

struct FusedCase {
  ew::Kernel kernel;
  bool corrected;
  std::optional<double> clamp;
};

class FusedMatchesDense : public ::testing::TestWithParam<FusedCase> {};

TEST_P(FusedMatchesDense, RandomStreamsAndVelocities) {
  const auto& c = GetParam();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> v(-60.0, 60.0);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto s = ew::testing::random_stream(6000, {64, 48}, seed, 2'500'000);
    ew::ObjectiveOptions opt;
    opt.kernel = c.kernel;
    opt.corrected = c.corrected;
    opt.clamp = c.clamp;
    const ew::ContrastObjective obj(s, opt);
    for (int k = 0; k < 25; ++k) {
      const ew::Velocity theta = k == 0 ? ew::Velocity{0, 0} : ew::Velocity{v(rng), v(rng)};
      const auto fused = obj.evaluate(theta);
      const auto dense = obj.evaluate_dense(theta);
      ASSERT_EQ(fused.pixel_count, dense.pixel_count);
      ASSERT_NEAR(fused.value, dense.value, 1e-8 * std::abs(dense.value))
          << theta.vx << "," << theta.vy;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    Modes, FusedMatchesDense,
    ::testing::Values(FusedCase{ew::Kernel::nearest, false, std::nullopt},
                      FusedCase{ew::Kernel::nearest, true, std::nullopt},
                      FusedCase{ew::Kernel::nearest, true, 4.0},
                      FusedCase{ew::Kernel::bilinear, false, std::nullopt},
                      FusedCase{ew::Kernel::bilinear, true, std::nullopt}));

// Sparse oracle for canvases too large for the dense path: nearest-kernel
// counts in a hash map, exposure from the canvas frame.
double sparse_contrast(const ew::EventStream& s, const ew::Velocity& theta, bool corrected,
                       double eta, std::size_t& valid) {
  const auto extent = ew::time_extent(s);
  const auto layout = ew::CanvasLayout::for_motion(s.geometry(), theta, extent.delta);
  const ew::CanvasFrame frame(s.geometry(), theta, extent.delta, layout);
  std::unordered_map<std::uint64_t, double> counts;
  for (const auto& p : ew::warp_events(s, theta, extent.t_ref)) {
    const auto i = static_cast<std::uint64_t>(std::floor(p.x + layout.offset_x + 0.5));
    const auto j = static_cast<std::uint64_t>(std::floor(p.y + layout.offset_y + 0.5));
    counts[j << 32 | i] += 1.0;
  }
  valid = ew::count_valid_pixels(frame, eta);
  const double n = static_cast<double>(valid);
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& [key, count] : counts) {
    const double e = frame.exposure(static_cast<int>(key & 0xffffffffu), static_cast<int>(key >> 32));
    if (!ew::exposure_valid(e, eta)) continue;
    const double value = corrected ? count / e : count;
    sum += value;
    sq += value * value;
  }
  const double mean = sum / n;
  return sq / n - mean * mean;
}

TEST(Objective, HugeCanvasMatchesSparseOracle) {
  const auto s = ew::testing::random_stream(20000, {20, 16}, 3, 1'000'000);
  for (bool corrected : {false, true}) {
    ew::ObjectiveOptions opt;
    opt.corrected = corrected;
    opt.eta = 0.0;
    const ew::ContrastObjective obj(s, opt);
    for (const ew::Velocity theta : {ew::Velocity{6e4, 5e4}, ew::Velocity{-7e4, 7e4}}) {
      std::size_t valid = 0;
      const double expected = sparse_contrast(s, theta, corrected, 0.0, valid);
      const auto got = obj.evaluate(theta);
      EXPECT_EQ(got.pixel_count, valid);
      EXPECT_NEAR(got.value, expected, 1e-8 * expected);
    }
  }
}

TEST(Objective, EmptyMaskYieldsZero) {
  const auto s = ew::testing::random_stream(500, {5, 5}, 1, 1'000'000);
  ew::ObjectiveOptions opt;
  opt.corrected = true;
  const ew::ContrastObjective obj(s, opt);
  const ew::Velocity theta{300.0, 300.0};
  const auto fused = obj.evaluate(theta);
  const auto dense = obj.evaluate_dense(theta);
  EXPECT_EQ(fused.pixel_count, 0u);
  EXPECT_EQ(fused.value, 0.0);
  EXPECT_EQ(dense.pixel_count, 0u);
  EXPECT_EQ(dense.value, 0.0);
}

TEST(Objective, RejectsInvalidEta) {
  const auto s = ew::testing::random_stream(10, {5, 5}, 1);
  ew::ObjectiveOptions opt;
  opt.corrected = true;
  opt.eta = 1.5;
  EXPECT_THROW(ew::ContrastObjective(s, opt), std::invalid_argument);
}

TEST(Objective, ConcurrentEvaluationIsConsistent) {
  const auto s = ew::testing::short_window_scene(1);
  ew::ObjectiveOptions opt;
  opt.corrected = true;
  const ew::ContrastObjective obj(s, opt);
  std::vector<ew::Velocity> thetas;
  for (int k = 0; k < 16; ++k) thetas.push_back({-30.0 + 4.0 * k, 17.0 - 2.0 * k});
  std::vector<double> serial;
  for (const auto& t : thetas) serial.push_back(obj.evaluate(t).value);
  std::vector<double> parallel(thetas.size());
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t k = w; k < thetas.size(); k += 4) parallel[k] = obj.evaluate(thetas[k]).value;
    });
  }
  for (auto& t : workers) t.join();
  EXPECT_EQ(parallel, serial);
}

TEST(ObjectiveOracle, NoiseFollowsAnalyticSurfaceAndShotNoiseFloor) {
  const ew::SensorGeometry g{50, 50};
  const auto s = ew::gen_uniform_noise({4e6, 1.0, g, 17, true});
  const double delta = ew::time_extent(s).delta;
  const ew::ContrastObjective raw(s, {});
  ew::ObjectiveOptions copt;
  copt.corrected = true;
  const ew::ContrastObjective corrected(s, copt);
  std::vector<std::array<double, 2>> pairs;
  double num = 0.0;
  double den = 0.0;
  const double c = 4e6 / 2500.0;
  for (int i = 0; i <= 3; ++i) {
    for (int j = 0; j <= 3; ++j) {
      const double sx = 0.5 * i;
      const double sy = 0.5 * j;
      const ew::Velocity theta{sx * g.width / delta, sy * g.height / delta};
      const double value = raw.evaluate(theta).value;
      const double model = ew::analytic::variance_2d(sx, sy, 1.0);
      // Corrected noise keeps only Poisson spread, variance c / exposure per pixel.
      const auto layout = ew::CanvasLayout::for_motion(g, theta, delta);
      const auto field = ew::build_correction_field(g, theta, delta, layout);
      double factor_sum = 0.0;
      for (double f : field.factors) factor_sum += f;
      const double floor = c * factor_sum / static_cast<double>(field.valid_count());
      EXPECT_NEAR(corrected.evaluate(theta).value, floor, 0.1 * floor) << sx << "," << sy;
      if (model == 0.0) continue;
      pairs.push_back({value, model});
      num += value * model;
      den += model * model;
    }
  }
  const double scale = num / den;
  EXPECT_NEAR(scale, c * c, 0.05 * c * c);
  for (const auto& [value, model] : pairs) EXPECT_NEAR(value, scale * model, 0.05 * scale * model);
}

TEST(ObjectiveProperty, CorrectedArgmaxAtTruthOnScene) {
  const auto s = ew::testing::short_window_scene(2);
  ew::ObjectiveOptions opt;
  opt.corrected = true;
  const auto land = ew::landscape(s, {-30, 30, -30, 30}, 1.0, opt);
  const auto best = land.argmax();
  EXPECT_LE(std::abs(best.vx - ew::testing::short_scene_truth.vx), 1.0);
  EXPECT_LE(std::abs(best.vy - ew::testing::short_scene_truth.vy), 1.0);
}

}  // namespace
