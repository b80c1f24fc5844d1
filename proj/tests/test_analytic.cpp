#include <event_warp/analytic.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "quadrature.hpp"

namespace an = event_warp::analytic;

namespace {

using event_warp::testing::quadrature_1d;
using event_warp::testing::quadrature_2d;

// Fraction of the unit time window during which (px, py) is in view, by
// direct sampling of the shear trajectory.
double brute_exposure(double px, double py, double a, double b) {
  constexpr int n = 200000;
  int inside = 0;
  for (int k = 0; k < n; ++k) {
    const double u = (k + 0.5) / n;
    const double x = px - a * u;
    const double y = py - b * u;
    inside += x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0;
  }
  return static_cast<double>(inside) / n;
}

TEST(Analytic, Height1DSegments) {
  EXPECT_DOUBLE_EQ(an::height_1d(0.5, 0.2, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(an::height_1d(0.1, 0.2, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(an::height_1d(1.5, 2.0, 1.0), 0.5);
  EXPECT_NEAR(an::height_1d(1.1, 0.2, 2.0), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(an::height_1d(2.5, 2.0, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(an::height_1d(0.3, 0.0, 3.0), 3.0);
  EXPECT_THROW((void)an::height_1d(1.3, 0.2, 1.0), std::domain_error);
  EXPECT_THROW((void)an::height_1d(-0.1, 0.2, 1.0), std::domain_error);
}

TEST(Analytic, Variance1DValues) {
  EXPECT_EQ(an::variance_1d(0.0, 5.0), 0.0);
  EXPECT_NEAR(an::variance_1d(0.5, 1.0), 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(an::variance_1d(1.0, 1.0), 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(an::variance_1d(0.5, 3.0), 1.0, 1e-14);
  const double below = an::variance_1d(std::nextafter(1.0, 0.0), 1.0);
  const double above = an::variance_1d(std::nextafter(1.0, 2.0), 1.0);
  EXPECT_NEAR(below, above, 1e-12);
}

TEST(Analytic, Variance1DMaximumAtHalf) {
  double best = -1.0;
  double argbest = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double s = i / 10000.0;
    const double v = an::variance_1d(s, 1.0);
    if (v > best) {
      best = v;
      argbest = s;
    }
  }
  EXPECT_NEAR(argbest, 0.5, 1e-4);
  for (double s : {1.5, 2.0, 5.0, 100.0}) EXPECT_LT(an::variance_1d(s, 1.0), best);
}

TEST(Analytic, Alpha1D) {
  EXPECT_DOUBLE_EQ(*an::alpha_1d(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(*an::alpha_1d(0.5, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(*an::alpha_1d(0.2, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(*an::alpha_1d(0.1, 0.2), 2.0);
  EXPECT_DOUBLE_EQ(*an::alpha_1d(1.0, 2.0), 2.0);
  EXPECT_FALSE(an::alpha_1d(0.0, 0.2));
  EXPECT_FALSE(an::alpha_1d(1.2, 0.2));
  EXPECT_THROW((void)an::alpha_1d(2.0, 0.2), std::domain_error);
}

TEST(Analytic, Height2DCases) {
  EXPECT_DOUBLE_EQ(an::height_2d(0.5, 0.5, 0.2, 0.2, 1.0).value, 1.0);
  EXPECT_DOUBLE_EQ(an::height_2d(0.05, 0.5, 0.2, 0.0, 1.0).value, 0.25);
  const auto corner = an::height_2d(1.4, 0.05, 0.5, 0.5, 1.0);
  EXPECT_FALSE(corner.in_domain);
  EXPECT_EQ(corner.value, 0.0);
  EXPECT_THROW((void)an::height_2d(0.5, 1.3, 0.2, 0.2, 1.0), std::domain_error);
}

TEST(Analytic, Height2DReducesTo1D) {
  for (double s : {-1.7, -0.6, 0.3, 1.0, 2.5}) {
    for (int k = 0; k <= 40; ++k) {
      const double p = (1.0 + std::abs(s)) * k / 40.0;
      EXPECT_NEAR(an::height_2d(p, 0.5, s, 0.0, 1.3).value, an::height_1d(p, s, 1.3), 1e-12);
      EXPECT_NEAR(an::height_2d(0.5, p, 0.0, s, 1.3).value, an::height_1d(p, s, 1.3), 1e-12);
    }
  }
}

TEST(Analytic, ExposureMatchesTrajectorySampling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shear(0.0, 2.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 60; ++k) {
    const double a = shear(rng);
    const double b = shear(rng);
    const double px = unit(rng) * (1.0 + a);
    const double py = unit(rng) * (1.0 + b);
    const auto h = an::height_2d(px, py, a, b, 1.0);
    EXPECT_NEAR(h.value, brute_exposure(px, py, a, b), 2e-5) << a << " " << b;
  }
}

TEST(Analytic, Mean2D) {
  EXPECT_DOUBLE_EQ(an::mean_2d(0.0, 0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(an::mean_2d(0.5, 0.5, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(an::mean_2d(0.3, 1.7, 2.0), an::mean_2d(1.7, 0.3, 2.0));
}

TEST(Analytic, Variance2DValues) {
  EXPECT_EQ(an::variance_2d(0.0, 0.0, 1.0), 0.0);
  EXPECT_NEAR(an::variance_2d(0.5, 0.5, 1.0), 2.5 / 24.0, 1e-15);
}

TEST(Analytic, Alpha2D) {
  EXPECT_DOUBLE_EQ(*an::alpha_2d(0.5, 0.5, 0.2, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(*an::alpha_2d(0.05, 0.5, 0.2, 0.0), 4.0);
  EXPECT_NEAR(*an::alpha_2d(0.2 - 1e-12, 0.5, 0.2, 0.0), 1.0, 1e-9);
  EXPECT_NEAR(*an::alpha_2d(0.2 + 1e-12, 0.5, 0.2, 0.0), 1.0, 1e-9);
  EXPECT_FALSE(an::alpha_2d(1.4, 0.05, 0.5, 0.5));
  EXPECT_FALSE(an::alpha_2d(0.0, 0.5, 0.2, 0.2));
}

TEST(AnalyticProperty, FlatteningIdentity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> shear(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double c = 1.7;
  int checked = 0;
  for (int k = 0; k < 20000; ++k) {
    const double sx = shear(rng);
    const double sy = shear(rng);
    const double px = unit(rng) * (1.0 + std::abs(sx));
    const double py = unit(rng) * (1.0 + std::abs(sy));
    if (const auto alpha = an::alpha_1d(px, sx)) {
      ASSERT_NEAR(*alpha * an::height_1d(px, sx, c), c, 1e-12 * c);
    }
    if (const auto alpha = an::alpha_2d(px, py, sx, sy)) {
      ASSERT_NEAR(*alpha * an::height_2d(px, py, sx, sy, c).value, c, 1e-12 * c);
      ++checked;
    }
  }
  EXPECT_GT(checked, 10000);
}

TEST(AnalyticProperty, Evenness) {
  for (double s = 0.0; s <= 3.0; s += 0.1) {
    EXPECT_EQ(an::variance_1d(s, 1.2), an::variance_1d(-s, 1.2));
    EXPECT_EQ(an::mean_1d(s, 1.2), an::mean_1d(-s, 1.2));
    for (double t = 0.0; t <= 3.0; t += 0.3) {
      const double v = an::variance_2d(s, t, 1.2);
      EXPECT_EQ(v, an::variance_2d(-s, t, 1.2));
      EXPECT_EQ(v, an::variance_2d(s, -t, 1.2));
      EXPECT_EQ(v, an::variance_2d(-s, -t, 1.2));
      EXPECT_EQ(v, an::variance_2d(t, s, 1.2));
      EXPECT_EQ(an::mean_2d(s, t, 1.2), an::mean_2d(-t, -s, 1.2));
    }
  }
}

TEST(AnalyticProperty, HeightReflectsWithShearSign) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shear(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double a = shear(rng);
    const double b = shear(rng);
    const double px = unit(rng) * (1.0 + a);
    const double py = unit(rng) * (1.0 + b);
    const double h = an::height_2d(px, py, a, b, 1.0).value;
    EXPECT_NEAR(an::height_2d(1.0 + a - px, py, -a, b, 1.0).value, h, 1e-14);
    EXPECT_NEAR(an::height_2d(px, 1.0 + b - py, a, -b, 1.0).value, h, 1e-14);
    EXPECT_NEAR(an::height_2d(py, px, b, a, 1.0).value, h, 1e-14);
  }
}

TEST(AnalyticProperty, ContinuityAtBoundaries) {
  constexpr double eps = 1e-12;
  for (double s : {0.2, 0.5, 0.9, 1.0, 1.5, 2.0, 4.0}) {
    for (double p : {std::min(s, 1.0), std::max(s, 1.0)}) {
      EXPECT_NEAR(an::height_1d(p - eps, s, 1.0), an::height_1d(p + eps, s, 1.0), 1e-9);
      EXPECT_NEAR(*an::alpha_1d(p - eps, s), *an::alpha_1d(p + eps, s), 1e-9);
    }
  }
  for (double a : {0.2, 0.5, 1.0, 1.5}) {
    for (double b : {0.3, 0.8, 1.2}) {
      for (int k = 1; k < 20; ++k) {
        const double q = k / 20.0;
        // Lines where one end of the x or y exposure interval changes role.
        const std::vector<std::pair<double, double>> points{
            {a, q * (1.0 + b)},      {1.0, q * (1.0 + b)},   {q * (1.0 + a), b},
            {q * (1.0 + a), 1.0},    {q * a, q * b},         {1.0 + q * a, 1.0 + q * b},
            {q * a, 1.0 + q * b},    {1.0 + q * a, q * b}};
        for (const auto& [px, py] : points) {
          for (double dx : {-eps, 0.0, eps}) {
            for (double dy : {-eps, 0.0, eps}) {
              const double x = std::clamp(px + dx, 0.0, 1.0 + a);
              const double y = std::clamp(py + dy, 0.0, 1.0 + b);
              ASSERT_NEAR(an::height_2d(x, y, a, b, 1.0).value,
                          an::height_2d(px, py, a, b, 1.0).value, 1e-9);
            }
          }
        }
      }
    }
  }
}

TEST(AnalyticOracle, Variance1DMatchesQuadrature) {
  for (int k = 1; k <= 20; ++k) {
    const double s = 0.1 * k;
    const auto q = quadrature_1d(s, 1.4);
    EXPECT_NEAR(an::variance_1d(s, 1.4), q.variance, 1e-6 * q.variance) << s;
    EXPECT_NEAR(an::mean_1d(s, 1.4), q.mean, 1e-9) << s;
  }
}

TEST(AnalyticOracle, Variance2DMatchesQuadrature) {
  const std::vector<std::pair<double, double>> shears{
      {0.1, 0.1}, {0.25, 0.5}, {0.5, 0.5}, {0.75, 0.3}, {1.0, 1.0}, {0.6, 0.0},
      {1.5, 0.4}, {0.3, 1.8}, {1.5, 1.5}, {2.0, 1.2}, {-0.7, 0.4}, {-1.3, -0.9}};
  for (const auto& [sx, sy] : shears) {
    const auto q = quadrature_2d(sx, sy, 1.0);
    EXPECT_NEAR(an::variance_2d(sx, sy, 1.0), q.variance, 1e-6 * q.variance) << sx << "," << sy;
    EXPECT_NEAR(an::mean_2d(sx, sy, 1.0), q.mean, 1e-8) << sx << "," << sy;
  }
}

TEST(AnalyticOracle, Variance2DReducesTo1D) {
  for (int k = 1; k <= 10; ++k) {
    const double s = 0.1 * k;
    EXPECT_NEAR(an::variance_2d(s, 0.0, 2.0), an::variance_1d(s, 2.0), 1e-12);
  }
}

}  // namespace
