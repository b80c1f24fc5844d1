#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "event_warp/events.hpp"
#include "event_warp/objective.hpp"
#include "event_warp/warp.hpp"

namespace event_warp {

struct NelderMeadOptions {
  double initial_scale = 1.0;  // px/s, edge of the initial simplex
  double tol = 1e-3;           // px/s, simplex diameter
  double value_tol = 1e-9;     // spread of vertex values
  int max_iterations = 500;
};

struct OptimizationResult {
  Velocity theta_hat;
  double objective_value = 0.0;  // value of the minimized function at theta_hat
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes `objective` with the Nelder-Mead simplex (reflection 1,
/// expansion 2, contraction 0.5, shrink 0.5). Throws std::runtime_error if the
/// objective returns a non-finite value.
[[nodiscard]] OptimizationResult nelder_mead(const std::function<double(const Velocity&)>& objective,
                                             const Velocity& theta0,
                                             const NelderMeadOptions& options = {});

/// Maximizes the contrast of `objective` by minimizing its negation.
/// objective_value in the result is the (positive) contrast.
[[nodiscard]] OptimizationResult maximize_contrast(const ContrastObjective& objective,
                                                   const Velocity& theta0,
                                                   const NelderMeadOptions& options = {});

struct VelocityBounds {
  double vx_min = -30.0;
  double vx_max = 30.0;
  double vy_min = -30.0;
  double vy_max = 30.0;
};

/// Regular grid of candidates: vx_min + i * step for i = 0 .. nx - 1, where
/// the last node is the largest one not exceeding vx_max; likewise for vy.
struct VelocityGrid {
  VelocityBounds bounds;
  double step = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;

  [[nodiscard]] static VelocityGrid make(const VelocityBounds& bounds, double step);
  [[nodiscard]] Velocity at(std::size_t ix, std::size_t iy) const noexcept {
    return {bounds.vx_min + static_cast<double>(ix) * step,
            bounds.vy_min + static_cast<double>(iy) * step};
  }
  [[nodiscard]] std::size_t size() const noexcept { return nx * ny; }
};

/// Contrast over a velocity grid; values are row-major with vy along rows.
struct LossLandscape {
  VelocityGrid grid;
  std::vector<double> values;
  bool corrected = false;

  [[nodiscard]] double at(std::size_t ix, std::size_t iy) const { return values[iy * grid.nx + ix]; }
  [[nodiscard]] Velocity argmax() const;
};

[[nodiscard]] LossLandscape landscape(const EventStream& stream, const VelocityBounds& bounds,
                                      double resolution, const ObjectiveOptions& options);
[[nodiscard]] LossLandscape landscape(const ContrastObjective& objective,
                                      const VelocityBounds& bounds, double resolution);

struct RocReport {
  double roc_percent = 0.0;
  double rms = 0.0;  // px/s, RMS of the Euclidean error over all runs
  std::size_t runs = 0;
  std::size_t successes = 0;
  double tolerance = 1.0;
  Velocity theta_gt;
  std::vector<OptimizationResult> results;  // one per start, grid order
};

/// Runs the optimizer from every node of the start grid. A run succeeds when
/// its estimate lies within `tolerance` (Euclidean, px/s) of theta_gt.
[[nodiscard]] RocReport evaluate_roc(const ContrastObjective& objective, const Velocity& theta_gt,
                                     const VelocityBounds& bounds, double grid_step,
                                     double tolerance, const NelderMeadOptions& options = {});
[[nodiscard]] RocReport evaluate_roc(const EventStream& stream, const Velocity& theta_gt,
                                     const VelocityBounds& bounds, double grid_step,
                                     double tolerance, const ObjectiveOptions& objective_options,
                                     const NelderMeadOptions& options = {});

}  // namespace event_warp
