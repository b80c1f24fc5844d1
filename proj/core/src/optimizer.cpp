#include "event_warp/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "event_warp/parallel.hpp"

namespace event_warp {

namespace {

struct Vertex {
  Velocity x;
  double f;
};

Velocity lerp(const Velocity& from, const Velocity& to, double t) {
  return {from.vx + t * (to.vx - from.vx), from.vy + t * (to.vy - from.vy)};
}

double distance(const Velocity& a, const Velocity& b) {
  return std::hypot(a.vx - b.vx, a.vy - b.vy);
}

}  // namespace

OptimizationResult nelder_mead(const std::function<double(const Velocity&)>& objective,
                               const Velocity& theta0, const NelderMeadOptions& options) {
  OptimizationResult result;
  auto eval = [&](const Velocity& x) {
    const double f = objective(x);
    ++result.evaluations;
    if (!std::isfinite(f)) {
      std::ostringstream msg;
      msg << "nelder_mead: objective returned " << f << " at (" << x.vx << ", " << x.vy << ")";
      throw std::runtime_error(msg.str());
    }
    return Vertex{x, f};
  };

  std::array<Vertex, 3> s{eval(theta0),
                          eval({theta0.vx + options.initial_scale, theta0.vy}),
                          eval({theta0.vx, theta0.vy + options.initial_scale})};
  auto order = [&] {
    std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
  };

  order();
  while (true) {
    const double diameter =
        std::max(distance(s[0].x, s[1].x), distance(s[0].x, s[2].x));
    if (diameter < options.tol || s[2].f - s[0].f <= options.value_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) break;
    ++result.iterations;

    const Velocity centroid = lerp(s[0].x, s[1].x, 0.5);
    const Vertex reflected = eval(lerp(centroid, s[2].x, -1.0));
    if (reflected.f < s[0].f) {
      const Vertex expanded = eval(lerp(centroid, s[2].x, -2.0));
      s[2] = expanded.f < reflected.f ? expanded : reflected;
    } else if (reflected.f < s[1].f) {
      s[2] = reflected;
    } else {
      bool shrink = false;
      if (reflected.f < s[2].f) {
        const Vertex outside = eval(lerp(centroid, reflected.x, 0.5));
        if (outside.f <= reflected.f) {
          s[2] = outside;
        } else {
          shrink = true;
        }
      } else {
        const Vertex inside = eval(lerp(centroid, s[2].x, 0.5));
        if (inside.f < s[2].f) {
          s[2] = inside;
        } else {
          shrink = true;
        }
      }
      if (shrink) {
        s[1] = eval(lerp(s[0].x, s[1].x, 0.5));
        s[2] = eval(lerp(s[0].x, s[2].x, 0.5));
      }
    }
    order();
  }

  result.theta_hat = s[0].x;
  result.objective_value = s[0].f;
  return result;
}

OptimizationResult maximize_contrast(const ContrastObjective& objective, const Velocity& theta0,
                                     const NelderMeadOptions& options) {
  auto result = nelder_mead(
      [&](const Velocity& v) { return -objective.evaluate(v).value; }, theta0, options);
  result.objective_value = -result.objective_value;
  return result;
}

VelocityGrid VelocityGrid::make(const VelocityBounds& bounds, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("grid step must be positive");
  }
  if (!(bounds.vx_max >= bounds.vx_min) || !(bounds.vy_max >= bounds.vy_min)) {
    throw std::invalid_argument("velocity bounds must satisfy min <= max");
  }
  VelocityGrid grid;
  grid.bounds = bounds;
  grid.step = step;
  // Tolerate round-off so that e.g. [-30, 30] at step 0.1 keeps its endpoint.
  grid.nx = static_cast<std::size_t>(std::floor((bounds.vx_max - bounds.vx_min) / step + 1e-9)) + 1;
  grid.ny = static_cast<std::size_t>(std::floor((bounds.vy_max - bounds.vy_min) / step + 1e-9)) + 1;
  return grid;
}

Velocity LossLandscape::argmax() const {
  if (values.empty()) throw std::logic_error("argmax of an empty landscape");
  const auto it = std::max_element(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(it - values.begin());
  return grid.at(k % grid.nx, k / grid.nx);
}

LossLandscape landscape(const ContrastObjective& objective, const VelocityBounds& bounds,
                        double resolution) {
  LossLandscape out;
  out.grid = VelocityGrid::make(bounds, resolution);
  out.corrected = objective.options().corrected;
  out.values.assign(out.grid.size(), 0.0);
  parallel_for(out.grid.size(), [&](std::size_t k) {
    out.values[k] = objective.evaluate(out.grid.at(k % out.grid.nx, k / out.grid.nx)).value;
  });
  return out;
}

LossLandscape landscape(const EventStream& stream, const VelocityBounds& bounds,
                        double resolution, const ObjectiveOptions& options) {
  const ContrastObjective objective(stream, options);
  return landscape(objective, bounds, resolution);
}

RocReport evaluate_roc(const ContrastObjective& objective, const Velocity& theta_gt,
                       const VelocityBounds& bounds, double grid_step, double tolerance,
                       const NelderMeadOptions& options) {
  const auto grid = VelocityGrid::make(bounds, grid_step);
  RocReport report;
  report.theta_gt = theta_gt;
  report.tolerance = tolerance;
  report.runs = grid.size();
  report.results.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) {
    report.results[k] = maximize_contrast(objective, grid.at(k % grid.nx, k / grid.nx), options);
  });

  double sq = 0.0;
  for (const auto& r : report.results) {
    const double err = distance(r.theta_hat, theta_gt);
    sq += err * err;
    if (err <= tolerance) ++report.successes;
  }
  if (report.runs > 0) {
    report.roc_percent = 100.0 * static_cast<double>(report.successes) /
                         static_cast<double>(report.runs);
    report.rms = std::sqrt(sq / static_cast<double>(report.runs));
  }
  return report;
}

RocReport evaluate_roc(const EventStream& stream, const Velocity& theta_gt,
                       const VelocityBounds& bounds, double grid_step, double tolerance,
                       const ObjectiveOptions& objective_options,
                       const NelderMeadOptions& options) {
  const ContrastObjective objective(stream, objective_options);
  return evaluate_roc(objective, theta_gt, bounds, grid_step, tolerance, options);
}

}  // namespace event_warp
