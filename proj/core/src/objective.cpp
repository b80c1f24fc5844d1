#include "event_warp/objective.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <stdexcept>
#include <utility>

namespace event_warp {

namespace {

constexpr double time_slices = 256.0;

// Live cells are kept in a ring indexed by canvas coordinates modulo powers of
// two; larger rings fall back to sorting pixel keys.
constexpr std::size_t max_ring_cells = std::size_t{1} << 24;
constexpr std::uint32_t no_owner = std::numeric_limits<std::uint32_t>::max();

template <typename T>
struct Slot {
  std::uint32_t owner = no_owner;  // canvas index of the cell held here
  T value{};
};

struct Scratch {
  std::vector<Slot<std::uint32_t>> counts;
  std::vector<Slot<double>> weights;
  std::vector<std::pair<std::size_t, double>> keyed;
  std::vector<double> bounds;
};

// Smallest power of two covering `needed`, or the canvas extent rounded up
// when that is smaller (the ring is then collision-free).
std::size_t ring_extent(double needed, int canvas) {
  const auto full = std::bit_ceil(static_cast<std::size_t>(canvas));
  if (!(needed < static_cast<double>(full))) return full;
  return std::min(full, std::bit_ceil(static_cast<std::size_t>(std::ceil(needed))));
}

}  // namespace

ContrastValue contrast_variance(std::span<const double> values,
                                std::span<const std::uint8_t> mask) {
  if (values.size() != mask.size()) {
    throw std::invalid_argument("contrast_variance: image and mask sizes differ");
  }
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask[k]) {
      ++n;
      sum += values[k];
    }
  }
  if (n == 0) throw std::invalid_argument("contrast_variance: mask selects no pixels");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (mask[k]) ss += (values[k] - mean) * (values[k] - mean);
  }
  return {ss / static_cast<double>(n), n};
}

ContrastValue contrast_variance(const WarpedImage& image, std::span<const std::uint8_t> mask) {
  return contrast_variance(std::span<const double>(image.values), mask);
}

ContrastValue contrast_variance(const CorrectedImage& image) {
  return contrast_variance(std::span<const double>(image.values),
                           std::span<const std::uint8_t>(image.mask));
}

ContrastObjective::ContrastObjective(const EventStream& stream, ObjectiveOptions options)
    : stream_(&stream), options_(options), extent_(time_extent(stream)) {
  if (options_.corrected && !(options_.eta >= 0.0 && options_.eta < 1.0)) {
    throw std::invalid_argument("eta must lie in [0, 1)");
  }
  if (options_.clamp && !(*options_.clamp >= 1.0)) {
    throw std::invalid_argument("factor clamp must be >= 1");
  }
  // Short time slices ordered by row then column: consecutive events land on
  // nearby canvas cells for any candidate velocity, and the cells touched by
  // one slice stay within a small moving window.
  const auto& events = stream.events();
  const double span = events.empty() ? 1.0 : static_cast<double>(events.back().t - extent_.t_ref);
  auto slice = [&](const Event& e) {
    return static_cast<std::uint64_t>(static_cast<double>(e.t - extent_.t_ref) / span * time_slices);
  };
  std::vector<std::uint32_t> order(events.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t l, std::uint32_t r) {
    const auto& a = events[l];
    const auto& b = events[r];
    return std::tuple(slice(a), a.y, a.x) < std::tuple(slice(b), b.y, b.x);
  });
  slice_seconds_ = microseconds_to_seconds(1) * span / time_slices;
  xs_.reserve(order.size());
  ys_.reserve(order.size());
  dts_.reserve(order.size());
  for (const auto k : order) {
    const auto& e = events[k];
    xs_.push_back(e.x);
    ys_.push_back(e.y);
    dts_.push_back(microseconds_to_seconds(e.t - extent_.t_ref));
  }
}

ContrastValue ContrastObjective::evaluate(const Velocity& theta) const {
  const auto& geometry = stream_->geometry();
  const auto layout = CanvasLayout::for_motion(geometry, theta, extent_.delta);
  const CanvasFrame frame(geometry, theta, extent_.delta, layout);
  const auto correction = options_.correction();
  const std::size_t valid = count_valid_pixels(frame, correction.eta);
  if (valid == 0) return {};

  thread_local Scratch scratch;
  const std::size_t n = xs_.size();
  const std::size_t pixels = layout.pixel_count();
  const auto width = static_cast<std::size_t>(layout.width);
  const double ox = layout.offset_x;
  const double oy = layout.offset_y;
  const double vx = theta.vx;
  const double vy = theta.vy;
  const bool nearest = options_.kernel == Kernel::nearest;
  const bool corrected = options_.corrected;

  // exposure(i, j) = max(0, min(hi_x[i], hi_y[j]) - max(lo_x[i], lo_y[j]))
  auto& bounds = scratch.bounds;
  bounds.resize(2 * (width + static_cast<std::size_t>(layout.height)));
  double* lo_x = bounds.data();
  double* hi_x = lo_x + width;
  double* lo_y = hi_x + width;
  double* hi_y = lo_y + layout.height;
  auto fill = [](double* lo, double* hi, int count, double shear, auto&& position) {
    for (int k = 0; k < count; ++k) {
      const double p = position(k);
      if (shear > 0.0) {
        lo[k] = std::max(0.0, (p - 1.0) / shear);
        hi[k] = std::min(1.0, p / shear);
      } else {
        const bool inside = p >= 0.0 && p <= 1.0;
        lo[k] = inside ? 0.0 : 1.0;
        hi[k] = inside ? 1.0 : 0.0;
      }
    }
  };
  fill(lo_x, hi_x, layout.width, frame.shear_x(), [&](int i) { return frame.px(i); });
  fill(lo_y, hi_y, layout.height, frame.shear_y(), [&](int j) { return frame.py(j); });

  // Deviations are accumulated about a shift close to the expected mean
  // pixel value, which keeps dense images free of cancellation.
  const double shift =
      static_cast<double>(n) /
      static_cast<double>(corrected ? geometry.pixel_count() : valid);

  double sum = 0.0;  // sum of pixel values
  double dev = 0.0;  // sum of (v - shift)^2 - shift^2 over occupied pixels
  const double ceiling = correction.clamp.value_or(std::numeric_limits<double>::infinity());
  const double eta = correction.eta;
  auto factor = [&](std::size_t i, std::size_t j) {
    const double e = std::min(hi_x[i], hi_y[j]) - std::max(lo_x[i], lo_y[j]);
    const double f = corrected ? std::min(1.0 / e, ceiling) : 1.0;
    return e > 0.0 && e >= eta ? f : 0.0;
  };
  // Pixel mass grows from m to m + w with factor f.
  auto grow = [&](double f, double m, double w) {
    sum += f * w;
    dev += f * w * (f * (2.0 * m + w) - 2.0 * shift);
  };

  // Within one time slice the sensor footprint on the canvas moves by at most
  // |v| * slice; a cell and another sharing its ring slot are never live in
  // the same slice, so evicting the older one loses nothing.
  const double reach_x = static_cast<double>(geometry.width) + 3.0 + 2.0 * std::abs(vx) * slice_seconds_;
  const double reach_y = static_cast<double>(geometry.height) + 3.0 + 2.0 * std::abs(vy) * slice_seconds_;
  const std::size_t ring_w = ring_extent(reach_x, layout.width);
  const std::size_t ring_h = ring_extent(reach_y, layout.height);
  const std::size_t mask_x = ring_w - 1;
  const std::size_t mask_y = ring_h - 1;
  const std::size_t row_shift = static_cast<std::size_t>(std::countr_zero(ring_w));

  if (ring_w * ring_h <= max_ring_cells && pixels < no_owner) {
    auto slot_of = [&](std::size_t i, std::size_t j) { return ((j & mask_y) << row_shift) | (i & mask_x); };
    if (nearest) {
      auto& ring = scratch.counts;
      ring.assign(ring_w * ring_h, {});
      for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<std::size_t>(
            detail::nearest_index((xs_[k] - vx * dts_[k]) + ox, layout.width));
        const auto j = static_cast<std::size_t>(
            detail::nearest_index((ys_[k] - vy * dts_[k]) + oy, layout.height));
        const auto owner = static_cast<std::uint32_t>(j * width + i);
        auto& slot = ring[slot_of(i, j)];
        const std::uint32_t m = slot.owner == owner ? slot.value : 0;
        slot = {owner, m + 1};
        // Masked pixels have f = 0 and never contribute.
        grow(factor(i, j), static_cast<double>(m), 1.0);
      }
    } else {
      auto& ring = scratch.weights;
      ring.assign(ring_w * ring_h, {});
      auto add = [&](std::size_t i, std::size_t j, double w) {
        if (w <= 0.0) return;
        const auto owner = static_cast<std::uint32_t>(j * width + i);
        auto& slot = ring[slot_of(i, j)];
        const double m = slot.owner == owner ? slot.value : 0.0;
        slot = {owner, m + w};
        grow(factor(i, j), m, w);
      };
      for (std::size_t k = 0; k < n; ++k) {
        const auto tx = detail::bilinear_taps((xs_[k] - vx * dts_[k]) + ox, layout.width);
        const auto ty = detail::bilinear_taps((ys_[k] - vy * dts_[k]) + oy, layout.height);
        const auto x0 = static_cast<std::size_t>(tx.lo);
        const auto x1 = static_cast<std::size_t>(tx.hi);
        const auto y0 = static_cast<std::size_t>(ty.lo);
        const auto y1 = static_cast<std::size_t>(ty.hi);
        add(x0, y0, (1.0 - tx.w_hi) * (1.0 - ty.w_hi));
        add(x1, y0, tx.w_hi * (1.0 - ty.w_hi));
        add(x0, y1, (1.0 - tx.w_hi) * ty.w_hi);
        add(x1, y1, tx.w_hi * ty.w_hi);
      }
    }
  } else {
    auto& keyed = scratch.keyed;
    keyed.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const double cx = (xs_[k] - vx * dts_[k]) + ox;
      const double cy = (ys_[k] - vy * dts_[k]) + oy;
      if (nearest) {
        keyed.emplace_back(
            static_cast<std::size_t>(detail::nearest_index(cy, layout.height)) * width +
                static_cast<std::size_t>(detail::nearest_index(cx, layout.width)),
            1.0);
      } else {
        const auto tx = detail::bilinear_taps(cx, layout.width);
        const auto ty = detail::bilinear_taps(cy, layout.height);
        const auto r0 = static_cast<std::size_t>(ty.lo) * width;
        const auto r1 = static_cast<std::size_t>(ty.hi) * width;
        keyed.emplace_back(r0 + static_cast<std::size_t>(tx.lo), (1.0 - tx.w_hi) * (1.0 - ty.w_hi));
        keyed.emplace_back(r0 + static_cast<std::size_t>(tx.hi), tx.w_hi * (1.0 - ty.w_hi));
        keyed.emplace_back(r1 + static_cast<std::size_t>(tx.lo), (1.0 - tx.w_hi) * ty.w_hi);
        keyed.emplace_back(r1 + static_cast<std::size_t>(tx.hi), tx.w_hi * ty.w_hi);
      }
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& l, const auto& r) { return l.first < r.first; });
    for (std::size_t k = 0; k < keyed.size();) {
      const std::size_t idx = keyed[k].first;
      double mass = 0.0;
      for (; k < keyed.size() && keyed[k].first == idx; ++k) mass += keyed[k].second;
      const double f = mass > 0.0 ? factor(idx % width, idx / width) : 0.0;
      if (f != 0.0) grow(f, 0.0, mass);
    }
  }

  const double count = static_cast<double>(valid);
  const double offset = sum / count - shift;
  const double variance = (dev / count + shift * shift) - offset * offset;
  return {std::max(0.0, variance), valid};
}

ContrastValue ContrastObjective::evaluate_dense(const Velocity& theta) const {
  const auto image = warp_accumulate(*stream_, theta, options_.kernel);
  const auto field = build_correction_field(image.geometry, theta, image.delta, image.layout,
                                            options_.correction());
  if (field.valid_count() == 0) return {};
  if (options_.corrected) return contrast_variance(apply_correction(image, field));
  return contrast_variance(image, field.mask);
}

}  // namespace event_warp
