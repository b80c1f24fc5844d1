#include <event_warp/analytic.hpp>
#include <event_warp/correction.hpp>
#include <event_warp/noise_sim.hpp>
#include <event_warp/objective.hpp>
#include <event_warp/warp.hpp>

#include <benchmark/benchmark.h>

namespace ew = event_warp;

namespace {

const ew::EventStream& noise_stream() {
  static const auto stream = ew::gen_uniform_noise({1e5, 1.0, {240, 180}, 1, true});
  return stream;
}

void BM_WarpAccumulate(benchmark::State& state) {
  const auto& s = noise_stream();
  const auto kernel = state.range(0) == 0 ? ew::Kernel::nearest : ew::Kernel::bilinear;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ew::warp_accumulate(s, {40.0, -25.0}, kernel));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.size()));
}
BENCHMARK(BM_WarpAccumulate)->Arg(0)->Arg(1);

void BM_ObjectiveEvaluate(benchmark::State& state) {
  const auto& s = noise_stream();
  ew::ObjectiveOptions opt;
  opt.corrected = state.range(0) != 0;
  const ew::ContrastObjective obj(s, opt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.evaluate({40.0, -25.0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.size()));
}
BENCHMARK(BM_ObjectiveEvaluate)->Arg(0)->Arg(1);

void BM_ObjectiveEvaluateDense(benchmark::State& state) {
  const auto& s = noise_stream();
  ew::ObjectiveOptions opt;
  opt.corrected = true;
  const ew::ContrastObjective obj(s, opt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.evaluate_dense({40.0, -25.0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.size()));
}
BENCHMARK(BM_ObjectiveEvaluateDense);

void BM_CorrectionField(benchmark::State& state) {
  const ew::SensorGeometry g{240, 180};
  const ew::Velocity theta{40.0, -25.0};
  const auto layout = ew::CanvasLayout::for_motion(g, theta, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ew::build_correction_field(g, theta, 1.0, layout));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(layout.pixel_count()));
}
BENCHMARK(BM_CorrectionField);

void BM_Variance2d(benchmark::State& state) {
  double s = 0.0;
  for (auto _ : state) {
    s += 1e-6;
    benchmark::DoNotOptimize(ew::analytic::variance_2d(s, 0.7 * s, 1.0));
  }
}
BENCHMARK(BM_Variance2d);

void BM_Height2d(benchmark::State& state) {
  double p = 0.0;
  for (auto _ : state) {
    p += 1e-7;
    benchmark::DoNotOptimize(ew::analytic::height_2d(0.3 + p, 0.8, 0.6, 0.4, 1.0));
  }
}
BENCHMARK(BM_Height2d);

}  // namespace

BENCHMARK_MAIN();
