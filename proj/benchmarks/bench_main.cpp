#include <numbers>

#include <benchmark/benchmark.h>

#include "dipres/classical_bounds.hpp"
#include "dipres/quantum_bounds.hpp"

using namespace dipres;

namespace {

OpticalConfig config_for(int fft_side) {
  OpticalConfig cfg = OpticalConfig::desk();
  cfg.image_fft_side = fft_side;
  cfg.image_pixel_object_nm = 5.0 * 4096.0 / fft_side;
  return cfg;
}

void BM_TubeLensTransformPair(benchmark::State& state) {
  const auto cfg = config_for(static_cast<int>(state.range(0)));
  TubeLens lens(cfg);
  const auto f = bfp_field_with_derivative(lens.pupil_grid(), cfg, {1.0, 0.3}, Source::plus, 10.0);
  for (auto _ : state) {
    lens.transform_pair(f.field.ex, f.derivative.ex);
    benchmark::DoNotOptimize(lens.image().data());
  }
}
BENCHMARK(BM_TubeLensTransformPair)->Arg(1024)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_ModalStates(benchmark::State& state) {
  OpticalConfig cfg = OpticalConfig::desk();
  cfg.pupil_grid_side = static_cast<int>(state.range(0));
  const ZernikeBasis basis(PupilGrid::from_config(cfg), cfg.zernike_order);
  for (auto _ : state) benchmark::DoNotOptimize(modal_states(basis, cfg, {1.0, 0.3}, 10.0));
}
BENCHMARK(BM_ModalStates)->Arg(257)->Arg(513)->Arg(1025)->Unit(benchmark::kMillisecond);

void BM_DenseQfi(benchmark::State& state) {
  const OpticalConfig cfg = OpticalConfig::desk();
  const ZernikeBasis basis(PupilGrid::from_config(cfg), cfg.zernike_order);
  const auto dm = assemble_density(modal_states(basis, cfg, {1.0, 0.3}, 10.0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_sld_qfi(dm).qfi);
}
BENCHMARK(BM_DenseQfi)->Unit(benchmark::kMillisecond);

void BM_LowRankQfi(benchmark::State& state) {
  const OpticalConfig cfg = OpticalConfig::desk();
  const ZernikeBasis basis(PupilGrid::from_config(cfg), cfg.zernike_order);
  const WeightedPair term{1.0, modal_states(basis, cfg, {1.0, 0.3}, 10.0)};
  for (auto _ : state) benchmark::DoNotOptimize(low_rank_qfi(std::span(&term, 1)));
}
BENCHMARK(BM_LowRankQfi)->Unit(benchmark::kMicrosecond);

void BM_ModalityFisher(benchmark::State& state) {
  ImagingModel model(config_for(static_cast<int>(state.range(0))));
  const DipoleOrientation o{std::numbers::pi / 3, std::numbers::pi / 3};
  for (auto _ : state) benchmark::DoNotOptimize(modality_fisher(model, o, 10.0, Modality::rphi_iii).total);
}
BENCHMARK(BM_ModalityFisher)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
