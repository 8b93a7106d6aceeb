#include <benchmark/benchmark.h>

#include "redge/trainer.hpp"

namespace {

redge::SystemParams desk_system() {
  redge::SystemParams p;
  p.devices = 4;
  p.antennas = 6;
  return p;
}

redge::AllocatorModel desk_model(const redge::SystemParams& p) {
  redge::Rng rng(1);
  auto m = redge::AllocatorModel::initialize(p.devices, p.antennas,
                                             {4, 128, redge::InputMode::kEffectiveChannels}, rng);
  redge::fit_input_normalization(m, p, 1, 200);
  return m;
}

void BM_Rzf(benchmark::State& state) {
  redge::SystemParams p;
  p.devices = static_cast<int>(state.range(0));
  redge::Rng rng(1);
  const auto pair = redge::sample_channel_pair(p.antennas, p.devices, 0.05, rng);
  for (auto _ : state) benchmark::DoNotOptimize(redge::rzf_beamformers(pair.h_est, 0.2));
}
BENCHMARK(BM_Rzf)->Arg(2)->Arg(6);

void BM_WorstCaseDelays(benchmark::State& state) {
  const auto p = desk_system();
  redge::Rng rng(2);
  const auto real = redge::sample_realization(p, rng);
  const auto batch = redge::sample_uncertainty_batch(static_cast<int>(state.range(0)), 4, 6,
                                                     0.05, 6400.0, redge::Scheme::kJoint, rng);
  const auto alloc = redge::map_to_allocation(redge::Vector::Zero(9), p.p_max_mw, p.cpu);
  for (auto _ : state) benchmark::DoNotOptimize(redge::worst_case_delays(alloc, real, batch, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_WorstCaseDelays)->Arg(200)->Arg(1000);

void BM_ForwardBackwardBatch(benchmark::State& state) {
  const auto p = desk_system();
  const auto m = desk_model(p);
  const redge::Matrix x = redge::Matrix::Random(m.input_dim(), state.range(0));
  const redge::Matrix up = redge::Matrix::Random(m.output_dim(), state.range(0));
  redge::ForwardCache cache;
  for (auto _ : state) {
    redge::forward_batch(m, x, &cache);
    benchmark::DoNotOptimize(redge::backward_batch(m, cache, up));
  }
}
BENCHMARK(BM_ForwardBackwardBatch)->Arg(1)->Arg(100);

void BM_TrainStep(benchmark::State& state) {
  const auto p = desk_system();
  redge::TrainingConfig c;
  c.samples = 200;
  c.adam.learning_rate = 1e-3;
  redge::Trainer trainer(c, p, desk_model(p));
  redge::Rng rng(3);
  std::vector<redge::NetworkRealization> reals;
  std::vector<redge::UncertaintyBatch> batches;
  for (int i = 0; i < 100; ++i) {
    reals.push_back(redge::sample_realization(p, rng));
    batches.push_back(redge::sample_uncertainty_batch(200, 4, 6, 0.05, 6400.0,
                                                      redge::Scheme::kJoint, rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step(reals, batches));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
