// Serial vs OpenMP kernels, and simulated vs thread-backed engine runs.

#include <benchmark/benchmark.h>

#include "gsgd/data.hpp"
#include "gsgd/engine.hpp"
#include "gsgd/kernels.hpp"
#include "gsgd/model.hpp"
#include "gsgd/rng.hpp"

namespace {

using namespace gsgd;

std::vector<Example> examples(std::size_t n, std::size_t classes, std::size_t features) {
  Rng rng({99, n});
  std::vector<Example> out(n);
  for (auto& e : out) {
    e.features.resize(features);
    for (double& x : e.features) x = rng.uniform(-2.0, 2.0);
    e.label = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(classes) - 1));
  }
  return out;
}

void BM_GradientSerial(benchmark::State& state) {
  const auto xs = examples(static_cast<std::size_t>(state.range(0)), 3, 32);
  const auto w = model::init_weights(3, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::gradient_sum(w, xs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_GradientParallel(benchmark::State& state) {
  const auto xs = examples(static_cast<std::size_t>(state.range(0)), 3, 32);
  const auto w = model::init_weights(3, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::gradient_sum(w, xs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LossSerial(benchmark::State& state) {
  const auto xs = examples(static_cast<std::size_t>(state.range(0)), 3, 32);
  const auto w = model::init_weights(3, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::loss_sum(w, xs));
}

void BM_LossParallel(benchmark::State& state) {
  const auto xs = examples(static_cast<std::size_t>(state.range(0)), 3, 32);
  const auto w = model::init_weights(3, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::parallel::loss_sum(w, xs));
}

void BM_Engine(benchmark::State& state, engine::Mode mode, engine::SchedulerKind kind) {
  Dataset ds;
  ds.examples = examples(600, 2, 8);
  ds.num_features = 8;
  ds.num_classes = 2;
  const auto splits = data::split(ds, {0.2, 0.2, 1, false});
  const auto problem = engine::make_problem(ds, splits);
  engine::EngineConfig cfg;
  cfg.mode = mode;
  cfg.scheduler = kind;
  cfg.workers = 4;
  cfg.epochs = 5;
  cfg.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(engine::run(cfg, problem).test_accuracy);
}

}  // namespace

BENCHMARK(BM_GradientSerial)->Arg(1000)->Arg(100000);
BENCHMARK(BM_GradientParallel)->Arg(1000)->Arg(100000);
BENCHMARK(BM_LossSerial)->Arg(1000)->Arg(100000);
BENCHMARK(BM_LossParallel)->Arg(1000)->Arg(100000);
BENCHMARK_CAPTURE(BM_Engine, sync_simulated, engine::Mode::sync, engine::SchedulerKind::simulated);
BENCHMARK_CAPTURE(BM_Engine, sync_concurrent, engine::Mode::sync, engine::SchedulerKind::concurrent);
BENCHMARK_CAPTURE(BM_Engine, async_simulated, engine::Mode::async, engine::SchedulerKind::simulated);
BENCHMARK_CAPTURE(BM_Engine, async_concurrent, engine::Mode::async, engine::SchedulerKind::concurrent);

BENCHMARK_MAIN();
