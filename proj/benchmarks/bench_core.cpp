#include <vector>

#include <benchmark/benchmark.h>

#include "stefan/cascade.hpp"
#include "stefan/particle.hpp"
#include "stefan/picard.hpp"
#include "stefan/rng.hpp"

using namespace stefan;

namespace {

const PhysicalParams kParams{0.5, 1.0, 0.5, 0.0};

SupercoolingProfile foot() { return SupercoolingProfile(0.0, {{0.5, 0.25}, {1.0, 1.0}}); }

}  // namespace

static void BM_PhiloxNormal(benchmark::State& state) {
  std::uint64_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rng::normal(7, rng::Stream::idiosyncratic, 0, k++));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

static void BM_Scan(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double a = 1.0 / static_cast<double>(n);
  // every particle lies below its barrier: the cascade absorbs all of them
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 0.5 * a * static_cast<double>(i);
  for (auto _ : state) benchmark::DoNotOptimize(scan_absorbed(x, 0.0, a));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Scan)->Range(1 << 10, 1 << 20);

static void BM_ParticleStep(benchmark::State& state) {
  SimConfig cfg;
  cfg.n_particles = static_cast<std::size_t>(state.range(0));
  cfg.t_end = 1000.0;
  Simulation sim(foot(), kParams, cfg);
  std::size_t k = 0;
  for (auto _ : state) sim.run_until(++k);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ParticleStep)->Arg(10'000)->Arg(100'000);

static void BM_GammaMap(benchmark::State& state) {
  const auto u = SupercoolingProfile::constant(0.0, 1.0, 0.25);
  const auto rp = reduce(kParams, u.total_mass());
  const auto W = NoisePath::generate(1, TimeGrid::make(1e-3, 1.0));
  PicardConfig pc;
  pc.m_samples = static_cast<std::size_t>(state.range(0));
  const auto s = FrontPath::constant(W.grid(), 0.0, W.seed());
  for (auto _ : state) benchmark::DoNotOptimize(gamma_map(s, u, rp, W, pc));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GammaMap)->Arg(1'000)->Arg(10'000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
