#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fleetfl/allocation.hpp"
#include "fleetfl/beamform.hpp"
#include "fleetfl/fl.hpp"

namespace {

using namespace fleetfl;

allocation::GainMatrix random_gains(std::size_t prbs, std::size_t agents, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1e6);
  allocation::GainMatrix m;
  for (std::size_t v = 0; v < agents; ++v) m.agents.push_back(v);
  m.entries.assign(prbs, std::vector<double>(agents));
  for (auto& row : m.entries) {
    for (double& x : row) x = u(rng);
  }
  return m;
}

void BM_HungarianMax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_gains(n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(allocation::hungarian_max(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HungarianMax)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_MulticastSdp(benchmark::State& state) {
  const int antennas = 4;
  const auto users = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<beamform::CVector> hs;
  for (int v = 0; v < users; ++v) {
    beamform::CVector h(antennas);
    for (int i = 0; i < antennas; ++i) h(i) = {d(rng), d(rng)};
    hs.push_back(h);
  }
  const auto prob = beamform::MulticastProblem::from_channels(hs);
  int iterations = 0;
  for (auto _ : state) {
    const auto r = beamform::solve_multicast_sdp(prob);
    iterations = r.iterations;
    benchmark::DoNotOptimize(r.value);
  }
  state.counters["solver_iters"] = iterations;
}
BENCHMARK(BM_MulticastSdp)->DenseRange(2, 8, 2);

void BM_GruGradient(benchmark::State& state) {
  const fl::Shape shape{};
  const auto model = fl::init_model(shape, 3);
  const auto anchor = fl::init_model(shape, 4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<trace::Sample> batch(static_cast<std::size_t>(state.range(0)));
  for (auto& s : batch) {
    s.x.resize(15);
    for (double& x : s.x) x = d(rng);
    s.y = d(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fl::gradient(model, batch, anchor, 0.1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GruGradient)->Arg(1)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
