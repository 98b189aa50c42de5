#include <benchmark/benchmark.h>

#include "qmeta/agent.hpp"
#include "qmeta/measure.hpp"
#include "qmeta/qsim.hpp"
#include "qmeta/qst.hpp"

using namespace qmeta;

static void BM_ApplyHea(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HeaSpec spec = HeaSpec::for_qubits(n, static_cast<int>(state.range(1)));
  Rng rng(1);
  const ParamVector theta = random_params(spec, rng);
  const StateVector psi = haar_random_state(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(apply_hea(spec, theta, psi));
}
BENCHMARK(BM_ApplyHea)->Args({1, 0})->Args({2, 1})->Args({3, 5})->Args({5, 10});

static void BM_SuccessCount(benchmark::State& state) {
  Rng rng(2);
  const double p = 0.999;
  for (auto _ : state) benchmark::DoNotOptimize(sample_success_count(p, 10000, rng));
}
BENCHMARK(BM_SuccessCount);

static void BM_SuccessCountShotByShot(benchmark::State& state) {
  Rng rng(2);
  const double p = 0.999;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_success_count(p, 10000, rng, SamplingMode::shot_by_shot));
  }
}
BENCHMARK(BM_SuccessCountShotByShot);

static void BM_CircuitMeasure(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HeaSpec spec = HeaSpec::for_qubits(n, static_cast<int>(state.range(1)));
  Rng rng(3);
  CircuitEnvironment env(haar_random_state(n, rng), spec, 0, 10000);
  const ParamVector theta = random_params(spec, rng);
  for (auto _ : state) benchmark::DoNotOptimize(env.measure(theta, rng));
}
BENCHMARK(BM_CircuitMeasure)->Args({1, 0})->Args({5, 10});

static void BM_PolicyForward(benchmark::State& state) {
  Rng rng(4);
  Agent agent(AgentConfig{}, rng);
  double obs = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent.policy(obs));
    obs = obs < 0.9 ? obs + 0.01 : 0.1;
  }
}
BENCHMARK(BM_PolicyForward);

static void BM_PolicyTable(benchmark::State& state) {
  Rng rng(5);
  Agent agent(AgentConfig{}, rng);
  const auto c_target = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(PolicyTable(agent, c_target));
}
BENCHMARK(BM_PolicyTable)->Arg(100)->Arg(10000);

static void BM_RrhoR(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PauliSettings s = build_settings(n);
  Rng rng(6);
  const DensityMatrix truth = DensityMatrix::from_pure(haar_random_state(n, rng));
  const FrequencyTable f = simulate_frequencies(truth, s, 1000, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rrhor_estimate(f, s, DensityMatrix::maximally_mixed(n)));
  }
}
BENCHMARK(BM_RrhoR)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
