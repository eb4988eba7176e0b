// State-space exploration: serial BFS and DFS against the level-synchronous
// OpenMP BFS, plus threaded lock throughput.

#include <benchmark/benchmark.h>

#include "asymlock/bench_cli.hpp"

using namespace asymlock;

namespace {

CheckConfig config(int local, int remote, int budget, Backend b) {
  CheckConfig c;
  c.n_local = local;
  c.n_remote = remote;
  c.k_init_budget = budget;
  c.backend = b;
  return c;
}

void explore(benchmark::State& state, SearchOrder order) {
  const CheckConfig cfg =
      config(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
             static_cast<int>(state.range(2)),
             state.range(3) ? Backend::hazard : Backend::seq_cst);
  Checker checker(cfg);
  std::size_t states = 0;
  for (auto _ : state) {
    ExploreStats s = checker.explore(order);
    states = s.states;
    benchmark::DoNotOptimize(states);
  }
  state.counters["states"] = static_cast<double>(states);
  state.counters["states_per_s"] = benchmark::Counter(
      static_cast<double>(states), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_ExploreBfs(benchmark::State& s) { explore(s, SearchOrder::bfs); }
void BM_ExploreDfs(benchmark::State& s) { explore(s, SearchOrder::dfs); }
void BM_ExploreParallelBfs(benchmark::State& s) {
  explore(s, SearchOrder::parallel_bfs);
}

// local, remote, budget, hazard
#define EXPLORE_ARGS                                              \
  ArgNames({"local", "remote", "budget", "hazard"})               \
      ->Args({1, 1, 1, 0})->Args({2, 1, 1, 1})->Args({1, 2, 2, 1})  \
      ->Args({2, 2, 1, 0})->Unit(benchmark::kMillisecond)

BENCHMARK(BM_ExploreBfs)->EXPLORE_ARGS;
BENCHMARK(BM_ExploreDfs)->EXPLORE_ARGS;
BENCHMARK(BM_ExploreParallelBfs)->EXPLORE_ARGS;

void BM_Stress(benchmark::State& state) {
  RunSpec spec;
  spec.mode = Mode::stress;
  spec.lock = static_cast<LockKind>(state.range(0));
  spec.n_local = static_cast<int>(state.range(1));
  spec.n_remote = static_cast<int>(state.range(2));
  spec.acquisitions = 20'000;
  std::uint64_t done = 0;
  for (auto _ : state) {
    RunReport r = stress(spec);
    if (r.violated()) state.SkipWithError("lock violated a property");
    done += r.counter;
  }
  state.counters["acquisitions_per_s"] =
      benchmark::Counter(static_cast<double>(done), benchmark::Counter::kIsRate);
}

BENCHMARK(BM_Stress)
    ->ArgNames({"lock", "local", "remote"})
    ->Args({static_cast<int>(LockKind::alock), 2, 2})
    ->Args({static_cast<int>(LockKind::naive_rcas), 2, 2})
    ->Args({static_cast<int>(LockKind::alock), 4, 0})
    ->Args({static_cast<int>(LockKind::naive_rcas), 4, 0})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
