#include <benchmark/benchmark.h>

#include "quire/peps.hpp"
#include "quire/protocols.hpp"
#include "quire/syncwalk.hpp"

using namespace quire;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

static void BM_Expand(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Mps chain = make_chain(aklt_site(), n, protocol_left_boundary(), protocol_right_boundary());
  for (auto _ : state) {
    StateVector v = expand(chain);
    benchmark::DoNotOptimize(v.amps.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Expand)->DenseRange(4, 12, 2);

static void BM_AlternatingReduce(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Mps chain = make_chain(aklt_site(), n, protocol_left_boundary(), protocol_right_boundary());
  uint64_t seed = 0;
  for (auto _ : state) {
    ReductionTrace tr = alternating_reduce(chain, ++seed);
    benchmark::DoNotOptimize(tr.fidelity_oracle);
  }
}
BENCHMARK(BM_AlternatingReduce)->Arg(8)->Arg(10)->Arg(12);

static void BM_CostTrial(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    CostReport rep = cost_stats("aklt-alternating", {}, {n}, 100, 1);
    benchmark::DoNotOptimize(rep.rows[0].mean_cost);
  }
}
BENCHMARK(BM_CostTrial)->Arg(12)->Arg(20);

static void BM_Tricluster(benchmark::State& state) {
  Lattice l = Lattice::grid(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    StateVector v = build_tricluster(l);
    benchmark::DoNotOptimize(v.amps.data());
  }
}
BENCHMARK(BM_Tricluster)->Arg(2)->Arg(3);

static void BM_GroupClosure(benchmark::State& state) {
  for (auto _ : state) {
    ProjGroup g = close_group({pauli('H'), pauli('Z')});
    benchmark::DoNotOptimize(g.table.data());
  }
}
BENCHMARK(BM_GroupClosure);

static void BM_SyncExact(benchmark::State& state) {
  for (auto _ : state) {
    double p = sync_exact_hit_probability(4, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_SyncExact)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
