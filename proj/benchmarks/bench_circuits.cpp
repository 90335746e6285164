#include <benchmark/benchmark.h>

#include "ccirc/circuits.hpp"

using namespace ccirc;

static void BM_predicted_properties(benchmark::State& state) {
   int k = static_cast<int>(state.range(0));
   auto tree = synthesize_ksl(k, 2 * (k - (k / 2 + 1)) + 1, k / 2 + 1);
   for (auto _ : state) {
      auto c = predicted_properties(tree, net_mode::partial_synchrony, k);
      benchmark::DoNotOptimize(c);
   }
}
BENCHMARK(BM_predicted_properties)->Arg(3)->Arg(4)->Arg(5);

static void BM_synthesize_ksl(benchmark::State& state) {
   int k = static_cast<int>(state.range(0));
   for (auto _ : state) {
      auto tree = synthesize_ksl(k, 1, k);
      benchmark::DoNotOptimize(tree);
   }
}
BENCHMARK(BM_synthesize_ksl)->Arg(4)->Arg(6);

static void BM_achievable_grid(benchmark::State& state) {
   for (auto _ : state) {
      int count = 0;
      for (int k = 1; k <= 10; ++k)
         for (int s = 0; s <= k; ++s)
            for (int l = 0; l <= k; ++l) count += achievable_ksl(k, s, l);
      benchmark::DoNotOptimize(count);
   }
}
BENCHMARK(BM_achievable_grid);

BENCHMARK_MAIN();
