#include <benchmark/benchmark.h>

#include "ccirc/scenario.hpp"
#include "ccirc/sweep.hpp"

using namespace ccirc;

namespace {

scenario gate_scenario(const circuit_node& node, int k, uint64_t seed) {
   scenario sc;
   sc.net = {net_mode::partial_synchrony, 1, 0};
   for (int i = 1; i <= k; ++i) {
      chain_config c;
      c.id = "c" + std::to_string(i);
      c.epoch = 2;
      c.tconf = 4;
      sc.chains.push_back(c);
   }
   sc.circuit = node;
   auto [pace, bound] = derive_pace_and_bound(node, 2, 4);
   sc.txs = {{"x1", 0, {}}, {"x2", pace, {}}};
   sc.horizon = bound + 2 * pace + 8;
   sc.seed = seed;
   return sc;
}

}  // namespace

static void BM_run_serial(benchmark::State& state) {
   auto sc = gate_scenario(circuit_node::serial({circuit_node::leaf(1), circuit_node::leaf(2)}),
                           2, 11);
   for (auto _ : state) {
      auto r = run_scenario(sc);
      benchmark::DoNotOptimize(r);
   }
}
BENCHMARK(BM_run_serial);

static void BM_run_lvl(benchmark::State& state) {
   auto sc = gate_scenario(
       circuit_node::lvl({circuit_node::leaf(1), circuit_node::leaf(2), circuit_node::leaf(3)}),
       3, 11);
   for (auto _ : state) {
      auto r = run_scenario(sc);
      benchmark::DoNotOptimize(r);
   }
}
BENCHMARK(BM_run_lvl);

static void BM_run_synthesized_433(benchmark::State& state) {
   auto sc = gate_scenario(synthesize_ksl(4, 3, 3), 4, 11);
   for (auto _ : state) {
      auto r = run_scenario(sc);
      benchmark::DoNotOptimize(r);
   }
}
BENCHMARK(BM_run_synthesized_433);

BENCHMARK_MAIN();
