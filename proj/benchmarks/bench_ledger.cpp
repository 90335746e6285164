#include <benchmark/benchmark.h>

#include <random>

#include "ccirc/ledger.hpp"

using namespace ccirc;

namespace {

ledger sized_ledger(const char* prefix, size_t n) {
   ledger l;
   for (size_t i = 0; i < n; ++i)
      l.txs.push_back(transaction{std::string(prefix) + std::to_string(i), nullptr});
   return l;
}

}  // namespace

static void BM_clean(benchmark::State& state) {
   size_t n = static_cast<size_t>(state.range(0));
   ledger a = sized_ledger("t", n);
   ledger b = sized_ledger("t", n);  // full overlap: worst case for dedup
   for (size_t i = 0; i < n / 2; ++i) b.txs.push_back(transaction{"u" + std::to_string(i), nullptr});
   for (auto _ : state) {
      auto out = clean(a, b);
      benchmark::DoNotOptimize(out);
   }
   state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_clean)->Arg(16)->Arg(128)->Arg(1024);

static void BM_interleave(benchmark::State& state) {
   size_t n = static_cast<size_t>(state.range(0));
   ledger a = sized_ledger("a", n), b = sized_ledger("b", n);
   for (auto _ : state) {
      auto out = interleave(a, b);
      benchmark::DoNotOptimize(out);
   }
}
BENCHMARK(BM_interleave)->Arg(16)->Arg(128)->Arg(1024);

static void BM_is_prefix(benchmark::State& state) {
   size_t n = static_cast<size_t>(state.range(0));
   ledger a = sized_ledger("t", n);
   ledger b = a;
   b.txs.push_back(transaction{"tail", nullptr});
   for (auto _ : state) benchmark::DoNotOptimize(is_prefix(a, b));
}
BENCHMARK(BM_is_prefix)->Arg(128)->Arg(1024);

BENCHMARK_MAIN();
