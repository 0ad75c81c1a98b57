#include "synthetic.hpp"

#include <benchmark/benchmark.h>

#include <ctxfix/semantic_retrieval.hpp>

static void BM_extract_entries(benchmark::State& state) {
    auto units = bench::synthetic_project(1);
    for (auto _ : state) {
        auto es = ctxfix::extract_entries(units[0], 0);
        benchmark::DoNotOptimize(es);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * units[0].text.size()));
}
BENCHMARK(BM_extract_entries);

static void BM_build_database(benchmark::State& state) {
    auto units = bench::synthetic_project(static_cast<std::size_t>(state.range(0)));
    ctxfix::LocalHashEncoder enc(256);
    for (auto _ : state) {
        auto db = ctxfix::build_database(units, enc);
        benchmark::DoNotOptimize(db);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_build_database)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_derive_tables(benchmark::State& state) {
    auto db = bench::synthetic_database(static_cast<std::size_t>(state.range(0)), 16);
    for (auto _ : state) {
        auto t = ctxfix::derive_tables(db.entries());
        benchmark::DoNotOptimize(t);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(db.entries().size()));
}
BENCHMARK(BM_derive_tables)->Arg(10)->Arg(100);

static void BM_serialize_roundtrip(benchmark::State& state) {
    auto db = bench::synthetic_database(20, 64);
    for (auto _ : state) {
        auto back = ctxfix::deserialize_database(ctxfix::serialize_database(db));
        benchmark::DoNotOptimize(back);
    }
}
BENCHMARK(BM_serialize_roundtrip)->Unit(benchmark::kMillisecond);
