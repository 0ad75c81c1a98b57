#include "synthetic.hpp"

#include <benchmark/benchmark.h>

#include <ctxfix/structural_query.hpp>

namespace {

const char* kModuleClasses = "FROM Module m, Class c WHERE m.contains(c) and m.getName() = 'pkg3.mod3' SELECT m, c";
const char* kInitMethods = "FROM Class c, Function f WHERE c.contains(f) and f.isInitMethod() SELECT c, getDefinition(f)";
const char* kNamedMember = "FROM Class c, Function f WHERE f.getScope() = c and f.getName() = 'step_2' SELECT f";

} // namespace

static void BM_parse_query(benchmark::State& state) {
    for (auto _ : state) {
        auto q = ctxfix::parse_query(kInitMethods);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_parse_query);

static void run_query(benchmark::State& state, const char* text) {
    auto db = bench::synthetic_database(static_cast<std::size_t>(state.range(0)), 16);
    auto q = ctxfix::parse_query(text);
    for (auto _ : state) {
        auto tuples = ctxfix::query_tuples(q, db);
        benchmark::DoNotOptimize(tuples);
    }
    state.counters["entries"] = static_cast<double>(db.entries().size());
}

static void BM_query_module_classes(benchmark::State& state) { run_query(state, kModuleClasses); }
static void BM_query_init_methods(benchmark::State& state) { run_query(state, kInitMethods); }
static void BM_query_named_member(benchmark::State& state) { run_query(state, kNamedMember); }
BENCHMARK(BM_query_module_classes)->Arg(10)->Arg(50);
BENCHMARK(BM_query_init_methods)->Arg(10)->Arg(50);
BENCHMARK(BM_query_named_member)->Arg(10)->Arg(50);
