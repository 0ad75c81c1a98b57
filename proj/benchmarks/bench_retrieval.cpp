#include <benchmark/benchmark.h>

#include <ctxfix/semantic_retrieval.hpp>

#include <random>

namespace {

ctxfix::EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> g;
    ctxfix::EmbeddingVector v;
    v.values.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) v.values.push_back(g(rng));
    return v;
}

} // namespace

static void BM_cosine(benchmark::State& state) {
    std::mt19937_64 rng(1);
    auto dim = static_cast<std::size_t>(state.range(0));
    auto a = random_vector(rng, dim);
    auto b = random_vector(rng, dim);
    for (auto _ : state) benchmark::DoNotOptimize(ctxfix::cosine(a, b));
}
BENCHMARK(BM_cosine)->Arg(256)->Arg(1536);

static void BM_top_n(benchmark::State& state) {
    std::mt19937_64 rng(2);
    auto rows = static_cast<std::size_t>(state.range(0));
    const std::size_t dim = 256;
    ctxfix::EmbeddingIndex index(dim);
    for (std::size_t i = 0; i < rows; ++i) index.add({i, random_vector(rng, dim), ""});
    auto q = random_vector(rng, dim);
    for (auto _ : state) {
        auto top = ctxfix::top_n(q, index, 5);
        benchmark::DoNotOptimize(top);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_top_n)->RangeMultiplier(10)->Range(100, 100000);

static void BM_local_encoder(benchmark::State& state) {
    ctxfix::LocalHashEncoder enc(static_cast<std::size_t>(state.range(0)));
    std::string text =
        "def get_handler(cls, version): Returns the protocol handler class for the given Bolt version, "
        "falling back to AsyncBolt3 when the server does not negotiate.";
    for (auto _ : state) {
        auto v = enc.encode(text);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_local_encoder)->Arg(256)->Arg(1536);
