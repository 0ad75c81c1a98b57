#include <benchmark/benchmark.h>

#include <ctxfix/eval_harness.hpp>
#include <ctxfix/llm_gateway.hpp>

#include <random>

namespace {

std::string random_code(std::mt19937_64& rng, std::size_t len) {
    static const std::string alphabet = "abcdefgh_ ()=+\n";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[pick(rng)];
    return s;
}

} // namespace

static void BM_levenshtein(benchmark::State& state) {
    std::mt19937_64 rng(3);
    auto len = static_cast<std::size_t>(state.range(0));
    auto a = random_code(rng, len);
    auto b = random_code(rng, len);
    for (auto _ : state) benchmark::DoNotOptimize(ctxfix::levenshtein(a, b));
}
BENCHMARK(BM_levenshtein)->Arg(64)->Arg(512)->Arg(2048);

static void BM_identifier_f1(benchmark::State& state) {
    std::string pred = "def step(self, value, scale=1):\n    total = value * scale\n    return self.offset + total\n";
    std::string gold = "def step(self, value, factor=1):\n    return self.offset + value * factor\n";
    for (auto _ : state) benchmark::DoNotOptimize(ctxfix::identifier_f1(pred, gold));
}
BENCHMARK(BM_identifier_f1);

static void BM_pass_at_k(benchmark::State& state) {
    for (auto _ : state) {
        double sum = 0;
        for (int c = 0; c <= 20; ++c) sum += ctxfix::pass_at_k(20, c, 10);
        benchmark::DoNotOptimize(sum);
    }
}
BENCHMARK(BM_pass_at_k);

static void BM_extract_code(benchmark::State& state) {
    std::string completion = "Here is the fix:\n```python\n@classmethod\ndef get_handler(cls, version):\n"
                             "    from aio._bolt3 import AsyncBolt3\n    return {3: AsyncBolt3}\n```\nDone.";
    for (auto _ : state) benchmark::DoNotOptimize(ctxfix::extract_code(completion));
}
BENCHMARK(BM_extract_code);
