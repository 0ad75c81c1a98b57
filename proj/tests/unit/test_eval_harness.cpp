#include <doctest.h>

#include "oracles/metric_oracles.hpp"
#include "support.hpp"

#include <ctxfix/eval_harness.hpp>
#include <ctxfix/python_syntax.hpp>

#include <algorithm>
#include <random>

using namespace ctxfix;
using namespace testing_support;

namespace {

std::string random_string(std::mt19937_64& rng, std::size_t max_len) {
    static const std::vector<std::string> alphabet = {"a", "b", "c", "d", " ", "\n", "_", "é", "λ", "中"};
    std::size_t len = std::uniform_int_distribution<std::size_t>(0, max_len)(rng);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    return s;
}

IterationTrace trace_with(int iteration, std::vector<std::string> codes, std::size_t candidate = 0) {
    IterationTrace t;
    t.task_id = "t";
    t.candidate = candidate;
    t.iteration = iteration;
    for (const auto& c : codes) t.diagnostics_after.push_back(make_diagnostic(c, "m", "f.py", 1, 0));
    return t;
}

} // namespace

TEST_CASE("pass@k reference points") {
    CHECK(pass_at_k(20, 0, 10) == 0.0);
    CHECK(pass_at_k(20, 20, 1) == 1.0);
    CHECK(pass_at_k(20, 5, 10) == doctest::Approx(0.98375).epsilon(1e-5));
    CHECK(std::abs(pass_at_k(20, 5, 10) - oracle::binomial_pass_at_k(20, 5, 10)) < 1e-12);
    CHECK(pass_at_k(20, 5, 1) == doctest::Approx(0.25));
    CHECK_THROWS_AS(pass_at_k(5, 6, 1), ContractViolation);
    CHECK_THROWS_AS(pass_at_k(5, 1, 6), ContractViolation);
    CHECK_THROWS_AS(pass_at_k(5, 1, 0), ContractViolation);
}

TEST_CASE("pass@k equals exact binomial arithmetic") {
    for (int n = 1; n <= 20; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k : {1, 5, 10}) {
                if (k > n) continue;
                CAPTURE(n);
                CAPTURE(c);
                CAPTURE(k);
                CHECK(std::abs(pass_at_k(n, c, k) - oracle::binomial_pass_at_k(n, c, k)) < 1e-12);
            }
        }
    }
}

TEST_CASE("pass@k agrees with resampling on a few points") {
    std::mt19937_64 rng(41);
    for (auto [n, c, k] : std::vector<std::array<int, 3>>{{20, 5, 10}, {20, 1, 5}, {10, 3, 1}, {12, 2, 10}}) {
        double mc = oracle::monte_carlo_pass_at_k(n, c, k, 20000, rng);
        CHECK(std::abs(pass_at_k(n, c, k) - mc) < 0.02);
    }
}

TEST_CASE("pass@k is monotone in c and k") {
    for (int n = 1; n <= 20; ++n) {
        for (int k = 1; k <= n; ++k) {
            for (int c = 1; c <= n; ++c) CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c - 1, k));
            if (k > 1) {
                for (int c = 0; c <= n; ++c) CHECK(pass_at_k(n, c, k) >= pass_at_k(n, c, k - 1));
            }
        }
    }
}

TEST_CASE("edit similarity reference points") {
    CHECK(edit_similarity("abc", "abc") == 1.0);
    CHECK(edit_similarity("abc", "") == 0.0);
    CHECK(edit_similarity("", "") == 1.0);
    CHECK(levenshtein("kitten", "sitting") == 3);
    CHECK(edit_similarity("kitten", "sitting") == doctest::Approx(1.0 - 3.0 / 7.0));
    CHECK(levenshtein("héllo", "hello") == 1);
}

TEST_CASE("levenshtein matches the DP table on random pairs") {
    std::mt19937_64 rng(1234);
    for (int i = 0; i < 1000; ++i) {
        auto a = random_string(rng, 24);
        auto b = random_string(rng, 24);
        CHECK(levenshtein(a, b) == oracle::dp_levenshtein(a, b));
        CHECK(edit_similarity(a, b) == oracle::dp_edit_similarity(a, b));
        CHECK(edit_similarity(a, b) == edit_similarity(b, a));
        CHECK(edit_similarity(a, a) == 1.0);
    }
    std::string invalid = "ab\xff\xfe";
    CHECK(levenshtein(invalid, "ab") == oracle::dp_levenshtein(invalid, "ab"));
}

TEST_CASE("levenshtein triangle inequality") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 300; ++i) {
        auto a = random_string(rng, 12), b = random_string(rng, 12), c = random_string(rng, 12);
        CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    }
}

TEST_CASE("exact match") {
    CHECK(exact_match("return x", "return x") == 1);
    CHECK(exact_match("return x", "return y") == 0);
    CHECK(exact_match("return x  \n\n", "return x") == 1);
    CHECK(exact_match("a = 1   \nb = 2\t\n", "a = 1\nb = 2") == 1);
    CHECK(exact_match(" a", "a") == 0);
}

TEST_CASE("identifier F1 reference points") {
    auto r = identifier_f1("a + b", "b + c");
    CHECK(r.precision == doctest::Approx(0.5));
    CHECK(r.recall == doctest::Approx(0.5));
    CHECK(r.f1 == doctest::Approx(0.5));
    CHECK(identifier_f1("x = y", "y = x").f1 == 1.0);
    CHECK(identifier_f1("x = 1", "y = 2").f1 == 0.0);
    CHECK(identifier_f1("1", "2").f1 == 1.0);
}

TEST_CASE("identifier F1 equals set arithmetic") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        auto p = oracle::random_code(rng);
        auto g = oracle::random_code(rng);
        CAPTURE(p.text);
        CAPTURE(g.text);
        auto ids = py::identifiers(p.text);
        CHECK(std::set<std::string>(ids.begin(), ids.end()) == p.ids);
        auto got = identifier_f1(p.text, g.text);
        auto want = oracle::set_prf(p.ids, g.ids);
        CHECK(got.precision == doctest::Approx(want.p));
        CHECK(got.recall == doctest::Approx(want.r));
        CHECK(got.f1 == doctest::Approx(want.f1));
    }
}

TEST_CASE("identifier F1 ignores statement order") {
    std::string a = "x = load(path)\ny = parse(x)\n";
    std::string b = "y = parse(x)\nx = load(path)\n";
    std::string gold = "x = load(path)\nreturn x\n";
    CHECK(identifier_f1(a, gold).f1 == identifier_f1(b, gold).f1);
}

TEST_CASE("error distribution") {
    std::vector<IterationTrace> traces = {trace_with(0, {"E0602", "E0602", "E0611"}), trace_with(1, {"E0602"})};
    auto d = error_distribution(traces);
    CHECK(d.iterations == 2);
    CHECK(d.at(ErrorCategory::Undef, 0) == 3);
    CHECK(d.at(ErrorCategory::Undef, 1) == 1);
    CHECK(d.at(ErrorCategory::Api, 0) == 0);
    auto csv = render_distribution_csv(d);
    CHECK(csv.rfind("category,iteration,count\n", 0) == 0);
    CHECK(csv.find("UNDEF,0,3\n") != std::string::npos);
    CHECK(csv.find("UNDEF,1,1\n") != std::string::npos);

    auto clean = error_distribution({trace_with(0, {}), trace_with(0, {}, 1)});
    for (auto c : kAllCategories) CHECK(clean.at(c, 0) == 0);

    auto tested = trace_with(2, {});
    tested.test_diagnostics.push_back(make_func_diagnostic("assert", "f.py", 1, false));
    auto f = error_distribution({tested});
    CHECK(f.at(ErrorCategory::Func, 2) == 1);
    CHECK(f.iterations == 3);
}

TEST_CASE("evaluate the fixture results directory") {
    auto loaded = load_results_directory(fixture("results"));
    REQUIRE(loaded.tasks.size() == 1);
    CHECK(loaded.tasks[0].n == 20);
    CHECK(loaded.tasks[0].c == 5);
    auto report = evaluate(loaded.tasks, loaded.traces, {1, 5, 10});
    CHECK(report.pass_at_k.at(10) == doctest::Approx(0.98375).epsilon(1e-5));
    CHECK(report.pass_at_k.at(1) == doctest::Approx(0.25));
    CHECK(report.tasks_counted.at(10) == 1);
    auto text = render_text(report);
    CHECK(text.find("pass@10") != std::string::npos);
    auto j = to_json(report);
    CHECK(j["pass_at_k"]["10"].get<double>() == doctest::Approx(0.98375).epsilon(1e-5));
}

TEST_CASE("tasks with fewer than k samples are left out of pass@k") {
    std::vector<TaskResult> tasks = {{"a", 20, 5, {}}, {"b", 3, 3, {}}};
    auto r = evaluate(tasks, {}, {1, 10});
    CHECK(r.tasks_counted.at(1) == 2);
    CHECK(r.tasks_counted.at(10) == 1);
    CHECK(r.pass_at_k.at(1) == doctest::Approx((0.25 + 1.0) / 2));
}

TEST_CASE("reference metrics compare the first candidate") {
    TaskResult t{"a", 1, 1, {{0, 0, std::nullopt, true, "return x + y"}}};
    auto r = evaluate({t}, {}, {1}, {{"a", "return x + y  \n"}});
    REQUIRE(r.match);
    CHECK(r.match->code_exact_match == 1.0);
    CHECK(r.match->code_edit_similarity == 1.0);
    CHECK(r.match->identifier_exact_match == 1.0);
    CHECK(r.match->identifier_f1 == 1.0);
    CHECK(r.match->tasks == 1);

    TaskResult u{"b", 1, 0, {{0, 0, std::string("UNDEF"), false, "return x - z"}}};
    auto r2 = evaluate({u}, {}, {1}, {{"b", "return x + y"}});
    REQUIRE(r2.match);
    CHECK(r2.match->code_exact_match == 0.0);
    CHECK(r2.match->code_edit_similarity == doctest::Approx(oracle::dp_edit_similarity("return x - z", "return x + y")));
    CHECK(r2.match->identifier_exact_match == 0.0);
    CHECK(r2.match->identifier_f1 == doctest::Approx(0.5));
}

TEST_CASE("results ingestion") {
    TempDir dir;
    spit(dir / "x.result.json", R"({"task_id": "x", "n": 2, "c": 1, "candidates": []})");
    spit(dir / "x.traces.jsonl", to_json(trace_with(0, {"E0602"})).dump() + "\n");
    spit(dir / "ignored.txt", "nothing");
    auto loaded = load_results_directory(dir.path());
    CHECK(loaded.tasks.size() == 1);
    CHECK(loaded.traces.size() == 1);
    spit(dir / "refs/x.py", "return 1\n");
    auto refs = load_references(dir / "refs");
    CHECK(refs.at("x") == "return 1\n");
    spit(dir / "bad.result.json", R"({"task_id": "b", "n": 2, "c": 3})");
    CHECK_THROWS(load_results_directory(dir.path()));
}
