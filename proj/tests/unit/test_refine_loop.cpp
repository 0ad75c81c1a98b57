#include <doctest.h>

#include "support.hpp"

#include <ctxfix/refine_loop.hpp>

using namespace ctxfix;
using namespace testing_support;

namespace {

constexpr std::size_t kDim = 256;

struct Run {
    RepairResult result;
    std::string traces_json;
};

Run run_fixture(const std::string& name, const ProjectDatabase& db, LoopConfig cfg = {},
                std::optional<GenerationTask> task = std::nullopt) {
    if (!task) task = load_task(fixture("tasks/" + name + ".json"));
    MockBackend backend(read_transcript(fixture("transcripts/" + name + ".json")));
    LocalHashEncoder enc(kDim);
    auto result = repair(*task, db, Backends{backend, enc}, {}, cfg);
    std::string dump;
    for (const auto& t : result.traces) dump += to_json(t).dump() + "\n";
    return {std::move(result), std::move(dump)};
}

LoopConfig single() {
    LoopConfig c;
    c.n_candidates = 1;
    return c;
}

} // namespace

TEST_CASE("wrong import fixed by structural context") {
    auto db = index_project(fixture("mini"), kDim);
    auto run = run_fixture("wrong_import", db, single());
    const auto& r = run.result;
    CHECK_FALSE(r.aborted);
    REQUIRE(r.candidates.size() == 1);
    const auto& cand = r.candidates[0];
    CHECK(cand.status == CandidateStatus::Clean);
    CHECK(cand.iteration == 1);
    CHECK(cand.code.find("AsyncBolt3") != std::string::npos);
    REQUIRE(r.traces.size() == 2);

    const auto& t0 = r.traces[0];
    CHECK(t0.iteration == 0);
    REQUIRE(t0.diagnostics_after.size() == 1);
    CHECK(t0.diagnostics_after[0].code == "E0611");
    CHECK(t0.diagnostics_after[0].subtype == "UNDEF-API");
    CHECK(t0.structural.empty());

    const auto& t1 = r.traces[1];
    CHECK(t1.iteration == 1);
    CHECK(t1.diagnostics_before == t0.diagnostics_after);
    CHECK(t1.diagnostics_after.empty());
    REQUIRE(t1.structural.size() == 1);
    CHECK(t1.structural[0].origin == "synthesized");
    CHECK(t1.structural[0].status == "ok");
    auto target = db.by_qualified_name("aio._bolt3.AsyncBolt3");
    REQUIRE(target.size() == 1);
    bool found = false;
    for (const auto& tuple : t1.structural[0].tuples) {
        found = found || std::find(tuple.begin(), tuple.end(), target[0]) != tuple.end();
    }
    CHECK(found);
    CHECK(t1.semantic.size() == 5);
}

TEST_CASE("mock replay is deterministic") {
    auto db = index_project(fixture("mini"), kDim);
    auto a = run_fixture("wrong_import", db, single());
    auto b = run_fixture("wrong_import", db, single());
    CHECK(a.traces_json == b.traces_json);
    CHECK(result_summary(a.result).dump() == result_summary(b.result).dump());
}

TEST_CASE("already clean candidate stops after one check") {
    auto db = index_project(fixture("mini"), kDim);
    LoopConfig cfg;
    cfg.n_candidates = 4;
    auto run = run_fixture("clean", db, cfg);
    REQUIRE(run.result.candidates.size() == 4);
    CHECK(run.result.traces.size() == 4);
    for (const auto& t : run.result.traces) {
        CHECK(t.iteration == 0);
        CHECK(t.structural.empty());
        CHECK(t.diagnostics_after.empty());
    }
    for (const auto& c : run.result.candidates) CHECK(c.status == CandidateStatus::Clean);
}

TEST_CASE("never-fixing backend exhausts after max_iterations") {
    auto db = index_project(fixture("mini"), kDim);
    auto run = run_fixture("plateau", db, single());
    const auto& r = run.result;
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.candidates[0].status == CandidateStatus::Exhausted);
    CHECK_FALSE(r.candidates[0].report.clean);
    REQUIRE(r.traces.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(r.traces[static_cast<std::size_t>(i)].iteration == i);
        CHECK_FALSE(r.traces[static_cast<std::size_t>(i)].diagnostics_after.empty());
    }
    CHECK(r.traces[1].structural[0].origin == "hardcoded");

    LoopConfig two = single();
    two.max_iterations = 2;
    auto shorter = run_fixture("plateau", db, two);
    CHECK(shorter.result.traces.size() == 2);
    CHECK(shorter.result.candidates[0].status == CandidateStatus::Exhausted);
}

TEST_CASE("running out of transcript aborts the task") {
    auto db = index_project(fixture("mini"), kDim);
    LoopConfig cfg;
    cfg.n_candidates = 2;
    auto run = run_fixture("wrong_import", db, cfg);
    CHECK(run.result.aborted);
}

TEST_CASE("feedback assembly") {
    std::string file = "def f():\n    return SyncBolt3\n";
    auto one = filter_to_solution({make_diagnostic("E0611", "No name 'SyncBolt3' in module 'aio._bolt3'", "b.py", 2, 11)},
                                  {1, 2});
    auto text = assemble_feedback(one, file);
    CHECK(text.find('\n') == std::string::npos);
    CHECK(text.find("No name 'SyncBolt3' in module 'aio._bolt3'") != std::string::npos);
    CHECK(text.find("return SyncBolt3") != std::string::npos);

    std::vector<Diagnostic> seven;
    for (int i = 0; i < 7; ++i) seven.push_back(make_diagnostic("E0602", "Undefined variable 'v'", "b.py", 2, i));
    auto five = assemble_feedback(filter_to_solution(seven, {1, 2}), file);
    CHECK(std::count(five.begin(), five.end(), '\n') == 4);

    CHECK_THROWS_AS(assemble_feedback(filter_to_solution({}, {1, 2}), file), ContractViolation);

    auto mixed = filter_to_solution({make_diagnostic("E1121", "Too many positional arguments for function call", "b.py", 1, 0),
                                     make_diagnostic("E0602", "Undefined variable 'a'", "b.py", 2, 0),
                                     make_diagnostic("E0602", "Undefined variable 'b'", "b.py", 2, 4)},
                                    {1, 2});
    auto ordered = assemble_feedback(mixed, file);
    CHECK(ordered.rfind("E0602", 0) == 0);
}

TEST_CASE("splice re-indents to the span") {
    std::string file = "class A:\n    def f(self):\n        pass\n\nx = 1\n";
    auto [text, span] = splice_solution(file, {2, 3}, "def f(self):\n    return 2\n");
    CHECK(text == "class A:\n    def f(self):\n        return 2\n\nx = 1\n");
    CHECK(span == LineSpan{2, 3});
    auto [longer, span2] = splice_solution(file, {2, 3}, "def f(self):\n    y = 1\n    return y");
    CHECK(span2 == LineSpan{2, 4});
    CHECK(longer.find("        y = 1\n") != std::string::npos);
}

TEST_CASE("task tests: pass, fail, timeout") {
    TempDir dir;
    auto root = copy_mini(dir);
    auto db = index_project(root, kDim);
    auto task = load_task(fixture("tasks/wrong_import.json"));
    task.test_command = "python3 -c 'import bolt; assert bolt.AsyncBolt.get_handler(3) == {3: bolt.AsyncBolt}'";
    std::string original = slurp(root / "bolt.py");

    std::string good = "@classmethod\ndef get_handler(cls, version):\n    return {version: cls}\n";
    CHECK(run_task_tests(good, task, db, std::chrono::seconds(20)).empty());
    CHECK(slurp(root / "bolt.py") == original);

    std::string wrong = "@classmethod\ndef get_handler(cls, version):\n    return {}\n";
    auto failed = run_task_tests(wrong, task, db, std::chrono::seconds(20));
    REQUIRE(failed.size() == 1);
    CHECK(failed[0].category == ErrorCategory::Func);
    CHECK_FALSE(is_repairable(failed[0]));

    std::string spin = "@classmethod\ndef get_handler(cls, version):\n    while True:\n        pass\n";
    auto slow = run_task_tests(spin, task, db, std::chrono::seconds(2));
    REQUIRE(slow.size() == 1);
    CHECK(slow[0].category == ErrorCategory::Func);
    CHECK(slow[0].subtype == "FUNC-TIMEOUT");
    CHECK(failed[0].subtype == "FUNC");
    CHECK(slurp(root / "bolt.py") == original);
}

TEST_CASE("test outcomes are recorded on candidates") {
    TempDir dir;
    auto root = copy_mini(dir);
    auto db = index_project(root, kDim);
    auto task = load_task(fixture("tasks/clean.json"));
    task.test_command = "python3 -c 'import bolt; assert bolt.AsyncBolt.get_handler(3) == {3: bolt.AsyncBolt}'";
    auto run = run_fixture("clean", db, single(), task);
    REQUIRE(run.result.candidates.size() == 1);
    CHECK(run.result.candidates[0].tests_passed == true);

    task.test_command = "false";
    auto failing = run_fixture("clean", db, single(), task);
    CHECK(failing.result.candidates[0].tests_passed == false);
    CHECK(failing.result.candidates[0].test_diagnostics.size() == 1);
    CHECK(result_summary(failing.result)["c"] == 0);
}

TEST_CASE("external checker with fallback") {
    auto db = index_project(fixture("mini"), kDim);
    LoopConfig cfg = single();
    cfg.checker = CheckerChoice::External;
    cfg.external.analyzer = "no-such-analyzer-binary";
    TempDir dir;
    auto root = copy_mini(dir);
    auto local_db = index_project(root, kDim);
    auto run = run_fixture("wrong_import", local_db, cfg);
    CHECK_FALSE(run.result.warnings.empty());
    CHECK(run.result.candidates[0].status == CandidateStatus::Clean);

    cfg.fallback_to_builtin = false;
    auto strict = run_fixture("wrong_import", local_db, cfg);
    CHECK(strict.result.aborted);
}

TEST_CASE("Wrong-import replay under pylint") {
    if (!on_path("pylint")) {
        MESSAGE("pylint not installed; skipping");
        return;
    }
    TempDir dir;
    auto root = copy_mini(dir);
    auto db = index_project(root, kDim);
    LoopConfig cfg = single();
    cfg.checker = CheckerChoice::External;
    cfg.fallback_to_builtin = false;
    auto run = run_fixture("wrong_import", db, cfg);
    const auto& r = run.result;
    CHECK_FALSE(r.aborted);
    REQUIRE(r.traces.size() == 2);
    REQUIRE(r.traces[0].diagnostics_after.size() == 1);
    CHECK(r.traces[0].diagnostics_after[0].code == "E0611");
    CHECK(r.traces[1].diagnostics_after.empty());
    CHECK(slurp(root / "bolt.py") == slurp(fixture("mini/bolt.py")));
}

TEST_CASE("task and loop config validation") {
    auto ok = nlohmann::json::parse(R"({"id": "t", "requirement": "r", "target_file": "a.py", "insertion_span": [1, 2]})");
    auto task = task_from_json(ok);
    CHECK(task.insertion_span == LineSpan{1, 2});
    CHECK_FALSE(task.signature_stub);
    auto extra = ok;
    extra["surprise"] = 1;
    CHECK_THROWS_AS(task_from_json(extra), ConfigError);
    auto backwards = ok;
    backwards["insertion_span"] = {5, 2};
    CHECK_THROWS_AS(task_from_json(backwards), ConfigError);

    LoopConfig cfg;
    CHECK(cfg.max_iterations == 3);
    CHECK(cfg.n_candidates == 20);
    CHECK(cfg.retrieval_n == 5);
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}

TEST_CASE("traces round-trip through JSON") {
    auto db = index_project(fixture("mini"), kDim);
    auto run = run_fixture("wrong_import", db, single());
    for (const auto& t : run.result.traces) {
        auto back = trace_from_json(nlohmann::json::parse(to_json(t).dump()));
        CHECK(to_json(back).dump() == to_json(t).dump());
    }
}
