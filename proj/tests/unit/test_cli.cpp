#include <doctest.h>

#include "support.hpp"

#include <cli.hpp>

#include <json.hpp>

#include <cstdlib>
#include <sstream>

using namespace testing_support;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;

    json summary() const { return json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "ctxfix");
    std::ostringstream out, err;
    int code = ctxfix::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string mock(const std::string& name) { return "mock:" + fixture("transcripts/" + name + ".json").string(); }
std::string task(const std::string& name) { return fixture("tasks/" + name + ".json").string(); }

// Indexes a private copy of the mini project.
struct Indexed {
    TempDir dir;
    fs::path root;
    std::string db;
    Indexed() : root(copy_mini(dir)), db((dir / "db.json").string()) {
        auto r = run({"index", root.string(), "--out", db, "--dim", "128"});
        REQUIRE(r.code == 0);
    }
};

} // namespace

TEST_CASE("index then query lists the fixture modules") {
    Indexed ix;
    auto r = run({"query", ix.db, "--text", "FROM Module m SELECT m"});
    REQUIRE(r.code == 0);
    auto s = r.summary();
    std::vector<std::string> names;
    for (const auto& row : s["tuples"]) names.push_back(row[0]["qualified_name"]);
    CHECK(names == std::vector<std::string>{"aio._bolt3", "bolt", "util"});
    CHECK(s["command"] == "query");
}

TEST_CASE("index summary counts entries by kind") {
    TempDir dir;
    auto r = run({"index", fixture("mini").string(), "--out", (dir / "db.json").string(), "--dim", "64"});
    REQUIRE(r.code == 0);
    auto s = r.summary();
    CHECK(s["entries"] == 20);
    CHECK(s["by_kind"]["Module"] == 3);
    CHECK(s["by_kind"]["Class"] == 4);
    CHECK(s["by_kind"]["Function"] == 8);
    CHECK(s["by_kind"]["Variable"] == 5);
    CHECK(s["config"]["embedder"]["dim"] == 64);
    CHECK(fs::exists(dir / "db.json"));
}

TEST_CASE("repair twice gives identical trace files") {
    Indexed ix;
    std::vector<std::string> outs;
    for (const char* sub : {"out1", "out2"}) {
        auto out = (ix.dir / sub).string();
        auto r = run({"repair", "--db", ix.db, "--task", task("wrong_import"), "--backend", mock("wrong_import"), "--n", "1",
                      "--max-iters", "3", "--out", out});
        REQUIRE(r.code == 0);
        outs.push_back(out);
    }
    for (const char* file : {"wrong_import.traces.jsonl", "wrong_import.result.json", "wrong_import.audit.jsonl"}) {
        auto a = slurp(fs::path(outs[0]) / file);
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(fs::path(outs[1]) / file));
    }
    auto result = json::parse(slurp(fs::path(outs[0]) / "wrong_import.result.json"));
    CHECK(result["c"] == 1);
}

TEST_CASE("repair runs several tasks concurrently with the same output") {
    Indexed ix;
    auto seq = (ix.dir / "seq").string();
    auto par = (ix.dir / "par").string();
    auto a = run({"repair", "--db", ix.db, "--task", task("clean"), "--task", task("plateau"), "--backend",
                  mock("plateau"), "--n", "1", "--out", seq});
    auto b = run({"repair", "--db", ix.db, "--task", task("clean"), "--task", task("plateau"), "--backend",
                  mock("plateau"), "--n", "1", "--out", par, "--jobs", "2"});
    CHECK(a.code == 1);  // plateau never passes
    CHECK(b.code == 1);
    for (const char* file : {"clean.traces.jsonl", "plateau.traces.jsonl", "plateau.result.json"}) {
        CHECK(slurp(fs::path(seq) / file) == slurp(fs::path(par) / file));
    }
    auto s = b.summary();
    CHECK(s["status"] == "failures");
    CHECK(s["tasks"].size() == 2);
}

TEST_CASE("eval on fixture results") {
    auto r = run({"eval", "--results", fixture("results").string(), "--k", "1,5,10"});
    REQUIRE(r.code == 0);
    auto s = r.summary();
    CHECK(s["report"]["pass_at_k"]["10"].get<double>() == doctest::Approx(0.98375).epsilon(1e-5));
    CHECK(s["report"]["pass_at_k"]["1"].get<double>() == doctest::Approx(0.25));
}

TEST_CASE("eval writes a summary file and a CSV when asked") {
    TempDir dir;
    auto summary = (dir / "summary.json").string();
    auto csv = (dir / "dist.csv").string();
    auto r = run({"eval", "--results", fixture("results").string(), "--csv", csv, "--summary", summary});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("pass@10") != std::string::npos);
    CHECK(json::parse(slurp(summary))["command"] == "eval");
    CHECK(slurp(csv).rfind("category,iteration,count", 0) == 0);
}

TEST_CASE("help lists every flag") {
    auto r = run({"--help"});
    CHECK(r.code == 0);
    for (const char* flag : {"--config", "--summary", "--out", "--ext", "--embedder", "--dim", "--seed", "--file",
                             "--span", "--code", "--checker", "--analyzer", "--text", "--for-error", "--backend",
                             "--line-budget", "--db", "--task", "--max-iters", "--n", "--jobs", "--retrieval-n",
                             "--temperature", "--top-k", "--max-new-tokens", "--prompt-budget", "--model",
                             "--no-tests", "--test-timeout", "--results", "--k", "--refs", "--csv"}) {
        CAPTURE(flag);
        CHECK(r.out.find(flag) != std::string::npos);
    }
    auto sub = run({"repair", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--max-iters") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"eval", "--nope"}).code == 2);
    CHECK(run({"repair", "--n", "lots"}).code == 2);
    CHECK(run({"repair", "--db", "x.json"}).code == 2);
    Indexed ix;
    CHECK(run({"query", ix.db}).code == 2);
    CHECK(run({"query", ix.db, "--text", "SELECT x"}).code == 2);
    CHECK(run({"repair", "--db", ix.db, "--task", task("wrong_import"), "--backend", "sometimes", "--out",
               (ix.dir / "o").string()})
              .code == 2);
}

TEST_CASE("missing API key stops before any work") {
    unsetenv("CTXFIX_COMPLETION_API_KEY");
    unsetenv("CTXFIX_EMBEDDING_API_KEY");
    Indexed ix;
    auto out = ix.dir / "remote-out";
    auto r = run({"repair", "--db", ix.db, "--task", task("wrong_import"), "--backend", "remote", "--out", out.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("CTXFIX_COMPLETION_API_KEY") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    auto db2 = ix.dir / "remote-db.json";
    auto idx = run({"index", ix.root.string(), "--out", db2.string(), "--embedder", "remote"});
    CHECK(idx.code == 2);
    CHECK(idx.err.find("CTXFIX_EMBEDDING_API_KEY") != std::string::npos);
    CHECK_FALSE(fs::exists(db2));
}

TEST_CASE("flags override the config file, which overrides defaults") {
    Indexed ix;
    auto cfg = ix.dir / "run.json";
    spit(cfg, R"({
      // comments are allowed
      "generation": {"temperature": 0.2},
      "loop": {"n_candidates": 4, "max_iterations": 2},
      "output_dir": ")" + (ix.dir / "from-config").string() + R"("
    })");
    auto r = run({"--config", cfg.string(), "repair", "--db", ix.db, "--task", task("clean"), "--backend",
                  mock("clean"), "--n", "2"});
    REQUIRE(r.code == 0);
    auto s = r.summary();
    CHECK(s["config"]["loop"]["n_candidates"] == 2);
    CHECK(s["config"]["loop"]["max_iterations"] == 2);
    CHECK(s["config"]["loop"]["retrieval_n"] == 5);
    CHECK(s["config"]["generation"]["temperature"].get<double>() == doctest::Approx(0.2));
    CHECK(fs::exists(ix.dir / "from-config" / "clean.result.json"));

    spit(cfg, R"({"loop": {"n_candidate": 4}})");
    auto bad = run({"--config", cfg.string(), "eval", "--results", fixture("results").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("n_candidate") != std::string::npos);
}

TEST_CASE("analyzer path comes from the environment unless a flag says otherwise") {
    Indexed ix;
    setenv("CTXFIX_ANALYZER", "/opt/custom/pylint", 1);
    auto r = run({"check", ix.db, "--file", "util.py"});
    CHECK(r.summary()["config"]["analyzer"] == "/opt/custom/pylint");
    auto flagged = run({"check", ix.db, "--file", "util.py", "--analyzer", "other-lint"});
    CHECK(flagged.summary()["config"]["analyzer"] == "other-lint");
    unsetenv("CTXFIX_ANALYZER");
}

TEST_CASE("check reports diagnostics for a spliced candidate") {
    Indexed ix;
    auto code = ix.dir / "candidate.py";
    spit(code, "@classmethod\ndef get_handler(cls, version):\n    from aio._bolt3 import SyncBolt3\n    return {3: SyncBolt3}\n");
    auto r = run({"check", ix.db, "--file", "bolt.py", "--span", "15:18", "--code", code.string()});
    CHECK(r.code == 1);
    auto s = r.summary();
    REQUIRE(s["diagnostics"].size() == 1);
    CHECK(s["diagnostics"][0]["code"] == "E0611");
    CHECK(slurp(ix.root / "bolt.py") == slurp(fixture("mini/bolt.py")));

    auto clean = run({"check", ix.db, "--file", "bolt.py"});
    CHECK(clean.code == 0);
    CHECK(clean.summary()["clean"] == true);
}

TEST_CASE("query for a diagnostic uses the hard-coded lookup") {
    Indexed ix;
    auto diag = ix.dir / "diag.json";
    spit(diag, R"({"code": "E1101", "message": "Class 'AsyncBolt' has no 'connect' member", "file": "bolt.py", "line": 17, "column": 8})");
    auto r = run({"query", ix.db, "--for-error", diag.string()});
    REQUIRE(r.code == 0);
    auto s = r.summary();
    CHECK(s["origin"] == "hardcoded");
    CHECK(s["tuple_count"] == 3);

    spit(diag, R"({"code": "E0611", "message": "No name 'SyncBolt3' in module 'aio._bolt3'", "file": "bolt.py", "line": 18, "column": 4})");
    CHECK(run({"query", ix.db, "--for-error", diag.string()}).code == 2);
    auto transcript = ix.dir / "q.json";
    spit(transcript, R"([{"ordinal": 0, "responses": ["FROM Module m, Class c WHERE m.contains(c) and m.getName() = 'aio._bolt3' SELECT m, c"]}])");
    auto synth = run({"query", ix.db, "--for-error", diag.string(), "--backend", "mock:" + transcript.string()});
    REQUIRE(synth.code == 0);
    CHECK(synth.summary()["origin"] == "synthesized");
    CHECK(synth.summary()["tuple_count"] == 2);
}
