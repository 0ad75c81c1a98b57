#include <doctest.h>

#include "oracles/brute_query.hpp"
#include "oracles/random_graph.hpp"
#include "support.hpp"

#include <ctxfix/structural_query.hpp>

#include <algorithm>
#include <random>

using namespace ctxfix;
using namespace testing_support;

namespace {

const char* kSyncBolt3 =
    "FROM Module m, Class c WHERE m.contains(c) and m.getName() = 'async._bolt3' SELECT m, c";

std::vector<std::string> demo_queries() {
    std::vector<std::string> out;
    for (const auto& d : query_demonstrations()) out.emplace_back(d.query);
    return out;
}

MockBackend scripted(std::string response) {
    TranscriptEntry e;
    e.ordinal = 0;
    e.responses = {std::move(response)};
    return MockBackend({e});
}

// The mini project with its aio package renamed to async.
struct AsyncProject {
    TempDir dir;
    ProjectDatabase db;
    AsyncProject() {
        fs::path root = copy_mini(dir);
        fs::rename(root / "aio", root / "async");
        db = index_project(root);
    }
};

std::string random_query(std::mt19937_64& rng) {
    static const std::vector<std::string> kinds = {"Module", "Class", "Function", "Variable"};
    static const std::vector<std::string> names = {"alpha", "beta", "__init__", "Helper", "mod0", "pkg.mod3", "mod0.run"};
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    std::size_t nv = 1 + pick(3);
    std::vector<std::string> vars;
    std::string q = "from ";
    for (std::size_t i = 0; i < nv; ++i) {
        vars.push_back("v" + std::to_string(i));
        q += (i ? ", " : "") + kinds[pick(kinds.size())] + " " + vars.back();
    }
    std::size_t nc = pick(4);
    for (std::size_t i = 0; i < nc; ++i) {
        q += i ? " and " : " where ";
        if (pick(4) == 0) q += "not ";
        const auto& a = vars[pick(nv)];
        const auto& b = vars[pick(nv)];
        switch (pick(5)) {
        case 0: q += a + ".contains(" + b + ")"; break;
        case 1: q += a + ".getScope() = " + b; break;
        case 2: q += a + ".getName() = '" + names[pick(names.size())] + "'"; break;
        case 3: q += a + ".inSource()"; break;
        default: q += a + ".isInitMethod()"; break;
        }
    }
    q += " select ";
    std::size_t ns = 1 + pick(nv);
    for (std::size_t i = 0; i < ns; ++i) {
        q += (i ? ", " : "") + (pick(2) ? vars[pick(nv)] : vars[pick(nv)] + ".getDefinition()");
    }
    return q;
}

} // namespace

TEST_CASE("parse the SyncBolt3 query") {
    auto q = parse_query(kSyncBolt3);
    CHECK(q.from.size() == 2);
    CHECK(q.from[0] == QueryVariable{"m", EntryKind::Module});
    CHECK(q.from[1] == QueryVariable{"c", EntryKind::Class});
    REQUIRE(q.where.size() == 2);
    CHECK(q.where[0].predicate == Predicate::Contains);
    CHECK(q.where[0].subject == "m");
    CHECK(q.where[0].object == "c");
    CHECK(q.where[1].predicate == Predicate::GetName);
    CHECK(q.where[1].literal == "async._bolt3");
    CHECK(q.select.size() == 2);
}

TEST_CASE("parse edge cases") {
    auto q = parse_query("FROM Module m SELECT m");
    CHECK(q.where.empty());
    CHECK(q.select == std::vector<SelectItem>{{"m", false}});

    CHECK_THROWS_AS(parse_query("SELECT x"), QueryParseError);
    CHECK_THROWS_AS(parse_query("FROM Module m SELECT x"), QueryParseError);
    CHECK_THROWS_AS(parse_query("FROM Module m, Class m SELECT m"), QueryParseError);
    CHECK_THROWS_AS(parse_query("FROM Modul m SELECT m"), QueryParseError);
    CHECK_THROWS_AS(parse_query("FROM Module m WHERE m.frobnicate() SELECT m"), QueryParseError);
    CHECK_THROWS_AS(parse_query("FROM Module m SELECT m extra"), QueryParseError);
    CHECK_THROWS_AS(parse_query(""), QueryParseError);

    auto d = parse_query("from Function f where not f.isInitMethod select getDefinition(f)");
    REQUIRE(d.where.size() == 1);
    CHECK(d.where[0].negated);
    CHECK(d.select[0].definition);
}

TEST_CASE("all demonstration queries parse") {
    for (const auto& text : demo_queries()) {
        CAPTURE(text);
        CHECK_NOTHROW(parse_query(text));
    }
    auto undef_p = parse_query(demo_queries()[0]);
    CHECK(undef_p.from.size() == 2);
}

TEST_CASE("render then parse is the identity") {
    std::mt19937_64 rng(5);
    auto texts = demo_queries();
    texts.push_back(kSyncBolt3);
    for (int i = 0; i < 300; ++i) texts.push_back(random_query(rng));
    for (const auto& text : texts) {
        CAPTURE(text);
        auto q = parse_query(text);
        CHECK(parse_query(render_query(q)) == q);
        CHECK(render_query(parse_query(render_query(q))) == render_query(q));
    }
}

TEST_CASE("SyncBolt3 query finds the two top-level classes") {
    AsyncProject p;
    auto result = execute_query(parse_query(kSyncBolt3), p.db);
    REQUIRE(result.tuples.size() == 2);
    std::vector<std::string> classes;
    for (const auto& t : result.tuples) {
        CHECK(p.db.entry(t[0]).qualified_name == "async._bolt3");
        classes.push_back(p.db.entry(t[1]).qualified_name);
    }
    CHECK(classes == std::vector<std::string>{"async._bolt3.AsyncBolt3", "async._bolt3.Helper"});
    CHECK(result.rendered.size() == 2);
    CHECK(result.tuples == oracle::brute_query(parse_query(kSyncBolt3), p.db.entries()));
}

TEST_CASE("unsatisfiable queries give no tuples") {
    auto empty = oracle::database_of({});
    CHECK(execute_query(parse_query(kSyncBolt3), empty).tuples.empty());
    CHECK(execute_query(parse_query("FROM Module m SELECT m"), empty).tuples.empty());
    auto db = index_project(fixture("mini"));
    CHECK(execute_query(parse_query("FROM Class c WHERE c.getName() = 'Nope' SELECT c"), db).tuples.empty());
}

TEST_CASE("interpreter equals brute-force enumeration on random databases") {
    std::mt19937_64 rng(99);
    auto texts = demo_queries();
    texts.push_back(kSyncBolt3);
    for (int seed = 0; seed < 60; ++seed) {
        auto es = oracle::random_entries(rng, 14);
        auto db = oracle::database_of(es);
        for (int i = 0; i < 5; ++i) {
            auto text = random_query(rng);
            CAPTURE(text);
            auto q = parse_query(text);
            CHECK(query_tuples(q, db) == oracle::brute_query(q, es));
        }
        for (const auto& text : texts) {
            auto q = parse_query(text);
            CHECK(query_tuples(q, db) == oracle::brute_query(q, es));
        }
    }
}

TEST_CASE("adding an unrelated entry never removes tuples") {
    std::mt19937_64 rng(123);
    for (int seed = 0; seed < 40; ++seed) {
        auto es = oracle::random_entries(rng, 12);
        auto q = parse_query(random_query(rng));
        auto before = query_tuples(q, oracle::database_of(es));
        ContextEntry extra;
        extra.id = es.size();
        extra.kind = EntryKind::Module;
        extra.name = extra.qualified_name = "unrelated";
        extra.path = "unrelated.py";
        es.push_back(extra);
        auto after = query_tuples(q, oracle::database_of(es));
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
}

TEST_CASE("hard-coded lookups") {
    TempDir dir;
    spit(dir / "logs.py",
         "class RootLogger:\n"
         "    level = 0\n"
         "\n"
         "    def info(self, msg):\n"
         "        return msg\n"
         "\n"
         "    def warn(self, msg):\n"
         "        return msg\n");
    auto db = index_project(dir.path());

    auto member = make_diagnostic("E1101", "Instance of 'RootLogger' has no 'loggerDict' member", "x.py", 1, 0);
    auto r = hardcoded_query_for(member, db);
    REQUIRE(r);
    // Brute-force scan for the class members.
    std::vector<EntryId> expected;
    auto cls = db.by_qualified_name("logs.RootLogger");
    REQUIRE(cls.size() == 1);
    for (const auto& e : db.entries()) {
        if (e.parent_id == cls[0]) expected.push_back(e.id);
    }
    REQUIRE(expected.size() == 3);
    std::vector<EntryId> got;
    for (const auto& t : r->tuples) got.insert(got.end(), t.begin(), t.end());
    std::sort(got.begin(), got.end());
    CHECK(got == expected);

    auto missing = make_diagnostic("E0602", "Undefined variable 'nothing_here'", "x.py", 1, 0);
    auto r2 = hardcoded_query_for(missing, db);
    REQUIRE(r2);
    CHECK(r2->tuples.empty());

    auto found = make_diagnostic("E0602", "Undefined variable 'RootLogger'", "x.py", 1, 0);
    auto r3 = hardcoded_query_for(found, db);
    REQUIRE(r3);
    CHECK(r3->tuples.size() == 1);

    CHECK_FALSE(hardcoded_query_for(make_diagnostic("E1121", "Too many positional arguments for function call",
                                                    "x.py", 1, 0),
                                    db));
    for (const char* code : {"E0001", "E0602", "E1101", "E0213", "E0102"}) CHECK(has_hardcoded_query(code));
    CHECK_FALSE(has_hardcoded_query("E0611"));
    CHECK_FALSE(has_hardcoded_query("E1121"));
}

TEST_CASE("hard-coded lookup for a syntax error shows the enclosing definition") {
    auto db = index_project(fixture("mini"));
    auto d = make_diagnostic("E0001", "Parsing failed: 'invalid syntax (<unknown>, line 17)'", "bolt.py", 17, 0);
    auto r = hardcoded_query_for(d, db);
    REQUIRE(r);
    REQUIRE(r->tuples.size() == 1);
    CHECK(db.entry(r->tuples[0][0]).qualified_name == "bolt.AsyncBolt.get_handler");
    CHECK(r->rendered[0].find("def get_handler") != std::string::npos);
}

TEST_CASE("query synthesis through a scripted backend") {
    auto diag = make_diagnostic("E0611", "No name 'SyncBolt3' found in module 'async._bolt3'", "bolt.py", 18, 0);
    auto backend = scripted(std::string("```\n") + kSyncBolt3 + "\n```");
    auto log = std::make_shared<AuditLog>();
    backend.set_audit_log(log);
    auto q = synthesize_query(diag, backend, {}, {"t", 0});
    CHECK(q == parse_query(kSyncBolt3));
    auto records = log->records();
    REQUIRE(records.size() == 1);
    CHECK(records[0].kind == PromptKind::QuerySynthesis);
    for (const auto& d : query_demonstrations()) {
        CHECK(records[0].prompt.find(std::string(d.query)) != std::string::npos);
    }

    auto import_diag = make_diagnostic("E0401", "Unable to import 'keys'", "a.py", 1, 0);
    auto demo = scripted(std::string("Query: ") + std::string(query_demonstrations()[0].query));
    auto q2 = synthesize_query(import_diag, demo, {}, {"t", 0});
    CHECK(q2.from[0].kind == EntryKind::Module);
    CHECK(q2.select.size() == 1);

    auto prose = scripted("I am not sure what query would help here.");
    CHECK_THROWS_AS(synthesize_query(diag, prose, {}, {"t", 0}), QueryRejected);
}

TEST_CASE("query text is pulled out of chatty completions") {
    CHECK(query_text_from_completion("Query: FROM Module m SELECT m") == "FROM Module m SELECT m");
    CHECK(query_text_from_completion("Here you go:\n```sql\nfrom Module m\nselect m\n```\nDone.") ==
          "from Module m select m");
}
