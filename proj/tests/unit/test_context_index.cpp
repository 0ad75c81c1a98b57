#include <doctest.h>

#include "oracles/brute_tables.hpp"
#include "oracles/fixture_entries.hpp"
#include "oracles/random_graph.hpp"
#include "support.hpp"

#include <ctxfix/context_index.hpp>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

using namespace ctxfix;
using namespace testing_support;

namespace {

std::vector<std::string> scanned_paths(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& u : scan_source_files(root).units) out.push_back(u.path);
    return out;
}

ContextEntry make_entry(EntryId id, EntryKind kind, std::string name, std::optional<EntryId> parent,
                        const std::vector<ContextEntry>& prior) {
    ContextEntry e;
    e.id = id;
    e.kind = kind;
    e.name = name;
    e.qualified_name = parent ? prior[*parent].qualified_name + "." + name : name;
    e.parent_id = parent;
    e.path = "m.py";
    return e;
}

} // namespace

TEST_CASE("scan_source_files filters by extension and sorts") {
    TempDir dir;
    CHECK(scanned_paths(dir.path()).empty());

    spit(dir / "readme.md", "# hi\n");
    spit(dir / "notes.txt", "x\n");
    CHECK(scanned_paths(dir.path()).empty());

    spit(dir / "sub/b.py", "x = 1\n");
    spit(dir / "a.py", "y = 2\n");
    CHECK(scanned_paths(dir.path()) == std::vector<std::string>{"a.py", "sub/b.py"});
}

TEST_CASE("scan_source_files rejects a missing root") {
    CHECK_THROWS_AS(scan_source_files(fixture("does-not-exist")), IoError);
}

TEST_CASE("module names follow the path") {
    CHECK(module_name_for_path("sub/b.py") == "sub.b");
    CHECK(module_name_for_path("a.py") == "a");
}

TEST_CASE("method entry carries its qualified name and class parent") {
    SourceUnit unit{"bolt.py",
                    "class AsyncBolt:\n"
                    "    @classmethod\n"
                    "    def get_handler(cls, version):\n"
                    "        \"\"\"Return Bolt protocol handlers\"\"\"\n"
                    "        pass\n"};
    auto entries = extract_entries(unit, 0);
    auto it = std::find_if(entries.begin(), entries.end(),
                           [](const ContextEntry& e) { return e.qualified_name == "bolt.AsyncBolt.get_handler"; });
    REQUIRE(it != entries.end());
    CHECK(it->kind == EntryKind::Function);
    REQUIRE(it->parent_id);
    CHECK(entries[*it->parent_id].qualified_name == "bolt.AsyncBolt");
    CHECK(entries[*it->parent_id].kind == EntryKind::Class);
    CHECK(it->docstring == "Return Bolt protocol handlers");
}

TEST_CASE("empty source set builds an empty database") {
    LocalHashEncoder enc(16);
    auto db = build_database({}, enc);
    CHECK(db.entries().empty());
    CHECK(db.tables().empty());
    CHECK(db.tables().modules.empty());
    CHECK(db.tables().class_variables.empty());
}

TEST_CASE("fixture project indexes to the hand-enumerated entry set") {
    auto db = index_project(fixture("mini"));
    const auto& expected = oracle::mini_entries();
    REQUIRE(db.entries().size() == expected.size());

    std::map<std::string, const ContextEntry*> by_q;
    for (const auto& e : db.entries()) by_q[e.qualified_name] = &e;
    for (const auto& x : expected) {
        CAPTURE(x.qualified_name);
        REQUIRE(by_q.count(x.qualified_name) == 1);
        const auto& e = *by_q[x.qualified_name];
        CHECK(to_string(e.kind) == x.kind);
        CHECK(e.path == x.path);
        CHECK(e.span == LineSpan{x.start, x.end});
        if (x.parent.empty()) {
            CHECK_FALSE(e.parent_id);
        } else {
            REQUIRE(e.parent_id);
            CHECK(db.entry(*e.parent_id).qualified_name == x.parent);
        }
    }
    CHECK(db.warnings().empty());
    CHECK(db.unembedded_entries().empty());
}

TEST_CASE("qualified names spell the ancestor chain") {
    auto db = index_project(fixture("mini"));
    for (const auto& e : db.entries()) {
        std::vector<std::string> chain;
        std::optional<EntryId> cur = e.id;
        while (cur) {
            const auto& a = db.entry(*cur);
            chain.insert(chain.begin(), a.name);
            cur = a.parent_id;
        }
        std::string joined;
        for (const auto& part : chain) joined += (joined.empty() ? "" : ".") + part;
        CHECK(joined == e.qualified_name);
    }
}

TEST_CASE("derive_tables small cases") {
    std::vector<ContextEntry> es;
    es.push_back(make_entry(0, EntryKind::Module, "m", std::nullopt, es));
    es.push_back(make_entry(1, EntryKind::Class, "C", 0, es));
    es.push_back(make_entry(2, EntryKind::Function, "f", 1, es));
    auto t = derive_tables(es);
    CHECK(t.modules.size() == 1);
    CHECK(t.module_classes.size() == 1);
    CHECK(t.class_functions.size() == 1);
    CHECK(t.class_variables.empty());
    CHECK(t.global_functions.empty());
    CHECK(t.global_variables.empty());

    std::vector<ContextEntry> gf;
    gf.push_back(make_entry(0, EntryKind::Module, "m", std::nullopt, gf));
    gf.push_back(make_entry(1, EntryKind::Function, "f", 0, gf));
    auto t2 = derive_tables(gf);
    CHECK(t2.global_functions == std::vector<std::array<EntryId, 2>>{{0, 1}});
    CHECK(t2.class_functions.empty());

    CHECK(derive_tables({}).empty());
}

TEST_CASE("derive_tables matches the brute-force join on random graphs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto es = oracle::random_entries(rng);
        CAPTURE(i);
        CHECK(derive_tables(es) == oracle::brute_tables(es));
    }
}

TEST_CASE("fixture tables match the brute-force join") {
    auto db = index_project(fixture("mini"));
    CHECK(db.tables() == oracle::brute_tables(db.entries()));
}

TEST_CASE("schema passages") {
    auto db = index_project(fixture("mini"));
    auto ids = db.by_qualified_name("bolt.AsyncBolt.get_handler");
    REQUIRE(ids.size() == 1);
    CHECK(entry_schema_text(db.entry(ids[0])).find("Return Bolt protocol handlers") != std::string::npos);

    ContextEntry bare;
    bare.kind = EntryKind::Variable;
    bare.qualified_name = "m.X";
    CHECK(entry_schema_text(bare) == "Variable m.X");

    auto a = db.by_qualified_name("bolt.PROTOCOL_VERSION");
    auto b = db.by_qualified_name("aio._bolt3.AsyncBolt3.PROTOCOL_VERSION");
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(entry_schema_text(db.entry(a[0])) != entry_schema_text(db.entry(b[0])));
}

TEST_CASE("build is independent of input order and round-trips byte-identically") {
    auto scan = scan_source_files(fixture("mini"));
    LocalHashEncoder enc(64);
    auto forward = serialize_database(build_database(scan.units, enc, "root"));
    auto reversed_units = scan.units;
    std::reverse(reversed_units.begin(), reversed_units.end());
    auto backward = serialize_database(build_database(reversed_units, enc, "root"));
    CHECK(forward == backward);

    auto again = serialize_database(deserialize_database(forward));
    CHECK(again == forward);
}

TEST_CASE("unparsable files are skipped with a warning") {
    TempDir dir;
    spit(dir / "good.py", "def ok():\n    return 1\n");
    spit(dir / "bad.py", "def broken(:\n");
    auto db = index_project(dir.path());
    REQUIRE(db.warnings().size() == 1);
    CHECK(db.warnings()[0].path == "bad.py");
    CHECK_FALSE(db.module_for_path("bad.py"));
    CHECK(db.module_for_path("good.py"));
}

TEST_CASE("database file round trip and format checks") {
    TempDir dir;
    auto db = index_project(fixture("mini"), 32);
    save_database(db, dir / "db.json");
    auto back = load_database(dir / "db.json");
    CHECK(back.entries() == db.entries());
    CHECK(back.tables() == db.tables());
    CHECK(back.embeddings() == db.embeddings());
    CHECK_THROWS_AS(deserialize_database("{\"format_version\": 99}"), DatabaseFormatError);
    CHECK_THROWS_AS(deserialize_database("not json"), DatabaseFormatError);
    CHECK_THROWS_AS(load_database(dir / "missing.json"), IoError);
}

TEST_CASE("database lookups") {
    auto db = index_project(fixture("mini"));
    auto mod = db.module_by_name("aio._bolt3");
    REQUIRE(mod);
    CHECK(db.entry(*mod).path == "aio/_bolt3.py");
    auto kids = db.children_of(*mod);
    std::vector<std::string> names;
    for (auto id : kids) names.push_back(db.entry(id).name);
    CHECK(names == std::vector<std::string>{"DEFAULT_PORT", "AsyncBolt3", "Helper"});
    auto bolt = db.module_for_path("bolt.py");
    REQUIRE(bolt);
    auto inner = db.innermost_at(*bolt, 17);
    REQUIRE(inner);
    CHECK(db.entry(*inner).qualified_name == "bolt.AsyncBolt.get_handler");
    CHECK(db.module_of(*inner) == *bolt);
    auto lines = db.source_lines(db.entry(*inner), 2);
    REQUIRE(lines.size() == 2);
    CHECK(lines[1].find("def get_handler") != std::string::npos);
}
