#include "ctxfix/structural_query.hpp"

#include <algorithm>
#include <filesystem>
#include <regex>
#include <set>

namespace ctxfix {

namespace {

using Pair = std::pair<EntryId, EntryId>;

// contains(a, b) over the six tables. Module->Function is transitive
// (global functions and class methods); every other pairing is direct.
struct ContainsRelation {
    std::set<Pair> module_class;
    std::set<Pair> module_function;
    std::set<Pair> module_variable;
    std::set<Pair> class_function;
    std::set<Pair> class_variable;

    explicit ContainsRelation(const StructuralTables& t) {
        for (const auto& r : t.module_classes) module_class.insert({r[0], r[1]});
        for (const auto& r : t.global_functions) module_function.insert({r[0], r[1]});
        for (const auto& r : t.global_variables) module_variable.insert({r[0], r[1]});
        for (const auto& r : t.class_functions) {
            module_function.insert({r[0], r[2]});
            class_function.insert({r[1], r[2]});
        }
        for (const auto& r : t.class_variables) class_variable.insert({r[1], r[2]});
    }

    bool operator()(const ContextEntry& a, const ContextEntry& b) const {
        Pair p{a.id, b.id};
        if (a.kind == EntryKind::Module) {
            switch (b.kind) {
            case EntryKind::Class: return module_class.count(p) != 0;
            case EntryKind::Function: return module_function.count(p) != 0;
            case EntryKind::Variable: return module_variable.count(p) != 0;
            default: return false;
            }
        }
        if (a.kind == EntryKind::Class) {
            if (b.kind == EntryKind::Function) return class_function.count(p) != 0;
            if (b.kind == EntryKind::Variable) return class_variable.count(p) != 0;
        }
        return false;
    }
};

bool name_matches(const ContextEntry& e, const std::string& literal) {
    if (literal.find('.') != std::string::npos) {
        return e.qualified_name == literal;
    }
    return e.name == literal;
}

struct BoundCondition {
    const Condition* cond;
    std::size_t subject;
    std::size_t object;  // == subject when unused
    std::size_t ready;   // max variable index used
};

class Executor {
public:
    Executor(const StructuralQuery& q, const ProjectDatabase& db)
        : q_(q), db_(db), contains_(db.tables()), bound_(q.from.size()) {
        auto index_of = [&](const std::string& name) {
            for (std::size_t i = 0; i < q.from.size(); ++i) {
                if (q.from[i].name == name) return i;
            }
            throw ContractViolation("query references undeclared variable '" + name + "'");
        };
        for (const auto& v : q.from) {
            std::vector<EntryId> ids;
            for (const auto& e : db.entries()) {
                if (e.kind == v.kind) ids.push_back(e.id);
            }
            domains_.push_back(std::move(ids));
        }
        for (const auto& c : q.where) {
            std::size_t s = index_of(c.subject);
            std::size_t o = (c.predicate == Predicate::Contains || c.predicate == Predicate::GetScope)
                                ? index_of(c.object)
                                : s;
            conds_.push_back({&c, s, o, std::max(s, o)});
        }
        for (const auto& item : q.select) {
            projection_.push_back(index_of(item.variable));
        }
    }

    std::vector<std::vector<EntryId>> run() {
        std::set<std::vector<EntryId>> rows;
        search(0, rows);
        return {rows.begin(), rows.end()};
    }

private:
    bool holds(const BoundCondition& bc) const {
        const ContextEntry& s = db_.entry(bound_[bc.subject]);
        const ContextEntry& o = db_.entry(bound_[bc.object]);
        bool value = false;
        switch (bc.cond->predicate) {
        case Predicate::Contains: value = contains_(s, o); break;
        case Predicate::GetScope: value = s.parent_id && *s.parent_id == o.id; break;
        case Predicate::GetName: value = name_matches(s, bc.cond->literal); break;
        case Predicate::InSource: value = true; break;
        case Predicate::IsInitMethod:
            value = s.kind == EntryKind::Function && s.name == "__init__" && s.parent_id &&
                    db_.entry(*s.parent_id).kind == EntryKind::Class;
            break;
        }
        return value != bc.cond->negated;
    }

    void search(std::size_t depth, std::set<std::vector<EntryId>>& rows) {
        if (depth == domains_.size()) {
            std::vector<EntryId> row;
            row.reserve(projection_.size());
            for (std::size_t idx : projection_) row.push_back(bound_[idx]);
            rows.insert(std::move(row));
            return;
        }
        for (EntryId id : domains_[depth]) {
            bound_[depth] = id;
            bool ok = true;
            for (const auto& bc : conds_) {
                if (bc.ready == depth && !holds(bc)) {
                    ok = false;
                    break;
                }
            }
            if (ok) search(depth + 1, rows);
        }
    }

    const StructuralQuery& q_;
    const ProjectDatabase& db_;
    ContainsRelation contains_;
    std::vector<std::vector<EntryId>> domains_;
    std::vector<BoundCondition> conds_;
    std::vector<std::size_t> projection_;
    std::vector<EntryId> bound_;
};

std::string limit_lines(const std::string& text, std::size_t budget) {
    std::string out;
    std::size_t lines = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        if (lines == budget) {
            out += "...";
            return out;
        }
        if (lines) out += '\n';
        out += line;
        ++lines;
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

QueryResult render_result(std::string query_text, std::vector<std::vector<EntryId>> tuples,
                          const std::vector<bool>& with_source, const ProjectDatabase& db,
                          const QueryOptions& options) {
    QueryResult res;
    res.query_text = std::move(query_text);
    for (const auto& t : tuples) {
        std::string snippet;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) snippet += '\n';
            snippet += render_entry_snippet(db, t[i], with_source[i], options.snippet_line_budget);
        }
        res.rendered.push_back(limit_lines(snippet, options.snippet_line_budget));
    }
    res.tuples = std::move(tuples);
    return res;
}

QueryResult single_column(std::string description, std::set<EntryId> ids, bool with_source,
                          const ProjectDatabase& db, const QueryOptions& options) {
    std::vector<std::vector<EntryId>> tuples;
    for (EntryId id : ids) tuples.push_back({id});
    return render_result(std::move(description), std::move(tuples), {with_source}, db, options);
}

std::optional<EntryId> module_for_diagnostic(const Diagnostic& diag, const ProjectDatabase& db) {
    std::filesystem::path p(diag.file);
    std::string rel = p.generic_string();
    if (p.is_absolute() && !db.project_root().empty()) {
        rel = std::filesystem::path(diag.file).lexically_relative(db.project_root()).generic_string();
    }
    if (rel.rfind("./", 0) == 0) rel = rel.substr(2);
    return db.module_for_path(rel);
}

std::optional<EntryId> enclosing_entry(const Diagnostic& diag, const ProjectDatabase& db) {
    auto module = module_for_diagnostic(diag, db);
    if (!module) return std::nullopt;
    return db.innermost_at(*module, diag.line);
}

// Class (or module) named in an E1101 message.
std::optional<std::pair<EntryKind, std::string>> owner_from_message(const std::string& message) {
    static const std::regex owner(R"((Instance of|Class|Module) '([^']+)')");
    std::smatch m;
    if (!std::regex_search(message, m, owner)) return std::nullopt;
    EntryKind kind = m[1].str() == "Module" ? EntryKind::Module : EntryKind::Class;
    return std::make_pair(kind, m[2].str());
}

} // namespace

std::vector<std::vector<EntryId>> query_tuples(const StructuralQuery& query, const ProjectDatabase& db) {
    return Executor(query, db).run();
}

QueryResult execute_query(const StructuralQuery& query, const ProjectDatabase& db, const QueryOptions& options) {
    std::vector<bool> with_source;
    for (const auto& item : query.select) with_source.push_back(item.definition);
    return render_result(render_query(query), query_tuples(query, db), with_source, db, options);
}

std::string render_entry_snippet(const ProjectDatabase& db, EntryId id, bool with_source, std::size_t line_budget) {
    const ContextEntry& e = db.entry(id);
    std::string out = "# " + e.path + ":" + std::to_string(e.span.start) + "-" + std::to_string(e.span.end) + "\n" +
                      entry_schema_text(e);
    if (with_source) {
        for (const auto& line : db.source_lines(e, line_budget)) {
            out += "\n" + line;
        }
    }
    return out;
}

bool has_hardcoded_query(std::string_view code) {
    return code == "E0001" || code == "E0602" || code == "E1101" || code == "E0213" || code == "E0102";
}

std::optional<QueryResult> hardcoded_query_for(const Diagnostic& diag, const ProjectDatabase& db,
                                               const QueryOptions& options) {
    if (!has_hardcoded_query(diag.code)) {
        return std::nullopt;
    }
    const StructuralTables& t = db.tables();

    if (diag.code == "E0602") {
        if (!diag.symbol) return std::nullopt;
        std::set<EntryId> tabled;
        for (const auto& r : t.modules) tabled.insert(r[0]);
        for (const auto& r : t.module_classes) tabled.insert(r[1]);
        for (const auto& r : t.class_functions) tabled.insert(r[2]);
        for (const auto& r : t.class_variables) tabled.insert(r[2]);
        for (const auto& r : t.global_functions) tabled.insert(r[1]);
        for (const auto& r : t.global_variables) tabled.insert(r[1]);
        std::set<EntryId> hits;
        for (EntryId id : tabled) {
            if (db.entry(id).name == *diag.symbol) hits.insert(id);
        }
        return single_column("E0602 name '" + *diag.symbol + "'", std::move(hits), false, db, options);
    }

    if (diag.code == "E1101") {
        auto owner = owner_from_message(diag.message);
        if (!owner) return std::nullopt;
        std::set<EntryId> owners;
        for (const auto& e : db.entries()) {
            if (e.kind == owner->first && name_matches(e, owner->second)) owners.insert(e.id);
        }
        std::set<EntryId> members;
        if (owner->first == EntryKind::Class) {
            for (const auto& r : t.class_functions) if (owners.count(r[1])) members.insert(r[2]);
            for (const auto& r : t.class_variables) if (owners.count(r[1])) members.insert(r[2]);
        } else {
            for (const auto& r : t.module_classes) if (owners.count(r[0])) members.insert(r[1]);
            for (const auto& r : t.global_functions) if (owners.count(r[0])) members.insert(r[1]);
            for (const auto& r : t.global_variables) if (owners.count(r[0])) members.insert(r[1]);
        }
        return single_column("E1101 members of '" + owner->second + "'", std::move(members), false, db, options);
    }

    if (diag.code == "E0102") {
        if (!diag.symbol) return std::nullopt;
        auto inner = enclosing_entry(diag, db);
        if (!inner) return std::nullopt;
        std::set<EntryId> hits;
        // The redefinition is either the entry at the line itself or a sibling/child name.
        std::vector<std::string> candidates;
        const ContextEntry& at = db.entry(*inner);
        if (at.name == *diag.symbol) candidates.push_back(at.qualified_name);
        candidates.push_back(at.qualified_name + "." + *diag.symbol);
        if (at.parent_id) candidates.push_back(db.entry(*at.parent_id).qualified_name + "." + *diag.symbol);
        for (const auto& q : candidates) {
            for (EntryId id : db.by_qualified_name(q)) hits.insert(id);
        }
        return single_column("E0102 redefinitions of '" + *diag.symbol + "'", std::move(hits), true, db, options);
    }

    // E0213 / E0001: the definition enclosing the reported line.
    auto inner = enclosing_entry(diag, db);
    if (!inner) return std::nullopt;
    return single_column(diag.code + " enclosing definition", {*inner}, true, db, options);
}

} // namespace ctxfix
