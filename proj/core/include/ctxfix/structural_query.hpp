#pragma once

#include "ctxfix/context_index.hpp"
#include "ctxfix/diagnostics.hpp"
#include "ctxfix/llm_gateway.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix {

enum class Predicate { Contains, GetName, GetScope, InSource, IsInitMethod };

std::string_view to_string(Predicate predicate);

struct QueryVariable {
    std::string name;
    EntryKind kind = EntryKind::Module;

    friend bool operator==(const QueryVariable&, const QueryVariable&) = default;
};

/// `subject.pred(...)`: `object` is the second variable of contains/getScope,
/// `literal` the right-hand side of getName.
struct Condition {
    Predicate predicate = Predicate::InSource;
    bool negated = false;
    std::string subject;
    std::string object;
    std::string literal;

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct SelectItem {
    std::string variable;
    bool definition = false;  // getDefinition(v)

    friend bool operator==(const SelectItem&, const SelectItem&) = default;
};

struct StructuralQuery {
    std::vector<QueryVariable> from;
    std::vector<Condition> where;  // conjunction
    std::vector<SelectItem> select;

    friend bool operator==(const StructuralQuery&, const StructuralQuery&) = default;
};

/// FROM Kind v, ... [WHERE p and not q ...] SELECT v, w.getDefinition(), ...
/// Keywords are case-insensitive; zero-argument predicates may omit "()".
/// Throws QueryParseError for syntax errors, unknown predicates, and
/// undeclared variables.
StructuralQuery parse_query(std::string_view text);

/// Canonical text form; parse_query(render_query(q)) == q.
std::string render_query(const StructuralQuery& query);

struct QueryOptions {
    std::size_t snippet_line_budget = 40;
};

struct QueryResult {
    std::string query_text;                     // the executed query, or a description of the lookup
    std::vector<std::vector<EntryId>> tuples;   // deduplicated, lexicographic id order
    std::vector<std::string> rendered;          // one snippet per tuple
};

/// Nested-loop join over the entry graph. Unsatisfiable queries give 0 tuples.
QueryResult execute_query(const StructuralQuery& query, const ProjectDatabase& db, const QueryOptions& options = {});

/// Tuples only, no rendering.
std::vector<std::vector<EntryId>> query_tuples(const StructuralQuery& query, const ProjectDatabase& db);

/// Table lookups for E0001, E0602, E1101, E0213 and E0102; nullopt for every
/// other code or when the message names nothing to look up.
std::optional<QueryResult> hardcoded_query_for(const Diagnostic& diag, const ProjectDatabase& db,
                                               const QueryOptions& options = {});

/// Codes answered by hardcoded_query_for.
bool has_hardcoded_query(std::string_view code);

/// Asks the backend for a query; the first response must parse. Throws
/// QueryRejected otherwise.
StructuralQuery synthesize_query(const Diagnostic& diag, CompletionBackend& backend, const GenerationConfig& config,
                                 const RequestContext& request);

/// Pulls the query out of a free-form completion (fences, a "Query:" prefix).
std::string query_text_from_completion(std::string_view completion);

/// Context text for one entry: location, schema passage, and optionally its
/// source lines (at most `line_budget`).
std::string render_entry_snippet(const ProjectDatabase& db, EntryId id, bool with_source, std::size_t line_budget);

} // namespace ctxfix
