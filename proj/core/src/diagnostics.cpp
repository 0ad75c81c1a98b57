#include "ctxfix/diagnostics.hpp"

#include "ctxfix/python_syntax.hpp"

#include <algorithm>
#include <map>
#include <regex>

namespace ctxfix {

std::string_view to_string(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Undef: return "UNDEF";
    case ErrorCategory::Api: return "API";
    case ErrorCategory::Object: return "OBJECT";
    case ErrorCategory::Func: return "FUNC";
    case ErrorCategory::Other: return "OTHER";
    }
    return "OTHER";
}

std::optional<ErrorCategory> error_category_from_string(std::string_view text) {
    for (auto c : kAllCategories) {
        if (to_string(c) == text) {
            return c;
        }
    }
    return std::nullopt;
}

namespace {

struct TaxonomyRow {
    std::string_view code;
    ErrorCategory category;
    std::string_view subtype;
};

// The frequently reported analyzer codes and their taxonomy placement.
constexpr std::array<TaxonomyRow, 11> kTaxonomy = {{
    {"E0401", ErrorCategory::Undef, "UNDEF-P"},
    {"E1101", ErrorCategory::Undef, "UNDEF-CM"},
    {"E0611", ErrorCategory::Undef, "UNDEF-API"},
    {"E0602", ErrorCategory::Undef, "UNDEF-O"},
    {"E1121", ErrorCategory::Api, "API-TMA"},
    {"E1120", ErrorCategory::Api, "API-IA"},
    {"E1111", ErrorCategory::Api, "API-WA"},
    {"E1123", ErrorCategory::Api, "API-WA"},
    {"E1133", ErrorCategory::Object, "OBJ-NI"},
    {"E1102", ErrorCategory::Object, "OBJ-NC"},
    {"E1136", ErrorCategory::Object, "OBJ-NS"},
}};

std::optional<std::string> first_match(const std::regex& re, std::string_view message, std::size_t group = 1) {
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(message.begin(), message.end(), m, re) && m.size() > group && m[group].matched) {
        return m[group].str();
    }
    return std::nullopt;
}

} // namespace

Classification classify(std::string_view code) {
    for (const auto& row : kTaxonomy) {
        if (row.code == code) {
            return {row.category, std::string(row.subtype)};
        }
    }
    return {ErrorCategory::Other, std::nullopt};
}

std::optional<std::string> extract_symbol(std::string_view code, std::string_view message) {
    static const std::regex quoted(R"('([^']+)')");
    static const std::regex member(R"(has no '([^']+)' member)");
    static const std::regex no_name(R"(No name '([^']+)')");
    static const std::regex callee(R"(in (?:function|method|constructor) call '([^']+)')");
    static const std::regex noniterable(R"(Non-iterable value (\S+) is used)");
    static const std::regex not_callable(R"(^'?([^' ]+)'? is not callable)");
    static const std::regex unsubscriptable(R"(Value '([^']+)' is unsubscriptable)");
    static const std::regex method_self(R"(Method '([^']+)' should have)");

    if (code == "E1101") return first_match(member, message);
    if (code == "E0611") return first_match(no_name, message);
    if (code == "E1120" || code == "E1123" || code == "E1121") {
        if (auto fn = first_match(callee, message)) {
            return fn;
        }
        return first_match(quoted, message);
    }
    if (code == "E1133") return first_match(noniterable, message);
    if (code == "E1102") return first_match(not_callable, message);
    if (code == "E1136") return first_match(unsubscriptable, message);
    if (code == "E0213") return first_match(method_self, message);
    if (code == "E0401" || code == "E0602" || code == "E0601" || code == "E0603") {
        return first_match(quoted, message);
    }
    return std::nullopt;
}

Diagnostic make_diagnostic(std::string code, std::string message, std::string file, int line, int column) {
    Diagnostic d;
    auto cls = classify(code);
    d.symbol = extract_symbol(code, message);
    d.code = std::move(code);
    d.message = std::move(message);
    d.file = std::move(file);
    d.line = std::max(1, line);
    d.column = std::max(0, column);
    d.category = cls.category;
    d.subtype = std::move(cls.subtype);
    return d;
}

Diagnostic make_func_diagnostic(std::string message, std::string file, int line, bool timed_out) {
    Diagnostic d;
    d.code = std::string(kFuncCode);
    d.message = timed_out ? "timeout: " + message : std::move(message);
    d.file = std::move(file);
    d.line = std::max(1, line);
    d.category = ErrorCategory::Func;
    d.subtype = timed_out ? std::optional<std::string>("FUNC-TIMEOUT") : std::optional<std::string>("FUNC");
    return d;
}

void enrich_symbols(std::vector<Diagnostic>& diags, std::string_view file_text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= file_text.size()) {
        std::size_t nl = file_text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(file_text.substr(start));
            break;
        }
        lines.push_back(file_text.substr(start, nl - start));
        start = nl + 1;
    }
    static const std::regex def_name(R"(^\s*(?:async\s+)?(?:def|class)\s+([A-Za-z_][A-Za-z0-9_]*))");
    static const std::regex call_name(R"(([A-Za-z_][A-Za-z0-9_]*)\s*\()");
    for (auto& d : diags) {
        if (d.symbol || d.line < 1 || static_cast<std::size_t>(d.line) > lines.size()) {
            continue;
        }
        std::string_view text = lines[static_cast<std::size_t>(d.line - 1)];
        if (d.code == "E0102" || d.code == "E0213") {
            d.symbol = first_match(def_name, text);
        } else if (d.code == "E1121" || d.code == "E1120" || d.code == "E1111") {
            std::string_view tail = text.substr(std::min<std::size_t>(static_cast<std::size_t>(d.column), text.size()));
            d.symbol = first_match(call_name, tail);
        }
    }
}

CheckReport filter_to_solution(std::vector<Diagnostic> diags, const LineSpan& solution_span) {
    CheckReport report;
    for (const auto& d : diags) {
        if (solution_span.contains(d.line)) {
            report.solution_diagnostics.push_back(d);
        }
    }
    report.all_diagnostics = std::move(diags);
    report.clean = report.solution_diagnostics.empty();
    if (!report.clean) {
        std::map<ErrorCategory, int> counts;
        for (const auto& d : report.solution_diagnostics) {
            ++counts[d.category];
        }
        ErrorCategory best = ErrorCategory::Other;
        int best_count = -1;
        for (auto c : kAllCategories) {
            if (counts[c] > best_count) {
                best = c;
                best_count = counts[c];
            }
        }
        report.dominant_category = best;
    }
    return report;
}

bool is_repairable(const Diagnostic& diag) { return diag.category != ErrorCategory::Func; }

} // namespace ctxfix
