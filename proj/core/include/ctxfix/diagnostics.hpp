#pragma once

#include "ctxfix/context_index.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix {

enum class ErrorCategory { Undef, Api, Object, Func, Other };

std::string_view to_string(ErrorCategory category);
std::optional<ErrorCategory> error_category_from_string(std::string_view text);

/// Fixed order used for tie-breaking and reports.
inline constexpr std::array<ErrorCategory, 5> kAllCategories = {
    ErrorCategory::Undef, ErrorCategory::Api, ErrorCategory::Object, ErrorCategory::Func, ErrorCategory::Other};

struct Classification {
    ErrorCategory category = ErrorCategory::Other;
    std::optional<std::string> subtype;  // e.g. "UNDEF-API"
};

/// Code -> taxonomy. Total: codes outside the table map to OTHER. Never yields FUNC.
Classification classify(std::string_view code);

/// Code reserved for failed task tests; only the test runner produces it.
inline constexpr std::string_view kFuncCode = "FUNC";

struct Diagnostic {
    std::string code;
    std::string message;
    std::string file;
    int line = 1;
    int column = 0;
    std::optional<std::string> symbol;
    ErrorCategory category = ErrorCategory::Other;
    std::optional<std::string> subtype;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Pulls the identifier a message is about (quoted name, module path, callee).
std::optional<std::string> extract_symbol(std::string_view code, std::string_view message);

/// Builds a classified diagnostic and extracts its symbol from the message.
Diagnostic make_diagnostic(std::string code, std::string message, std::string file, int line, int column);

/// Runtime/test failure. `timed_out` tags the message.
Diagnostic make_func_diagnostic(std::string message, std::string file, int line, bool timed_out);

/// Fills in missing symbols from the offending source line (def/class names,
/// callee names) for codes whose messages carry no identifier.
void enrich_symbols(std::vector<Diagnostic>& diags, std::string_view file_text);

struct CheckReport {
    std::vector<Diagnostic> all_diagnostics;
    std::vector<Diagnostic> solution_diagnostics;
    std::optional<ErrorCategory> dominant_category;
    bool clean = true;
};

/// Keeps diagnostics inside `solution_span`; the dominant category is the most
/// frequent one, ties going to the earlier of UNDEF, API, OBJECT, FUNC, OTHER.
CheckReport filter_to_solution(std::vector<Diagnostic> diags, const LineSpan& solution_span);

/// FUNC findings never enter the retrieval loop.
bool is_repairable(const Diagnostic& diag);

struct ExternalCheckerConfig {
    std::string analyzer = "pylint";
    std::vector<std::string> extra_args;
    std::chrono::milliseconds timeout{std::chrono::seconds(120)};
};

/// Parses the analyzer's JSON array, keeping only error-severity messages.
/// Throws ProtocolError on anything else.
std::vector<Diagnostic> parse_checker_output(std::string_view output);

/// Spawns `<analyzer> --output-format json <file>` in `project_root`.
/// Throws ToolUnavailable when the analyzer cannot be started.
std::vector<Diagnostic> run_external_checker(const std::filesystem::path& file,
                                             const std::filesystem::path& project_root,
                                             const ExternalCheckerConfig& config = {});

/// Offline checker driven by the project index. Reports, within `span`:
/// E0602 undefined names, E0611 missing names in indexed modules, E1101
/// missing members on indexed classes, E1121/E1120 positional-argument count
/// mismatches against indexed signatures, and E0001 when the file does not
/// parse. Anything it cannot resolve is left alone.
std::vector<Diagnostic> builtin_check(std::string_view file_text, const LineSpan& span,
                                      const ProjectDatabase& db, std::string_view file_path = {});

} // namespace ctxfix
