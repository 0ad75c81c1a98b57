#pragma once

#include "ctxfix/context_index.hpp"
#include "ctxfix/diagnostics.hpp"
#include "ctxfix/llm_gateway.hpp"
#include "ctxfix/semantic_retrieval.hpp"
#include "ctxfix/structural_query.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ctxfix {

struct GenerationTask {
    std::string id;
    std::string requirement;
    std::string target_file;  // relative to the project root
    LineSpan insertion_span;  // lines the solution replaces
    std::optional<std::string> signature_stub;
    std::optional<std::string> test_command;  // run through /bin/sh in the project root
};

GenerationTask task_from_json(const nlohmann::json& j);
GenerationTask load_task(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const GenerationTask& task);

enum class CheckerChoice { Builtin, External };

struct LoopConfig {
    int max_iterations = 3;
    int n_candidates = 20;
    std::size_t retrieval_n = 5;
    CheckerChoice checker = CheckerChoice::Builtin;
    ExternalCheckerConfig external;
    bool fallback_to_builtin = true;  // when the external analyzer is missing
    std::size_t snippet_line_budget = 40;
    std::size_t feedback_limit = 5;
    std::chrono::milliseconds test_timeout{std::chrono::seconds(30)};
    bool run_tests = true;

    /// Throws ContractViolation for max_iterations < 1, n_candidates < 1, retrieval_n < 1.
    void validate() const;
};

nlohmann::ordered_json to_json(const LoopConfig& config);

enum class CandidateStatus { Clean, Failing, Exhausted };
std::string_view to_string(CandidateStatus status);

struct Candidate {
    std::size_t index = 0;
    std::string code;
    int iteration = 0;  // iteration that produced `code`
    CheckReport report;
    CandidateStatus status = CandidateStatus::Failing;
    std::optional<bool> tests_passed;  // set when the task has a test command
    std::vector<Diagnostic> test_diagnostics;
};

struct StructuralTraceItem {
    std::string code;
    std::string query_text;
    std::string origin;  // "hardcoded" | "synthesized"
    std::string status;  // "ok" | "empty" | "rejected"
    std::size_t tuple_count = 0;
    std::vector<std::vector<EntryId>> tuples;
};

struct IterationTrace {
    std::string task_id;
    std::size_t candidate = 0;
    int iteration = 0;
    std::string prompt_digest;
    std::vector<StructuralTraceItem> structural;
    std::vector<ScoredEntry> semantic;
    std::vector<Diagnostic> diagnostics_before;
    std::vector<Diagnostic> diagnostics_after;
    std::string code_digest;
    std::vector<Diagnostic> test_diagnostics;
};

nlohmann::ordered_json to_json(const Diagnostic& diag);
Diagnostic diagnostic_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const IterationTrace& trace);
IterationTrace trace_from_json(const nlohmann::json& j);

struct Backends {
    CompletionBackend& completion;
    const TextEncoder& encoder;
};

struct RepairResult {
    std::string task_id;
    std::vector<Candidate> candidates;
    std::vector<IterationTrace> traces;  // grouped by candidate, iterations ascending
    std::optional<std::string> aborted;  // reason when the task stopped early
    std::vector<std::string> warnings;
};

/// Up to `limit` solution diagnostics, dominant category first, each as
/// "code message (line N): <source line>". Throws ContractViolation on a clean report.
std::string assemble_feedback(const CheckReport& report, std::string_view file_text, std::size_t limit = 5);

/// Replaces `span` of `file_text` with `code`, re-indented to the span's
/// first-line indentation. Returns the new text and the span the code occupies.
std::pair<std::string, LineSpan> splice_solution(std::string_view file_text, const LineSpan& span,
                                                 std::string_view code);

/// Runs the task's test command with `candidate_code` in place (file restored
/// afterwards). Empty result means the tests passed; otherwise one FUNC diagnostic.
std::vector<Diagnostic> run_task_tests(const std::string& candidate_code, const GenerationTask& task,
                                       const ProjectDatabase& db, std::chrono::milliseconds timeout);

/// Generate, check, retrieve, regenerate until every candidate is clean or
/// max_iterations iterations have run.
RepairResult repair(const GenerationTask& task, const ProjectDatabase& db, Backends backends,
                    const GenerationConfig& generation, const LoopConfig& config);

/// Per-task summary consumed by the evaluation harness.
nlohmann::ordered_json result_summary(const RepairResult& result);

} // namespace ctxfix
