#pragma once

#include "ctxfix/diagnostics.hpp"
#include "ctxfix/refine_loop.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix {

/// Unbiased pass@k, 1 - C(n-c, k) / C(n, k), in product form.
/// Requires 0 <= c <= n and 1 <= k <= n; throws ContractViolation otherwise.
double pass_at_k(int n, int c, int k);

/// Levenshtein distance over Unicode code points (invalid UTF-8 bytes count singly).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - lev(a, b) / max(|a|, |b|); 1 when both are empty.
double edit_similarity(std::string_view a, std::string_view b);

/// Strips trailing whitespace on every line and trailing blank lines.
std::string normalize_for_match(std::string_view text);

/// 1 iff the texts are equal after normalize_for_match.
int exact_match(std::string_view a, std::string_view b);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Identifier sets of both snippets; both empty gives 1/1/1.
PrecisionRecall identifier_f1(std::string_view pred, std::string_view gold);

/// category -> per-iteration counts of solution diagnostics (test failures
/// count as FUNC at the iteration that produced the tested code).
struct ErrorDistribution {
    int iterations = 0;
    std::map<ErrorCategory, std::vector<long>> counts;

    long at(ErrorCategory category, int iteration) const;
};

ErrorDistribution error_distribution(const std::vector<IterationTrace>& traces);

struct CandidateOutcome {
    std::size_t index = 0;
    int iterations_used = 0;
    std::optional<std::string> final_category;  // nullopt when passing
    bool passed = false;
    std::string code;
};

struct TaskResult {
    std::string task_id;
    int n = 0;
    int c = 0;
    std::vector<CandidateOutcome> candidates;
};

TaskResult task_result_from_json(const nlohmann::json& j);

struct MatchMetrics {
    double code_exact_match = 0.0;  // C-EM
    double code_edit_similarity = 0.0;  // C-ES
    double identifier_exact_match = 0.0;  // I-EM
    double identifier_f1 = 0.0;  // I-F1
    std::size_t tasks = 0;
};

struct EvalReport {
    std::vector<int> ks;
    std::map<int, double> pass_at_k;  // mean over tasks with n >= k
    std::map<int, std::size_t> tasks_counted;
    std::vector<TaskResult> tasks;
    ErrorDistribution distribution;
    std::optional<MatchMetrics> match;
};

/// Metrics over all tasks. `references` maps task id to gold code; the first
/// candidate of each task is compared against it.
EvalReport evaluate(const std::vector<TaskResult>& tasks, const std::vector<IterationTrace>& traces,
                    const std::vector<int>& ks, const std::map<std::string, std::string>& references = {});

struct ResultsDirectory {
    std::vector<TaskResult> tasks;
    std::vector<IterationTrace> traces;
};

/// Reads every *.result.json and *.traces.jsonl under `dir` (sorted by name).
ResultsDirectory load_results_directory(const std::filesystem::path& dir);

/// Reads <task_id>.py files from `dir`.
std::map<std::string, std::string> load_references(const std::filesystem::path& dir);

nlohmann::ordered_json to_json(const EvalReport& report);
std::string render_text(const EvalReport& report);
/// category,iteration,count rows.
std::string render_distribution_csv(const ErrorDistribution& distribution);

} // namespace ctxfix
