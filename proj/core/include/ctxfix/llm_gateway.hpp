#pragma once

#include "ctxfix/diagnostics.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix {

struct GenerationConfig {
    double temperature = 0.7;
    std::optional<int> top_k;  // top-k sampling; k left to the caller
    int n_samples = 1;
    int max_new_tokens = 1024;
    std::size_t prompt_char_budget = 12000;
    std::string model;

    /// Throws ContractViolation for temperature < 0 or n_samples < 1.
    void validate() const;
};

nlohmann::ordered_json to_json(const GenerationConfig& config);

enum class PromptKind { Generation, QuerySynthesis };
std::string_view to_string(PromptKind kind);

struct PromptSegment {
    std::string label;
    std::string text;

    friend bool operator==(const PromptSegment&, const PromptSegment&) = default;
};

struct PromptBundle {
    PromptKind kind = PromptKind::Generation;
    std::vector<PromptSegment> segments;
    std::string rendered;
};

/// Joins segments as "### label\ntext" blocks separated by blank lines.
std::string render_segments(const std::vector<PromptSegment>& segments);

enum class SnippetOrigin { Structural, Semantic };

struct ContextSnippet {
    std::size_t entry_id = 0;
    SnippetOrigin origin = SnippetOrigin::Semantic;
    std::string text;
};

inline constexpr std::string_view kTruncationMarker = "... [context truncated]";

/// Requirement, then context (structural before semantic, one snippet per
/// entry id), then prior solution and feedback when given. Snippets are cut
/// from the back to fit `budget`; throws BudgetExceeded when even the bare
/// requirement does not fit.
PromptBundle render_generation_prompt(std::string_view requirement, const std::vector<ContextSnippet>& contexts,
                                      const std::optional<std::string>& prior_solution,
                                      const std::optional<std::string>& feedback, std::size_t budget = 12000);

struct Demonstration {
    std::string_view error_message;
    std::string_view query;
};

/// The four error-message / query pairs shown to the model before a new error.
const std::array<Demonstration, 4>& query_demonstrations();

/// Instruction, the four demonstrations, then `diag.message` as the last segment.
PromptBundle render_query_prompt(const Diagnostic& diag);

/// First fenced block's body if there is one, else the trimmed response.
/// Throws EmptyCompletion when nothing is left.
std::string extract_code(std::string_view response);

/// Identifies a request for transcript keying and auditing.
struct RequestContext {
    std::string task_id;
    std::size_t ordinal = 0;  // per-task request counter
};

struct AuditRecord {
    std::string task_id;
    std::size_t ordinal = 0;
    PromptKind kind = PromptKind::Generation;
    std::string prompt_digest;
    std::string prompt;
    nlohmann::ordered_json config;
    std::vector<std::string> responses;
};

nlohmann::ordered_json to_json(const AuditRecord& record);

/// Append-only, thread-safe log of every completion call. Optionally mirrors
/// each record as a JSON line to a file.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(const std::filesystem::path& jsonl_path);

    void append(AuditRecord record);
    std::vector<AuditRecord> records() const;

private:
    mutable std::mutex mutex_;
    std::vector<AuditRecord> records_;
    std::optional<std::filesystem::path> path_;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;

    /// Returns config.n_samples responses. Every call is appended to the audit log.
    std::vector<std::string> complete(const PromptBundle& prompt, const GenerationConfig& config,
                                      const RequestContext& request);

    void set_audit_log(std::shared_ptr<AuditLog> log) { audit_ = std::move(log); }
    const std::shared_ptr<AuditLog>& audit_log() const noexcept { return audit_; }

protected:
    virtual std::vector<std::string> do_complete(const PromptBundle& prompt, const GenerationConfig& config,
                                                 const RequestContext& request) = 0;

private:
    std::shared_ptr<AuditLog> audit_;
};

struct TranscriptEntry {
    std::optional<std::string> task_id;  // absent: applies to every task
    std::size_t ordinal = 0;
    std::optional<std::string> expected_prompt_digest;
    std::vector<std::string> responses;
};

/// Parses a transcript: JSON list of {ordinal, task_id?, expected_prompt_digest?, responses[]}.
std::vector<TranscriptEntry> parse_transcript(const nlohmann::json& j);
std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path);

/// Replays transcript entries keyed by (task_id, ordinal).
/// Responses are repeated cyclically when more samples are requested than recorded.
class MockBackend final : public CompletionBackend {
public:
    explicit MockBackend(std::vector<TranscriptEntry> entries);

    /// Digest mismatches seen so far ("task/ordinal: expected X got Y").
    std::vector<std::string> warnings() const;

protected:
    std::vector<std::string> do_complete(const PromptBundle& prompt, const GenerationConfig& config,
                                         const RequestContext& request) override;

private:
    std::vector<TranscriptEntry> entries_;
    mutable std::mutex mutex_;
    std::vector<std::string> warnings_;
};

struct RemoteChatOptions {
    std::string url = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-3.5-turbo";
    std::string api_key_env = "CTXFIX_COMPLETION_API_KEY";
    int timeout_seconds = 120;
    int max_attempts = 3;
    int initial_backoff_ms = 500;
};

/// HTTP chat-completion client: POST {model, messages, temperature, n, ...}.
/// Transient failures (network, 429, 5xx) are retried with exponential backoff.
class RemoteChatBackend final : public CompletionBackend {
public:
    /// Throws ConfigError when the API key variable is unset.
    explicit RemoteChatBackend(RemoteChatOptions options);

protected:
    std::vector<std::string> do_complete(const PromptBundle& prompt, const GenerationConfig& config,
                                         const RequestContext& request) override;

private:
    RemoteChatOptions options_;
    std::string api_key_;
};

} // namespace ctxfix
