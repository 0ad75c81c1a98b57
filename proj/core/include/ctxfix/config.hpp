#pragma once

#include "ctxfix/llm_gateway.hpp"
#include "ctxfix/refine_loop.hpp"
#include "ctxfix/semantic_retrieval.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ctxfix {

inline constexpr const char* kCompletionKeyEnv = "CTXFIX_COMPLETION_API_KEY";
inline constexpr const char* kEmbeddingKeyEnv = "CTXFIX_EMBEDDING_API_KEY";
inline constexpr const char* kAnalyzerEnv = "CTXFIX_ANALYZER";

struct BackendConfig {
    std::string kind = "mock";  // "mock" | "remote"
    std::string transcript;     // mock
    RemoteChatOptions remote;
};

struct EmbedderConfig {
    std::string kind = "local";  // "local" | "remote"
    std::size_t dim = LocalHashEncoder::kDefaultDim;
    std::uint64_t seed = LocalHashEncoder::kDefaultSeed;
    RemoteEncoderOptions remote;
};

struct RunConfig {
    std::string project_root;
    std::string database;
    std::vector<std::string> tasks;
    std::string output_dir;
    std::vector<std::string> extensions = {".py"};
    GenerationConfig generation;
    LoopConfig loop;
    BackendConfig backend;
    EmbedderConfig embedder;
    int jobs = 1;
};

/// Applies a JSON document on top of `base`. Unknown keys raise ConfigError.
RunConfig apply_config_json(RunConfig base, const nlohmann::json& doc);
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

/// The CTXFIX_ANALYZER override, when set.
void apply_environment(RunConfig& config);

/// Every effective value, for run summaries.
nlohmann::ordered_json to_json(const RunConfig& config);

/// Fails early (ConfigError) when a remote component lacks its key.
void check_secrets(const RunConfig& config);

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config);
std::unique_ptr<TextEncoder> make_encoder(const EmbedderConfig& config);

} // namespace ctxfix
