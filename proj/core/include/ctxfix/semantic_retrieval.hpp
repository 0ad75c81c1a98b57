#pragma once

#include "ctxfix/errors.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix {

struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dim() const noexcept { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Maps passages to fixed-length vectors. Implementations must be safe for
/// concurrent encode() calls.
class TextEncoder {
public:
    virtual ~TextEncoder() = default;

    virtual EmbeddingVector encode(std::string_view text) const = 0;

    /// Results are position-stable with `texts`.
    virtual std::vector<EmbeddingVector> encode_batch(std::span<const std::string> texts) const;

    virtual std::size_t dim() const = 0;

    /// Parameters recorded in the database header so queries re-create the same encoder.
    virtual nlohmann::ordered_json describe() const = 0;
};

/// Offline embedder: signed feature hashing of lower-cased word and sub-word
/// tokens, L2-normalized. Deterministic for a given (dim, seed).
class LocalHashEncoder final : public TextEncoder {
public:
    static constexpr std::size_t kDefaultDim = 1536;
    static constexpr std::uint64_t kDefaultSeed = 0x5eed'c0de'2024ULL;

    explicit LocalHashEncoder(std::size_t dim = kDefaultDim, std::uint64_t seed = kDefaultSeed);

    EmbeddingVector encode(std::string_view text) const override;
    std::size_t dim() const override { return dim_; }
    nlohmann::ordered_json describe() const override;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Tokens the local embedder counts: alphanumeric runs, lower-cased, plus the
/// snake_case / camelCase pieces of any compound identifier.
std::vector<std::string> embedding_tokens(std::string_view text);

struct RemoteEncoderOptions {
    std::string url = "https://api.openai.com/v1/embeddings";
    std::string model = "text-embedding-ada-002";
    std::string api_key_env = "CTXFIX_EMBEDDING_API_KEY";
    std::size_t dim = 1536;
    std::size_t batch_size = 64;
    int timeout_seconds = 60;
};

/// HTTP embedding service: POST {model, input: [texts]} -> {data: [{embedding}]}.
class RemoteEncoder final : public TextEncoder {
public:
    explicit RemoteEncoder(RemoteEncoderOptions options);

    EmbeddingVector encode(std::string_view text) const override;
    std::vector<EmbeddingVector> encode_batch(std::span<const std::string> texts) const override;
    std::size_t dim() const override { return options_.dim; }
    nlohmann::ordered_json describe() const override;

private:
    RemoteEncoderOptions options_;
    std::string api_key_;
};

/// Builds an encoder from a describe() record. Unknown kinds raise ConfigError.
std::unique_ptr<TextEncoder> make_encoder(const nlohmann::ordered_json& description);

/// Cosine similarity in double precision; 0 when either vector has zero norm.
/// Throws ContractViolation on dimension mismatch.
double cosine(std::span<const float> a, std::span<const float> b);
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine(std::span<const float>(a.values), std::span<const float>(b.values));
}

struct IndexRow {
    std::size_t entry_id = 0;
    EmbeddingVector vector;
    std::string passage;
};

/// Exhaustive-scan vector store. Immutable once handed to readers.
class EmbeddingIndex {
public:
    EmbeddingIndex() = default;
    explicit EmbeddingIndex(std::size_t dim) : dim_(dim) {}

    /// Rejects duplicate ids, non-finite values, and dimension changes.
    void add(IndexRow row);

    const std::vector<IndexRow>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    std::size_t dim() const noexcept { return dim_; }

private:
    std::size_t dim_ = 0;
    std::vector<IndexRow> rows_;
    std::vector<std::size_t> sorted_ids_;
};

enum class RetrievalMode { Initial, Subsequent };

struct RetrievalQuery {
    std::string text;
    RetrievalMode mode = RetrievalMode::Initial;
};

struct ScoredEntry {
    std::size_t entry_id = 0;
    double score = 0.0;

    friend bool operator==(const ScoredEntry&, const ScoredEntry&) = default;
};

/// The n rows most similar to `query`, by descending score then ascending id.
std::vector<ScoredEntry> top_n(const EmbeddingVector& query, const EmbeddingIndex& index, std::size_t n);
std::vector<ScoredEntry> top_n(const RetrievalQuery& query, const EmbeddingIndex& index,
                               const TextEncoder& encoder, std::size_t n);

} // namespace ctxfix
