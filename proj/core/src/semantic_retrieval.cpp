#include "ctxfix/semantic_retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

namespace ctxfix {

namespace {

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // splitmix finalizer spreads low-entropy FNV states across all bits
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

// Splits identifiers such as get_handler / AsyncBolt3 / HTTPServer.
std::vector<std::string> sub_words(std::string_view word) {
    std::vector<std::string> parts;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            parts.push_back(lower(cur));
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < word.size(); ++i) {
        char c = word[i];
        if (c == '_') {
            flush();
            continue;
        }
        bool upper = std::isupper(static_cast<unsigned char>(c)) != 0;
        if (upper && !cur.empty()) {
            char prev = cur.back();
            bool prev_lower = std::islower(static_cast<unsigned char>(prev)) || std::isdigit(static_cast<unsigned char>(prev));
            bool next_lower = i + 1 < word.size() && std::islower(static_cast<unsigned char>(word[i + 1]));
            if (prev_lower || (std::isupper(static_cast<unsigned char>(prev)) && next_lower)) {
                flush();
            }
        }
        cur.push_back(c);
    }
    flush();
    return parts;
}

} // namespace

std::vector<std::string> embedding_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        if (!(std::isalnum(c) || c == '_')) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
            ++j;
        }
        std::string_view word = text.substr(i, j - i);
        std::string whole = lower(word);
        auto parts = sub_words(word);
        std::string trimmed = whole;
        trimmed.erase(std::remove(trimmed.begin(), trimmed.end(), '_'), trimmed.end());
        if (!trimmed.empty()) {
            tokens.push_back(whole);
        }
        if (parts.size() > 1) {
            for (auto& p : parts) {
                tokens.push_back(std::move(p));
            }
        }
        i = j;
    }
    return tokens;
}

std::vector<EmbeddingVector> TextEncoder::encode_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(encode(t));
    }
    return out;
}

LocalHashEncoder::LocalHashEncoder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim == 0) {
        throw ContractViolation("embedding dimension must be positive");
    }
}

EmbeddingVector LocalHashEncoder::encode(std::string_view text) const {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw ContractViolation("encode() requires nonempty text");
    }
    std::vector<double> acc(dim_, 0.0);
    for (const auto& tok : embedding_tokens(text)) {
        std::uint64_t h = fnv1a(tok, seed_);
        std::size_t bucket = static_cast<std::size_t>(h % dim_);
        double sign = (h >> 63) ? -1.0 : 1.0;
        acc[bucket] += sign;
    }
    double norm = 0.0;
    for (double v : acc) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    EmbeddingVector out;
    out.values.resize(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        out.values[i] = norm > 0.0 ? static_cast<float>(acc[i] / norm) : 0.0F;
    }
    return out;
}

nlohmann::ordered_json LocalHashEncoder::describe() const {
    nlohmann::ordered_json j;
    j["kind"] = "local";
    j["dim"] = dim_;
    j["seed"] = seed_;
    return j;
}

std::unique_ptr<TextEncoder> make_encoder(const nlohmann::ordered_json& description) {
    std::string kind = description.value("kind", "local");
    if (kind == "local") {
        return std::make_unique<LocalHashEncoder>(
            description.value("dim", LocalHashEncoder::kDefaultDim),
            description.value("seed", LocalHashEncoder::kDefaultSeed));
    }
    if (kind == "remote") {
        RemoteEncoderOptions opts;
        opts.url = description.value("url", opts.url);
        opts.model = description.value("model", opts.model);
        opts.api_key_env = description.value("api_key_env", opts.api_key_env);
        opts.dim = description.value("dim", opts.dim);
        return std::make_unique<RemoteEncoder>(std::move(opts));
    }
    throw ConfigError("unknown embedder kind '" + kind + "'");
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw ContractViolation("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i];
        double y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

void EmbeddingIndex::add(IndexRow row) {
    if (rows_.empty() && dim_ == 0) {
        dim_ = row.vector.dim();
    }
    if (row.vector.dim() != dim_) {
        throw ContractViolation("embedding index: vector dimension " + std::to_string(row.vector.dim()) +
                                " does not match index dimension " + std::to_string(dim_));
    }
    for (float v : row.vector.values) {
        if (!std::isfinite(v)) {
            throw ContractViolation("embedding index: non-finite vector for entry " +
                                    std::to_string(row.entry_id));
        }
    }
    auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), row.entry_id);
    if (it != sorted_ids_.end() && *it == row.entry_id) {
        throw ContractViolation("embedding index: duplicate entry id " + std::to_string(row.entry_id));
    }
    sorted_ids_.insert(it, row.entry_id);
    rows_.push_back(std::move(row));
}

std::vector<ScoredEntry> top_n(const EmbeddingVector& query, const EmbeddingIndex& index, std::size_t n) {
    if (n == 0) {
        throw ContractViolation("top_n requires n >= 1");
    }
    std::vector<ScoredEntry> scored;
    scored.reserve(index.size());
    for (const auto& row : index.rows()) {
        scored.push_back({row.entry_id, cosine(query, row.vector)});
    }
    auto better = [](const ScoredEntry& a, const ScoredEntry& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.entry_id < b.entry_id;
    };
    std::size_t keep = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep), scored.end(), better);
    scored.resize(keep);
    return scored;
}

std::vector<ScoredEntry> top_n(const RetrievalQuery& query, const EmbeddingIndex& index,
                               const TextEncoder& encoder, std::size_t n) {
    if (query.text.empty()) {
        throw ContractViolation("retrieval query text must be nonempty");
    }
    if (index.empty()) {
        return {};
    }
    return top_n(encoder.encode(query.text), index, n);
}

} // namespace ctxfix
