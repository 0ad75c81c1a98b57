#include "ctxfix/llm_gateway.hpp"
#include "ctxfix/semantic_retrieval.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ctxfix {

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("URL must include a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string read_key(const std::string& env) {
    const char* value = std::getenv(env.c_str());
    if (!value || !*value) {
        throw ConfigError("environment variable " + env + " is not set");
    }
    return value;
}

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

// POSTs JSON, retrying transient failures with exponential backoff.
// `fail` builds the exception thrown once retries are exhausted.
template <typename Fail>
nlohmann::json post_json(const std::string& url, const std::string& api_key, const nlohmann::json& body,
                         int timeout_seconds, int attempts, int backoff_ms, Fail fail) {
    Endpoint ep = split_url(url);
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms << (attempt - 1)));
        }
        httplib::Client client(ep.origin);
        client.set_connection_timeout(timeout_seconds, 0);
        client.set_read_timeout(timeout_seconds, 0);
        client.set_write_timeout(timeout_seconds, 0);
        httplib::Headers headers = {{"Authorization", "Bearer " + api_key}};
        auto res = client.Post(ep.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& ex) {
                throw fail(std::string("response is not JSON: ") + ex.what());
            }
        }
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
        if (!transient_status(res->status)) {
            break;
        }
    }
    throw fail(last_error);
}

} // namespace

RemoteEncoder::RemoteEncoder(RemoteEncoderOptions options)
    : options_(std::move(options)), api_key_(read_key(options_.api_key_env)) {
    if (options_.batch_size == 0) {
        throw ConfigError("embedding batch size must be positive");
    }
}

EmbeddingVector RemoteEncoder::encode(std::string_view text) const {
    std::string t(text);
    return encode_batch(std::span<const std::string>(&t, 1)).front();
}

std::vector<EmbeddingVector> RemoteEncoder::encode_batch(std::span<const std::string> texts) const {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    auto fail = [](const std::string& msg) { return EncoderUnavailable("embedding service: " + msg); };
    for (std::size_t start = 0; start < texts.size(); start += options_.batch_size) {
        std::size_t end = std::min(texts.size(), start + options_.batch_size);
        nlohmann::json body;
        body["model"] = options_.model;
        body["input"] = nlohmann::json::array();
        for (std::size_t i = start; i < end; ++i) {
            if (texts[i].empty()) {
                throw ContractViolation("cannot encode empty text");
            }
            body["input"].push_back(texts[i]);
        }
        nlohmann::json res = post_json(options_.url, api_key_, body, options_.timeout_seconds, 3, 500, fail);
        try {
            const auto& data = res.at("data");
            if (data.size() != end - start) {
                throw fail("expected " + std::to_string(end - start) + " embeddings, got " +
                           std::to_string(data.size()));
            }
            std::vector<EmbeddingVector> batch(data.size());
            for (std::size_t i = 0; i < data.size(); ++i) {
                // The service may reorder; "index" restores input order.
                std::size_t idx = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
                if (idx >= batch.size()) {
                    throw fail("embedding index out of range");
                }
                batch[idx].values = data[i].at("embedding").get<std::vector<float>>();
                if (batch[idx].values.size() != options_.dim) {
                    throw fail("embedding has dimension " + std::to_string(batch[idx].values.size()) + ", expected " +
                               std::to_string(options_.dim));
                }
            }
            for (auto& v : batch) out.push_back(std::move(v));
        } catch (const nlohmann::json::exception& ex) {
            throw fail(std::string("unexpected response shape: ") + ex.what());
        }
    }
    return out;
}

nlohmann::ordered_json RemoteEncoder::describe() const {
    nlohmann::ordered_json j;
    j["kind"] = "remote";
    j["url"] = options_.url;
    j["model"] = options_.model;
    j["dim"] = options_.dim;
    j["api_key_env"] = options_.api_key_env;
    return j;
}

RemoteChatBackend::RemoteChatBackend(RemoteChatOptions options)
    : options_(std::move(options)), api_key_(read_key(options_.api_key_env)) {
    if (options_.max_attempts < 1) {
        throw ConfigError("max_attempts must be >= 1");
    }
}

std::vector<std::string> RemoteChatBackend::do_complete(const PromptBundle& prompt, const GenerationConfig& config,
                                                        const RequestContext& request) {
    (void)request;
    nlohmann::json body;
    body["model"] = config.model.empty() ? options_.model : config.model;
    body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt.rendered}}});
    body["temperature"] = config.temperature;
    body["n"] = config.n_samples;
    body["max_tokens"] = config.max_new_tokens;
    if (config.top_k) {
        body["top_k"] = *config.top_k;
    }
    auto fail = [](const std::string& msg) { return BackendUnavailable("completion service: " + msg); };
    nlohmann::json res = post_json(options_.url, api_key_, body, options_.timeout_seconds, options_.max_attempts,
                                   options_.initial_backoff_ms, fail);
    std::vector<std::string> out;
    try {
        for (const auto& choice : res.at("choices")) {
            const auto& content = choice.at("message").at("content");
            out.push_back(content.is_null() ? std::string() : content.get<std::string>());
        }
    } catch (const nlohmann::json::exception& ex) {
        throw fail(std::string("unexpected response shape: ") + ex.what());
    }
    if (out.empty()) {
        throw fail("response has no choices");
    }
    return out;
}

} // namespace ctxfix
