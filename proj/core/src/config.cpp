#include "ctxfix/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

namespace ctxfix {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

using Handler = std::function<void(const json&)>;

void dispatch(const json& obj, const std::string& where, const std::map<std::string, Handler>& handlers) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& [key, value] : obj.items()) {
        auto it = handlers.find(key);
        if (it == handlers.end()) {
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
        }
        try {
            it->second(value);
        } catch (const json::exception& ex) {
            throw ConfigError("bad value for '" + (where.empty() ? key : where + "." + key) + "': " + ex.what());
        }
    }
}

template <typename T>
Handler set(T& target) {
    return [&target](const json& v) { target = v.get<T>(); };
}

Handler set_seconds(std::chrono::milliseconds& target) {
    return [&target](const json& v) {
        double s = v.get<double>();
        if (s <= 0) throw ConfigError("timeouts must be positive");
        target = std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
    };
}

} // namespace

RunConfig apply_config_json(RunConfig c, const json& doc) {
    auto& g = c.generation;
    auto& l = c.loop;
    auto& b = c.backend;
    auto& e = c.embedder;
    std::map<std::string, Handler> generation = {
        {"temperature", set(g.temperature)},
        {"top_k", [&](const json& v) { g.top_k = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>()); }},
        {"max_new_tokens", set(g.max_new_tokens)},
        {"prompt_char_budget", set(g.prompt_char_budget)},
        {"model", set(g.model)},
    };
    std::map<std::string, Handler> loop = {
        {"max_iterations", set(l.max_iterations)},
        {"n_candidates", set(l.n_candidates)},
        {"retrieval_n", set(l.retrieval_n)},
        {"checker",
         [&](const json& v) {
             auto s = v.get<std::string>();
             if (s == "builtin") l.checker = CheckerChoice::Builtin;
             else if (s == "external") l.checker = CheckerChoice::External;
             else throw ConfigError("loop.checker must be 'builtin' or 'external'");
         }},
        {"analyzer", set(l.external.analyzer)},
        {"analyzer_args", set(l.external.extra_args)},
        {"checker_timeout_seconds", set_seconds(l.external.timeout)},
        {"fallback_to_builtin", set(l.fallback_to_builtin)},
        {"snippet_line_budget", set(l.snippet_line_budget)},
        {"feedback_limit", set(l.feedback_limit)},
        {"test_timeout_seconds", set_seconds(l.test_timeout)},
        {"run_tests", set(l.run_tests)},
    };
    std::map<std::string, Handler> backend = {
        {"kind", set(b.kind)},
        {"transcript", set(b.transcript)},
        {"url", set(b.remote.url)},
        {"model", set(b.remote.model)},
        {"api_key_env", set(b.remote.api_key_env)},
        {"timeout_seconds", set(b.remote.timeout_seconds)},
        {"max_attempts", set(b.remote.max_attempts)},
        {"initial_backoff_ms", set(b.remote.initial_backoff_ms)},
    };
    std::map<std::string, Handler> embedder = {
        {"kind", set(e.kind)},
        {"dim", set(e.dim)},
        {"seed", set(e.seed)},
        {"url", set(e.remote.url)},
        {"model", set(e.remote.model)},
        {"api_key_env", set(e.remote.api_key_env)},
        {"batch_size", set(e.remote.batch_size)},
        {"timeout_seconds", set(e.remote.timeout_seconds)},
    };
    std::map<std::string, Handler> top = {
        {"project_root", set(c.project_root)},
        {"database", set(c.database)},
        {"tasks", set(c.tasks)},
        {"output_dir", set(c.output_dir)},
        {"extensions", set(c.extensions)},
        {"jobs", set(c.jobs)},
        {"generation", [&](const json& v) { dispatch(v, "generation", generation); }},
        {"loop", [&](const json& v) { dispatch(v, "loop", loop); }},
        {"backend", [&](const json& v) { dispatch(v, "backend", backend); }},
        {"embedder", [&](const json& v) { dispatch(v, "embedder", embedder); }},
    };
    dispatch(doc, "", top);
    if (b.kind != "mock" && b.kind != "remote") throw ConfigError("backend.kind must be 'mock' or 'remote'");
    if (e.kind != "local" && e.kind != "remote") throw ConfigError("embedder.kind must be 'local' or 'remote'");
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    e.remote.dim = e.dim;
    return c;
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);  // comments allowed
    } catch (const json::parse_error& ex) {
        throw ConfigError("config " + path.string() + " is not JSON: " + ex.what());
    }
    return apply_config_json(std::move(base), doc);
}

void apply_environment(RunConfig& config) {
    if (const char* analyzer = std::getenv(kAnalyzerEnv); analyzer && *analyzer) {
        config.loop.external.analyzer = analyzer;
    }
}

ojson to_json(const RunConfig& c) {
    ojson j;
    j["project_root"] = c.project_root;
    j["database"] = c.database;
    j["tasks"] = c.tasks;
    j["output_dir"] = c.output_dir;
    j["extensions"] = c.extensions;
    j["jobs"] = c.jobs;
    j["generation"] = to_json(c.generation);
    j["generation"].erase("n_samples");
    j["loop"] = to_json(c.loop);
    ojson b;
    b["kind"] = c.backend.kind;
    if (c.backend.kind == "mock") {
        b["transcript"] = c.backend.transcript;
    } else {
        b["url"] = c.backend.remote.url;
        b["model"] = c.backend.remote.model;
        b["api_key_env"] = c.backend.remote.api_key_env;
        b["timeout_seconds"] = c.backend.remote.timeout_seconds;
        b["max_attempts"] = c.backend.remote.max_attempts;
        b["initial_backoff_ms"] = c.backend.remote.initial_backoff_ms;
    }
    j["backend"] = std::move(b);
    ojson e;
    e["kind"] = c.embedder.kind;
    e["dim"] = c.embedder.dim;
    if (c.embedder.kind == "local") {
        e["seed"] = c.embedder.seed;
    } else {
        e["url"] = c.embedder.remote.url;
        e["model"] = c.embedder.remote.model;
        e["api_key_env"] = c.embedder.remote.api_key_env;
        e["batch_size"] = c.embedder.remote.batch_size;
    }
    j["embedder"] = std::move(e);
    return j;
}

void check_secrets(const RunConfig& config) {
    auto require = [](const std::string& env, const std::string& what) {
        const char* v = std::getenv(env.c_str());
        if (!v || !*v) {
            throw ConfigError(what + " requires the environment variable " + env);
        }
    };
    if (config.backend.kind == "remote") require(config.backend.remote.api_key_env, "remote completion backend");
    if (config.embedder.kind == "remote") require(config.embedder.remote.api_key_env, "remote embedder");
}

std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config) {
    if (config.kind == "mock") {
        if (config.transcript.empty()) {
            throw ConfigError("mock backend needs a transcript path");
        }
        return std::make_unique<MockBackend>(read_transcript(config.transcript));
    }
    if (config.kind == "remote") {
        return std::make_unique<RemoteChatBackend>(config.remote);
    }
    throw ConfigError("unknown backend kind '" + config.kind + "'");
}

std::unique_ptr<TextEncoder> make_encoder(const EmbedderConfig& config) {
    if (config.kind == "local") {
        return std::make_unique<LocalHashEncoder>(config.dim, config.seed);
    }
    if (config.kind == "remote") {
        RemoteEncoderOptions opts = config.remote;
        opts.dim = config.dim;
        return std::make_unique<RemoteEncoder>(std::move(opts));
    }
    throw ConfigError("unknown embedder kind '" + config.kind + "'");
}

} // namespace ctxfix
