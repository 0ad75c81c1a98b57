#include "ctxfix/llm_gateway.hpp"

#include "ctxfix/digest.hpp"

#include <algorithm>
#include <fstream>

namespace ctxfix {

void GenerationConfig::validate() const {
    if (!(temperature >= 0.0)) {
        throw ContractViolation("temperature must be >= 0");
    }
    if (n_samples < 1) {
        throw ContractViolation("n_samples must be >= 1");
    }
    if (top_k && *top_k < 1) {
        throw ContractViolation("top_k must be >= 1");
    }
}

nlohmann::ordered_json to_json(const GenerationConfig& config) {
    nlohmann::ordered_json j;
    j["temperature"] = config.temperature;
    j["top_k"] = config.top_k ? nlohmann::ordered_json(*config.top_k) : nlohmann::ordered_json(nullptr);
    j["n_samples"] = config.n_samples;
    j["max_new_tokens"] = config.max_new_tokens;
    j["prompt_char_budget"] = config.prompt_char_budget;
    j["model"] = config.model;
    return j;
}

std::string_view to_string(PromptKind kind) {
    return kind == PromptKind::Generation ? "generation" : "query_synthesis";
}

std::string render_segments(const std::vector<PromptSegment>& segments) {
    std::string out;
    for (const auto& s : segments) {
        if (!out.empty()) {
            out += "\n\n";
        }
        out += "### ";
        out += s.label;
        out += '\n';
        out += s.text;
    }
    return out;
}

namespace {

// Keeps at most `n` bytes without splitting a UTF-8 sequence.
std::string utf8_prefix(std::string_view text, std::size_t n) {
    if (n >= text.size()) {
        return std::string(text);
    }
    while (n > 0 && (static_cast<unsigned char>(text[n]) & 0xC0) == 0x80) {
        --n;
    }
    return std::string(text.substr(0, n));
}

bool is_context_label(const std::string& label) { return label.rfind("Context", 0) == 0; }

// Shrinks segment `idx` so the bundle loses at least `overflow` bytes, leaving
// a marker line. Returns false when the segment is too small to keep.
bool shrink_segment(PromptSegment& seg, std::size_t overflow) {
    std::string body = seg.text;
    std::string suffix = "\n" + std::string(kTruncationMarker);
    if (body.size() >= suffix.size() && body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
        body.resize(body.size() - suffix.size());
    }
    std::size_t removed_marker = seg.text.size() - body.size();
    std::size_t need = overflow + suffix.size();
    need = need > removed_marker ? need - removed_marker : 0;
    if (body.size() <= need) {
        return false;
    }
    seg.text = utf8_prefix(body, body.size() - need) + suffix;
    return true;
}

std::string trim_code(std::string_view text) {
    // Drop leading blank lines and trailing whitespace; keep first-line indentation.
    std::size_t start = 0;
    while (true) {
        std::size_t nl = text.find('\n', start);
        std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
        bool blank = std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
        if (!blank || nl == std::string_view::npos) {
            if (blank) {
                start = text.size();
            }
            break;
        }
        start = nl + 1;
    }
    std::string_view rest = text.substr(start);
    std::size_t end = rest.find_last_not_of(" \t\r\n");
    return end == std::string_view::npos ? std::string() : std::string(rest.substr(0, end + 1));
}

bool is_language_tag(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '#' || c == '.' ||
               c == '-';
    });
}

} // namespace

PromptBundle render_generation_prompt(std::string_view requirement, const std::vector<ContextSnippet>& contexts,
                                      const std::optional<std::string>& prior_solution,
                                      const std::optional<std::string>& feedback, std::size_t budget) {
    if (requirement.empty()) {
        throw ContractViolation("task requirement is empty");
    }
    PromptBundle bundle;
    bundle.kind = PromptKind::Generation;
    bundle.segments.push_back({"Requirement", std::string(requirement)});
    if (render_segments(bundle.segments).size() > budget) {
        throw BudgetExceeded("prompt budget of " + std::to_string(budget) +
                             " characters cannot hold the task requirement");
    }

    std::vector<const ContextSnippet*> ordered;
    for (auto origin : {SnippetOrigin::Structural, SnippetOrigin::Semantic}) {
        for (const auto& c : contexts) {
            if (c.origin != origin) continue;
            bool seen = std::any_of(ordered.begin(), ordered.end(),
                                    [&](const ContextSnippet* o) { return o->entry_id == c.entry_id; });
            if (!seen) ordered.push_back(&c);
        }
    }
    std::size_t number = 0;
    for (const auto* c : ordered) {
        ++number;
        std::string label = "Context " + std::to_string(number) +
                            (c->origin == SnippetOrigin::Structural ? " (structural)" : " (semantic)");
        bundle.segments.push_back({std::move(label), c->text});
    }
    if (prior_solution) {
        bundle.segments.push_back({"Previous solution", *prior_solution});
    }
    if (feedback) {
        bundle.segments.push_back({"Compiler feedback", *feedback});
    }

    // Cut context from the back, then feedback, then the previous solution.
    while (true) {
        std::size_t size = render_segments(bundle.segments).size();
        if (size <= budget) break;
        std::size_t overflow = size - budget;
        auto last_ctx = std::find_if(bundle.segments.rbegin(), bundle.segments.rend(),
                                     [](const PromptSegment& s) { return is_context_label(s.label); });
        if (last_ctx != bundle.segments.rend()) {
            if (!shrink_segment(*last_ctx, overflow)) {
                bundle.segments.erase(std::next(last_ctx).base());
                auto prev = std::find_if(bundle.segments.rbegin(), bundle.segments.rend(),
                                         [](const PromptSegment& s) { return is_context_label(s.label); });
                std::string suffix = "\n" + std::string(kTruncationMarker);
                if (prev != bundle.segments.rend() &&
                    (prev->text.size() < suffix.size() ||
                     prev->text.compare(prev->text.size() - suffix.size(), suffix.size(), suffix) != 0)) {
                    prev->text += suffix;
                }
            }
            continue;
        }
        bool shrunk = false;
        for (std::string_view label : {"Compiler feedback", "Previous solution"}) {
            auto it = std::find_if(bundle.segments.begin(), bundle.segments.end(),
                                   [&](const PromptSegment& s) { return s.label == label; });
            if (it == bundle.segments.end()) continue;
            if (!shrink_segment(*it, overflow)) {
                bundle.segments.erase(it);
            }
            shrunk = true;
            break;
        }
        if (!shrunk) {
            // Only the requirement is left and it fits by the check above.
            break;
        }
    }
    bundle.rendered = render_segments(bundle.segments);
    return bundle;
}

const std::array<Demonstration, 4>& query_demonstrations() {
    static const std::array<Demonstration, 4> demos = {{
        {"Unable to import 'keys'",
         "from Module m, Variable v where m.inSource()  and v.getScope() = m  select m"},
        {"Instance of 'RootLogger' has no 'loggerDict' member",
         "from Module m, Class c, Function cf where m.inSource() and m.contains(c) and c.contains(cf) and "
         "cf.getScope() = c and c.getName = 'RootLogger' and not cf.isInitMethod() select m, c, cf"},
        {"No name 'AsyncBolt5x0' in module 'neo4j._sync.io._bolt5'",
         "from Module m, Variable v where m.inSource()  and v.getScope() = m  and m.getName() = "
         "'neo4j._sync.io._bolt5' select m, v.getDefinition()"},
        {"No value for argument 'xmls' in function call 'dumpXML'",
         "from Module m, Function f    where m.inSource()  and m.contains(f)    and f.getName() = 'dumpXML'  "
         "select m, f"},
    }};
    return demos;
}

PromptBundle render_query_prompt(const Diagnostic& diag) {
    if (diag.message.empty()) {
        throw ContractViolation("diagnostic message is empty");
    }
    PromptBundle bundle;
    bundle.kind = PromptKind::QuerySynthesis;
    bundle.segments.push_back(
        {"Instruction",
         "Translate the compiler error message into a structural query over the project database.\n"
         "Variables range over Module, Class, Function and Variable entries.\n"
         "Predicates: a.contains(b), v.getName() = 'name', v.getScope() = w, v.inSource(), "
         "f.isInitMethod(), each optionally negated with not, joined by and.\n"
         "Select variables, or v.getDefinition() for the defining source.\n"
         "Answer with the query only."});
    int k = 0;
    for (const auto& demo : query_demonstrations()) {
        ++k;
        bundle.segments.push_back({"Example " + std::to_string(k),
                                   "Error: " + std::string(demo.error_message) + "\nQuery: " + std::string(demo.query)});
    }
    bundle.segments.push_back({"Error", diag.message});
    bundle.rendered = render_segments(bundle.segments);
    return bundle;
}

std::string extract_code(std::string_view response) {
    std::string code;
    std::size_t open = response.find("```");
    if (open == std::string_view::npos) {
        code = trim_code(response);
    } else {
        std::size_t after = open + 3;
        std::size_t nl = response.find('\n', after);
        std::string_view first_line =
            response.substr(after, nl == std::string_view::npos ? response.size() - after : nl - after);
        std::size_t body_start;
        if (first_line.find("```") != std::string_view::npos) {
            body_start = after;  // inline ```code```
        } else if (is_language_tag(first_line)) {
            body_start = nl == std::string_view::npos ? response.size() : nl + 1;
        } else {
            body_start = after;
        }
        // Stacked openers ("```\n```python\n"): skip every bare fence line.
        while (body_start < response.size()) {
            std::size_t line_end = response.find('\n', body_start);
            std::string_view line = response.substr(
                body_start, line_end == std::string_view::npos ? response.size() - body_start : line_end - body_start);
            std::size_t lead = line.find_first_not_of(" \t");
            if (lead == std::string_view::npos || line.substr(lead, 3) != "```" || line_end == std::string_view::npos) {
                break;
            }
            std::string_view tag = line.substr(lead + 3);
            if (!tag.empty() && !is_language_tag(tag)) break;
            body_start = line_end + 1;
        }
        std::size_t close = response.find("```", body_start);
        std::string_view body = response.substr(
            body_start, close == std::string_view::npos ? response.size() - body_start : close - body_start);
        code = trim_code(body);
    }
    if (code.empty()) {
        throw EmptyCompletion("completion contains no code");
    }
    return code;
}

nlohmann::ordered_json to_json(const AuditRecord& record) {
    nlohmann::ordered_json j;
    j["task_id"] = record.task_id;
    j["ordinal"] = record.ordinal;
    j["kind"] = std::string(to_string(record.kind));
    j["prompt_digest"] = record.prompt_digest;
    j["prompt"] = record.prompt;
    j["config"] = record.config;
    j["responses"] = record.responses;
    return j;
}

AuditLog::AuditLog(const std::filesystem::path& jsonl_path) : path_(jsonl_path) {
    std::ofstream out(jsonl_path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open audit log " + jsonl_path.string());
    }
}

void AuditLog::append(AuditRecord record) {
    std::lock_guard lock(mutex_);
    if (path_) {
        std::ofstream out(*path_, std::ios::app);
        out << to_json(record).dump() << '\n';
        if (!out) {
            throw IoError("cannot append to audit log " + path_->string());
        }
    }
    records_.push_back(std::move(record));
}

std::vector<AuditRecord> AuditLog::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::vector<std::string> CompletionBackend::complete(const PromptBundle& prompt, const GenerationConfig& config,
                                                     const RequestContext& request) {
    config.validate();
    std::vector<std::string> responses = do_complete(prompt, config, request);
    if (audit_) {
        AuditRecord rec;
        rec.task_id = request.task_id;
        rec.ordinal = request.ordinal;
        rec.kind = prompt.kind;
        rec.prompt_digest = sha256_hex(prompt.rendered);
        rec.prompt = prompt.rendered;
        rec.config = to_json(config);
        rec.responses = responses;
        audit_->append(std::move(rec));
    }
    return responses;
}

MockBackend::MockBackend(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

std::vector<TranscriptEntry> parse_transcript(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw ConfigError("transcript must be a JSON array");
    }
    std::vector<TranscriptEntry> entries;
    for (const auto& item : j) {
        try {
            TranscriptEntry e;
            e.ordinal = item.at("ordinal").get<std::size_t>();
            if (item.contains("task_id") && !item["task_id"].is_null()) {
                e.task_id = item["task_id"].get<std::string>();
            }
            if (item.contains("expected_prompt_digest") && !item["expected_prompt_digest"].is_null()) {
                e.expected_prompt_digest = item["expected_prompt_digest"].get<std::string>();
            }
            e.responses = item.at("responses").get<std::vector<std::string>>();
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw ConfigError(std::string("malformed transcript entry: ") + ex.what());
        }
    }
    return entries;
}

std::vector<TranscriptEntry> read_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read transcript " + path.string());
    }
    try {
        return parse_transcript(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& ex) {
        throw ConfigError("transcript " + path.string() + " is not JSON: " + ex.what());
    }
}

std::vector<std::string> MockBackend::warnings() const {
    std::lock_guard lock(mutex_);
    return warnings_;
}

std::vector<std::string> MockBackend::do_complete(const PromptBundle& prompt, const GenerationConfig& config,
                                                  const RequestContext& request) {
    const TranscriptEntry* match = nullptr;
    for (const auto& e : entries_) {
        if (e.ordinal != request.ordinal) continue;
        if (e.task_id && *e.task_id == request.task_id) {
            match = &e;
            break;
        }
        if (!e.task_id && !match) {
            match = &e;
        }
    }
    if (!match || match->responses.empty()) {
        throw BackendUnavailable("transcript has no responses for task '" + request.task_id + "' request " +
                                 std::to_string(request.ordinal));
    }
    if (match->expected_prompt_digest) {
        std::string digest = sha256_hex(prompt.rendered);
        if (digest != *match->expected_prompt_digest) {
            std::lock_guard lock(mutex_);
            warnings_.push_back(request.task_id + "/" + std::to_string(request.ordinal) + ": expected prompt digest " +
                                *match->expected_prompt_digest + " got " + digest);
        }
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i) {
        out.push_back(match->responses[static_cast<std::size_t>(i) % match->responses.size()]);
    }
    return out;
}

} // namespace ctxfix
