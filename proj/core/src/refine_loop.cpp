#include "ctxfix/refine_loop.hpp"

#include "ctxfix/digest.hpp"
#include "ctxfix/process.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace ctxfix {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON

GenerationTask task_from_json(const json& j) {
    static const std::vector<std::string> known = {"id",          "requirement",    "target_file",
                                                   "insertion_span", "signature_stub", "test_command"};
    if (!j.is_object()) {
        throw ConfigError("task must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown task key '" + key + "'");
        }
    }
    try {
        GenerationTask t;
        t.id = j.at("id").get<std::string>();
        t.requirement = j.at("requirement").get<std::string>();
        t.target_file = j.at("target_file").get<std::string>();
        const auto& span = j.at("insertion_span");
        if (!span.is_array() || span.size() != 2) {
            throw ConfigError("insertion_span must be [start, end]");
        }
        t.insertion_span = {span[0].get<int>(), span[1].get<int>()};
        if (j.contains("signature_stub") && !j["signature_stub"].is_null()) {
            t.signature_stub = j["signature_stub"].get<std::string>();
        }
        if (j.contains("test_command") && !j["test_command"].is_null()) {
            t.test_command = j["test_command"].get<std::string>();
        }
        if (t.id.empty() || t.requirement.empty() || t.target_file.empty()) {
            throw ConfigError("task id, requirement and target_file must be nonempty");
        }
        if (t.insertion_span.start < 1 || t.insertion_span.end < t.insertion_span.start) {
            throw ConfigError("task " + t.id + ": invalid insertion_span");
        }
        return t;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed task: ") + ex.what());
    }
}

GenerationTask load_task(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read task " + path.string());
    }
    try {
        return task_from_json(json::parse(in));
    } catch (const json::parse_error& ex) {
        throw ConfigError("task " + path.string() + " is not JSON: " + ex.what());
    }
}

ojson to_json(const GenerationTask& task) {
    ojson j;
    j["id"] = task.id;
    j["requirement"] = task.requirement;
    j["target_file"] = task.target_file;
    j["insertion_span"] = {task.insertion_span.start, task.insertion_span.end};
    j["signature_stub"] = task.signature_stub ? ojson(*task.signature_stub) : ojson(nullptr);
    j["test_command"] = task.test_command ? ojson(*task.test_command) : ojson(nullptr);
    return j;
}

void LoopConfig::validate() const {
    if (max_iterations < 1) throw ContractViolation("max_iterations must be >= 1");
    if (n_candidates < 1) throw ContractViolation("n_candidates must be >= 1");
    if (retrieval_n < 1) throw ContractViolation("retrieval_n must be >= 1");
}

ojson to_json(const LoopConfig& c) {
    ojson j;
    j["max_iterations"] = c.max_iterations;
    j["n_candidates"] = c.n_candidates;
    j["retrieval_n"] = c.retrieval_n;
    j["checker"] = c.checker == CheckerChoice::Builtin ? "builtin" : "external";
    j["analyzer"] = c.external.analyzer;
    j["analyzer_args"] = c.external.extra_args;
    j["checker_timeout_seconds"] = std::chrono::duration_cast<std::chrono::seconds>(c.external.timeout).count();
    j["fallback_to_builtin"] = c.fallback_to_builtin;
    j["snippet_line_budget"] = c.snippet_line_budget;
    j["feedback_limit"] = c.feedback_limit;
    j["test_timeout_seconds"] = std::chrono::duration_cast<std::chrono::seconds>(c.test_timeout).count();
    j["run_tests"] = c.run_tests;
    return j;
}

std::string_view to_string(CandidateStatus status) {
    switch (status) {
    case CandidateStatus::Clean: return "Clean";
    case CandidateStatus::Failing: return "Failing";
    case CandidateStatus::Exhausted: return "Exhausted";
    }
    return "Failing";
}

ojson to_json(const Diagnostic& d) {
    ojson j;
    j["code"] = d.code;
    j["message"] = d.message;
    j["file"] = d.file;
    j["line"] = d.line;
    j["column"] = d.column;
    j["symbol"] = d.symbol ? ojson(*d.symbol) : ojson(nullptr);
    j["category"] = std::string(to_string(d.category));
    j["subtype"] = d.subtype ? ojson(*d.subtype) : ojson(nullptr);
    return j;
}

Diagnostic diagnostic_from_json(const json& j) {
    try {
        Diagnostic d = make_diagnostic(j.at("code").get<std::string>(), j.at("message").get<std::string>(),
                                       j.value("file", std::string()), j.value("line", 1), j.value("column", 0));
        if (j.contains("symbol") && !j["symbol"].is_null()) {
            d.symbol = j["symbol"].get<std::string>();
        }
        if (j.contains("category")) {
            auto cat = error_category_from_string(j["category"].get<std::string>());
            if (!cat) throw ConfigError("unknown error category " + j["category"].dump());
            d.category = *cat;
        }
        if (j.contains("subtype")) {
            d.subtype = j["subtype"].is_null() ? std::nullopt : std::optional(j["subtype"].get<std::string>());
        }
        return d;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed diagnostic: ") + ex.what());
    }
}

namespace {

ojson diags_to_json(const std::vector<Diagnostic>& diags) {
    ojson arr = ojson::array();
    for (const auto& d : diags) arr.push_back(to_json(d));
    return arr;
}

std::vector<Diagnostic> diags_from_json(const json& j) {
    std::vector<Diagnostic> out;
    for (const auto& d : j) out.push_back(diagnostic_from_json(d));
    return out;
}

} // namespace

ojson to_json(const IterationTrace& t) {
    ojson j;
    j["task_id"] = t.task_id;
    j["candidate"] = t.candidate;
    j["iteration"] = t.iteration;
    j["prompt_digest"] = t.prompt_digest;
    ojson structural = ojson::array();
    for (const auto& s : t.structural) {
        ojson item;
        item["code"] = s.code;
        item["query_text"] = s.query_text;
        item["origin"] = s.origin;
        item["status"] = s.status;
        item["tuple_count"] = s.tuple_count;
        item["tuples"] = s.tuples;
        structural.push_back(std::move(item));
    }
    j["structural"] = std::move(structural);
    ojson semantic = ojson::array();
    for (const auto& s : t.semantic) {
        semantic.push_back({{"entry_id", s.entry_id}, {"score", s.score}});
    }
    j["semantic"] = std::move(semantic);
    j["diagnostics_before"] = diags_to_json(t.diagnostics_before);
    j["diagnostics_after"] = diags_to_json(t.diagnostics_after);
    j["code_digest"] = t.code_digest;
    j["test_diagnostics"] = diags_to_json(t.test_diagnostics);
    return j;
}

IterationTrace trace_from_json(const json& j) {
    try {
        IterationTrace t;
        t.task_id = j.at("task_id").get<std::string>();
        t.candidate = j.at("candidate").get<std::size_t>();
        t.iteration = j.at("iteration").get<int>();
        t.prompt_digest = j.value("prompt_digest", std::string());
        for (const auto& s : j.value("structural", json::array())) {
            StructuralTraceItem item;
            item.code = s.value("code", std::string());
            item.query_text = s.value("query_text", std::string());
            item.origin = s.value("origin", std::string());
            item.status = s.value("status", std::string());
            item.tuple_count = s.value("tuple_count", std::size_t{0});
            if (s.contains("tuples")) item.tuples = s["tuples"].get<std::vector<std::vector<EntryId>>>();
            t.structural.push_back(std::move(item));
        }
        for (const auto& s : j.value("semantic", json::array())) {
            t.semantic.push_back({s.at("entry_id").get<std::size_t>(), s.at("score").get<double>()});
        }
        t.diagnostics_before = diags_from_json(j.value("diagnostics_before", json::array()));
        t.diagnostics_after = diags_from_json(j.value("diagnostics_after", json::array()));
        t.code_digest = j.value("code_digest", std::string());
        t.test_diagnostics = diags_from_json(j.value("test_diagnostics", json::array()));
        return t;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed trace: ") + ex.what());
    }
}

// ---------------------------------------------------------------------------
// Text helpers

namespace {

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

std::string leading_ws(std::string_view line) {
    std::size_t n = line.find_first_not_of(" \t");
    return std::string(line.substr(0, n == std::string_view::npos ? 0 : n));
}

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

std::mutex& path_mutex(const fs::path& path) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard lock(registry_mutex);
    auto& slot = registry[fs::absolute(path).lexically_normal().string()];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

// Holds the file lock, swaps in new content, restores the original on exit.
class InPlaceEdit {
public:
    InPlaceEdit(const fs::path& path, std::string_view content)
        : lock_(path_mutex(path)), path_(path), original_(read_file(path)) {
        write_file(path_, content);
    }
    InPlaceEdit(const InPlaceEdit&) = delete;
    InPlaceEdit& operator=(const InPlaceEdit&) = delete;
    ~InPlaceEdit() {
        try {
            write_file(path_, original_);
        } catch (...) {
        }
    }

private:
    std::lock_guard<std::mutex> lock_;
    fs::path path_;
    std::string original_;
};

fs::path target_path(const GenerationTask& task, const ProjectDatabase& db) {
    return fs::path(db.project_root()) / task.target_file;
}

} // namespace

std::pair<std::string, LineSpan> splice_solution(std::string_view file_text, const LineSpan& span,
                                                 std::string_view code) {
    std::vector<std::string> lines = split_lines(file_text);
    if (span.start < 1 || span.end < span.start || static_cast<std::size_t>(span.end) > lines.size()) {
        throw ContractViolation("insertion span " + std::to_string(span.start) + "-" + std::to_string(span.end) +
                                " is outside the file (" + std::to_string(lines.size()) + " lines)");
    }
    std::string indent = leading_ws(lines[static_cast<std::size_t>(span.start - 1)]);
    std::vector<std::string> code_lines = split_lines(code);
    if (code_lines.empty()) code_lines.emplace_back();
    std::size_t common = std::string::npos;
    for (const auto& l : code_lines) {
        if (!blank(l)) common = std::min(common, leading_ws(l).size());
    }
    if (common == std::string::npos) common = 0;
    std::vector<std::string> out(lines.begin(), lines.begin() + (span.start - 1));
    for (auto& l : code_lines) {
        out.push_back(blank(l) ? std::string() : indent + l.substr(common));
    }
    out.insert(out.end(), lines.begin() + span.end, lines.end());
    std::string text;
    for (const auto& l : out) {
        text += l;
        text += '\n';
    }
    LineSpan placed{span.start, span.start + static_cast<int>(code_lines.size()) - 1};
    return {std::move(text), placed};
}

std::string assemble_feedback(const CheckReport& report, std::string_view file_text, std::size_t limit) {
    if (report.clean || report.solution_diagnostics.empty()) {
        throw ContractViolation("assemble_feedback needs a report with solution diagnostics");
    }
    std::vector<Diagnostic> ordered = report.solution_diagnostics;
    ErrorCategory dominant = report.dominant_category.value_or(ErrorCategory::Other);
    std::stable_partition(ordered.begin(), ordered.end(),
                          [&](const Diagnostic& d) { return d.category == dominant; });
    std::vector<std::string> lines = split_lines(file_text);
    std::string out;
    for (std::size_t i = 0; i < ordered.size() && i < limit; ++i) {
        const Diagnostic& d = ordered[i];
        std::string src;
        if (d.line >= 1 && static_cast<std::size_t>(d.line) <= lines.size()) {
            src = lines[static_cast<std::size_t>(d.line - 1)];
            auto b = src.find_first_not_of(" \t");
            src = b == std::string::npos ? std::string() : src.substr(b);
        }
        if (!out.empty()) out += '\n';
        out += d.code + " " + d.message + " (line " + std::to_string(d.line) + "): " + src;
    }
    return out;
}

std::vector<Diagnostic> run_task_tests(const std::string& candidate_code, const GenerationTask& task,
                                       const ProjectDatabase& db, std::chrono::milliseconds timeout) {
    if (!task.test_command) {
        throw ContractViolation("task " + task.id + " has no test command");
    }
    fs::path file = target_path(task, db);
    auto [text, span] = splice_solution(read_file(file), task.insertion_span, candidate_code);
    ProcessResult res;
    {
        InPlaceEdit edit(file, text);
        ProcessOptions opts;
        opts.argv = {"/bin/sh", "-c", *task.test_command};
        opts.working_directory = db.project_root();
        opts.timeout = timeout;
        res = run_process(opts);
    }
    if (res.timed_out) {
        return {make_func_diagnostic("test command exceeded " + std::to_string(timeout.count()) + " ms",
                                     task.target_file, span.start, true)};
    }
    if (res.exit_code == 0) {
        return {};
    }
    std::string detail = res.stderr_text.empty() ? res.stdout_text : res.stderr_text;
    auto lines = split_lines(detail);
    std::string last;
    for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
        if (!blank(*it)) {
            last = *it;
            break;
        }
    }
    std::string what = res.term_signal ? "killed by signal " + std::to_string(res.term_signal)
                                       : "exit status " + std::to_string(res.exit_code);
    return {make_func_diagnostic("test command failed (" + what + ")" + (last.empty() ? "" : ": " + last),
                                 task.target_file, span.start, false)};
}

// ---------------------------------------------------------------------------
// The loop

namespace {

class TaskRun {
public:
    TaskRun(const GenerationTask& task, const ProjectDatabase& db, Backends backends, const GenerationConfig& gen,
            const LoopConfig& cfg)
        : task_(task), db_(db), backends_(backends), gen_(gen), cfg_(cfg) {}

    RepairResult run() {
        RepairResult result;
        result.task_id = task_.id;
        try {
            original_ = read_file(target_path(task_, db_));
            initial_iteration(result);
            for (int it = 1; it < cfg_.max_iterations; ++it) {
                for (auto& cand : result.candidates) {
                    if (cand.status == CandidateStatus::Failing) {
                        refine(cand, it, result);
                    }
                }
            }
            for (auto& cand : result.candidates) {
                if (cand.status == CandidateStatus::Failing) cand.status = CandidateStatus::Exhausted;
            }
            if (task_.test_command && cfg_.run_tests) {
                run_tests(result);
            }
        } catch (const BackendUnavailable& ex) {
            result.aborted = std::string("completion backend unavailable: ") + ex.what();
        } catch (const ToolUnavailable& ex) {
            result.aborted = std::string("checker unavailable: ") + ex.what();
        } catch (const IoError& ex) {
            result.aborted = ex.what();
        }
        std::stable_sort(result.traces.begin(), result.traces.end(),
                         [](const IterationTrace& a, const IterationTrace& b) {
                             return std::tie(a.candidate, a.iteration) < std::tie(b.candidate, b.iteration);
                         });
        result.warnings.insert(result.warnings.end(), warnings_.begin(), warnings_.end());
        return result;
    }

private:
    std::string requirement_text() const {
        std::string text = task_.requirement;
        if (task_.signature_stub) text += "\n\n" + *task_.signature_stub;
        return text;
    }

    RequestContext next_request() { return RequestContext{task_.id, ordinal_++}; }

    std::vector<ScoredEntry> semantic(const std::string& text, RetrievalMode mode,
                                      std::vector<ContextSnippet>& snippets) {
        if (text.empty() || db_.embedding_index().empty()) return {};
        std::vector<ScoredEntry> hits;
        try {
            hits = top_n(RetrievalQuery{text, mode}, db_.embedding_index(), backends_.encoder, cfg_.retrieval_n);
        } catch (const EncoderUnavailable& ex) {
            warn(std::string("semantic retrieval skipped: ") + ex.what());
            return {};
        }
        for (const auto& h : hits) {
            snippets.push_back({h.entry_id, SnippetOrigin::Semantic,
                                render_entry_snippet(db_, h.entry_id, false, cfg_.snippet_line_budget)});
        }
        return hits;
    }

    void warn(std::string message) {
        if (std::find(warnings_.begin(), warnings_.end(), message) == warnings_.end()) {
            warnings_.push_back(std::move(message));
        }
    }

    CheckReport check(const std::string& code) {
        if (code.empty()) {
            Diagnostic d = make_diagnostic("E0001", "Parsing failed: 'empty completion'", task_.target_file,
                                           task_.insertion_span.start, 0);
            return filter_to_solution({d}, {task_.insertion_span.start, task_.insertion_span.start});
        }
        auto [text, span] = splice_solution(original_, task_.insertion_span, code);
        std::vector<Diagnostic> diags;
        bool use_builtin = cfg_.checker == CheckerChoice::Builtin;
        if (!use_builtin) {
            try {
                fs::path file = target_path(task_, db_);
                InPlaceEdit edit(file, text);
                diags = run_external_checker(file, db_.project_root(), cfg_.external);
                for (auto& d : diags) d.file = task_.target_file;
                enrich_symbols(diags, text);
            } catch (const ToolUnavailable& ex) {
                if (!cfg_.fallback_to_builtin) throw;
                warn(std::string("external checker unavailable, using built-in checker: ") + ex.what());
                use_builtin = true;
            }
        }
        if (use_builtin) {
            diags = builtin_check(text, span, db_, task_.target_file);
        }
        return filter_to_solution(std::move(diags), span);
    }

    void initial_iteration(RepairResult& result) {
        std::vector<ContextSnippet> snippets;
        std::vector<ScoredEntry> hits = semantic(task_.requirement, RetrievalMode::Initial, snippets);
        PromptBundle prompt =
            render_generation_prompt(requirement_text(), snippets, std::nullopt, std::nullopt, gen_.prompt_char_budget);
        GenerationConfig cfg = gen_;
        cfg.n_samples = cfg_.n_candidates;
        std::vector<std::string> responses = backends_.completion.complete(prompt, cfg, next_request());
        if (responses.empty()) {
            throw BackendUnavailable("backend returned no samples");
        }
        std::string digest = sha256_hex(prompt.rendered);
        for (std::size_t i = 0; i < static_cast<std::size_t>(cfg_.n_candidates); ++i) {
            Candidate cand;
            cand.index = i;
            cand.iteration = 0;
            cand.code = code_from(responses[i % responses.size()]);
            cand.report = check(cand.code);
            cand.status = cand.report.clean ? CandidateStatus::Clean : CandidateStatus::Failing;

            IterationTrace trace;
            trace.task_id = task_.id;
            trace.candidate = i;
            trace.iteration = 0;
            trace.prompt_digest = digest;
            trace.semantic = hits;
            trace.diagnostics_after = cand.report.solution_diagnostics;
            trace.code_digest = sha256_hex(cand.code);
            result.traces.push_back(std::move(trace));
            result.candidates.push_back(std::move(cand));
        }
    }

    static std::string code_from(const std::string& response) {
        try {
            return extract_code(response);
        } catch (const EmptyCompletion&) {
            return {};
        }
    }

    std::string feedback_source_text(const Candidate& cand) const {
        if (cand.code.empty()) return original_;
        return splice_solution(original_, task_.insertion_span, cand.code).first;
    }

    void refine(Candidate& cand, int iteration, RepairResult& result) {
        IterationTrace trace;
        trace.task_id = task_.id;
        trace.candidate = cand.index;
        trace.iteration = iteration;
        trace.diagnostics_before = cand.report.solution_diagnostics;

        std::string feedback = assemble_feedback(cand.report, feedback_source_text(cand), cfg_.feedback_limit);

        // Structural retrieval, once per distinct diagnostic among those fed back.
        std::vector<Diagnostic> ordered = cand.report.solution_diagnostics;
        ErrorCategory dominant = cand.report.dominant_category.value_or(ErrorCategory::Other);
        std::stable_partition(ordered.begin(), ordered.end(),
                              [&](const Diagnostic& d) { return d.category == dominant; });
        if (ordered.size() > cfg_.feedback_limit) ordered.resize(cfg_.feedback_limit);
        std::vector<std::pair<std::string, std::string>> seen;
        std::vector<ContextSnippet> snippets;
        QueryOptions qopts{cfg_.snippet_line_budget};
        for (const auto& d : ordered) {
            if (!is_repairable(d)) continue;
            std::pair<std::string, std::string> key{d.code, d.message};
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);

            StructuralTraceItem item;
            item.code = d.code;
            std::optional<QueryResult> res = hardcoded_query_for(d, db_, qopts);
            if (res) {
                item.origin = "hardcoded";
            } else {
                item.origin = "synthesized";
                try {
                    StructuralQuery q = synthesize_query(d, backends_.completion, gen_, next_request());
                    res = execute_query(q, db_, qopts);
                } catch (const QueryRejected& ex) {
                    item.status = "rejected";
                    item.query_text = ex.what();
                }
            }
            if (res) {
                item.query_text = res->query_text;
                item.tuple_count = res->tuples.size();
                item.tuples = res->tuples;
                item.status = res->tuples.empty() ? "empty" : "ok";
                for (std::size_t k = 0; k < res->tuples.size(); ++k) {
                    snippets.push_back({res->tuples[k].back(), SnippetOrigin::Structural, res->rendered[k]});
                }
            }
            trace.structural.push_back(std::move(item));
        }
        trace.semantic = semantic(feedback, RetrievalMode::Subsequent, snippets);

        PromptBundle prompt = render_generation_prompt(requirement_text(), snippets, cand.code, feedback,
                                                       gen_.prompt_char_budget);
        trace.prompt_digest = sha256_hex(prompt.rendered);
        GenerationConfig cfg = gen_;
        cfg.n_samples = 1;
        std::vector<std::string> responses = backends_.completion.complete(prompt, cfg, next_request());
        if (responses.empty()) {
            throw BackendUnavailable("backend returned no samples");
        }
        cand.code = code_from(responses.front());
        cand.iteration = iteration;
        cand.report = check(cand.code);
        if (cand.report.clean) cand.status = CandidateStatus::Clean;
        trace.diagnostics_after = cand.report.solution_diagnostics;
        trace.code_digest = sha256_hex(cand.code);
        result.traces.push_back(std::move(trace));
    }

    void run_tests(RepairResult& result) {
        for (auto& cand : result.candidates) {
            cand.test_diagnostics = run_task_tests(cand.code, task_, db_, cfg_.test_timeout);
            cand.tests_passed = cand.test_diagnostics.empty();
            for (auto it = result.traces.rbegin(); it != result.traces.rend(); ++it) {
                if (it->candidate == cand.index && it->iteration == cand.iteration) {
                    it->test_diagnostics = cand.test_diagnostics;
                    break;
                }
            }
        }
    }

    const GenerationTask& task_;
    const ProjectDatabase& db_;
    Backends backends_;
    const GenerationConfig& gen_;
    const LoopConfig& cfg_;
    std::string original_;
    std::size_t ordinal_ = 0;
    std::vector<std::string> warnings_;
};

} // namespace

RepairResult repair(const GenerationTask& task, const ProjectDatabase& db, Backends backends,
                    const GenerationConfig& generation, const LoopConfig& config) {
    generation.validate();
    config.validate();
    return TaskRun(task, db, backends, generation, config).run();
}

ojson result_summary(const RepairResult& result) {
    ojson j;
    j["task_id"] = result.task_id;
    std::size_t n = result.candidates.size();
    std::size_t c = 0;
    ojson cands = ojson::array();
    for (const auto& cand : result.candidates) {
        bool passed = cand.tests_passed ? *cand.tests_passed : cand.status == CandidateStatus::Clean;
        if (passed) ++c;
        ojson item;
        item["index"] = cand.index;
        item["status"] = std::string(to_string(cand.status));
        item["iterations_used"] = cand.iteration + 1;
        if (!cand.test_diagnostics.empty()) {
            item["final_category"] = "FUNC";
        } else if (cand.report.dominant_category) {
            item["final_category"] = std::string(to_string(*cand.report.dominant_category));
        } else {
            item["final_category"] = nullptr;
        }
        item["tests_passed"] = cand.tests_passed ? ojson(*cand.tests_passed) : ojson(nullptr);
        item["passed"] = passed;
        item["code"] = cand.code;
        cands.push_back(std::move(item));
    }
    j["n"] = n;
    j["c"] = c;
    j["aborted"] = result.aborted ? ojson(*result.aborted) : ojson(nullptr);
    j["candidates"] = std::move(cands);
    j["warnings"] = result.warnings;
    return j;
}

} // namespace ctxfix
