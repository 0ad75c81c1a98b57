#include "cli.hpp"

#include <CLI11.hpp>

#include <ctxfix/config.hpp>
#include <ctxfix/context_index.hpp>
#include <ctxfix/diagnostics.hpp>
#include <ctxfix/eval_harness.hpp>
#include <ctxfix/refine_loop.hpp>
#include <ctxfix/structural_query.hpp>

#include <fmt/format.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

namespace ctxfix::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

struct IndexFlags {
    std::string project_dir;
    std::string out;
    std::vector<std::string> ext;
    std::string embedder;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
};

struct CheckFlags {
    std::string db;
    std::string file;
    std::string span;
    std::string code;
    std::string checker;
    std::string analyzer;
};

struct QueryFlags {
    std::string db;
    std::string text;
    std::string for_error;
    std::string backend;
    std::size_t line_budget = 40;
};

struct RepairFlags {
    std::string db;
    std::vector<std::string> tasks;
    std::string backend;
    std::string out;
    int max_iters = 0;
    int n = 0;
    int jobs = 0;
    std::size_t retrieval_n = 0;
    double temperature = 0;
    int top_k = 0;
    int max_new_tokens = 0;
    std::size_t prompt_budget = 0;
    std::string model;
    std::string checker;
    std::string analyzer;
    bool no_tests = false;
    double test_timeout = 0;
};

struct EvalFlags {
    std::string results;
    std::vector<int> ks = {1, 5, 10};
    std::string refs;
    std::string csv;
};

bool given(const CLI::App* app, const std::string& name) { return app->count(name) > 0; }

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

LineSpan parse_span(const std::string& text) {
    auto sep = text.find_first_of(":,-");
    try {
        if (sep == std::string::npos) throw std::invalid_argument(text);
        LineSpan s{std::stoi(text.substr(0, sep)), std::stoi(text.substr(sep + 1))};
        if (s.start < 1 || s.end < s.start) throw std::invalid_argument(text);
        return s;
    } catch (const std::logic_error&) {
        throw ConfigError("bad span '" + text + "', expected START:END");
    }
}

CheckerChoice parse_checker(const std::string& text) {
    if (text == "builtin") return CheckerChoice::Builtin;
    if (text == "external") return CheckerChoice::External;
    throw ConfigError("checker must be 'builtin' or 'external'");
}

void apply_backend_flag(BackendConfig& backend, const std::string& value) {
    if (value == "remote") {
        backend.kind = "remote";
    } else if (value.rfind("mock:", 0) == 0 && value.size() > 5) {
        backend.kind = "mock";
        backend.transcript = value.substr(5);
    } else {
        throw ConfigError("backend must be 'remote' or 'mock:<transcript.json>'");
    }
}

ojson entry_brief(const ProjectDatabase& db, EntryId id) {
    const auto& e = db.entry(id);
    ojson j;
    j["id"] = id;
    j["kind"] = to_string(e.kind);
    j["qualified_name"] = e.qualified_name;
    j["path"] = e.path;
    j["span"] = {e.span.start, e.span.end};
    return j;
}

ojson diagnostics_json(const std::vector<Diagnostic>& diags) {
    ojson arr = ojson::array();
    for (const auto& d : diags) arr.push_back(to_json(d));
    return arr;
}

std::string all_flags_footer(const CLI::App& app) {
    std::string text = "Flags by subcommand:\n";
    auto list = [&](const CLI::App& a, const std::string& label) {
        std::string line;
        for (const CLI::Option* opt : a.get_options()) {
            auto name = opt->get_name(false, true);
            if (name.empty() || name == "-h,--help") continue;
            if (!line.empty()) line += ' ';
            line += opt->get_name();
        }
        text += fmt::format("  {:<8}{}\n", label, line);
    };
    list(app, "global");
    for (const CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        list(*sub, sub->get_name());
    }
    return text;
}

class Runner {
public:
    Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

    int run(const std::vector<std::string>& args);

private:
    int cmd_index(const CLI::App& sub);
    int cmd_check(const CLI::App& sub);
    int cmd_query(const CLI::App& sub);
    int cmd_repair(const CLI::App& sub);
    int cmd_eval(const CLI::App& sub);

    RunConfig resolve_base() const;
    void emit(ojson summary, const std::string& human);

    std::ostream& out_;
    std::ostream& err_;
    std::string config_path_;
    std::string summary_path_;
    IndexFlags index_;
    CheckFlags check_;
    QueryFlags query_;
    RepairFlags repair_;
    EvalFlags eval_;
    ojson summary_ = ojson::object();
};

RunConfig Runner::resolve_base() const {
    RunConfig cfg;
    if (!config_path_.empty()) cfg = load_config_file(config_path_, cfg);
    apply_environment(cfg);
    return cfg;
}

void Runner::emit(ojson summary, const std::string& human) {
    auto text = summary.dump(2) + "\n";
    if (summary_path_.empty()) {
        out_ << text;
    } else {
        write_text(summary_path_, text);
        out_ << human;
    }
}

int Runner::cmd_index(const CLI::App& sub) {
    RunConfig cfg = resolve_base();
    if (given(&sub, "project_dir")) cfg.project_root = index_.project_dir;
    if (given(&sub, "--out")) cfg.database = index_.out;
    if (given(&sub, "--ext")) cfg.extensions = index_.ext;
    if (given(&sub, "--embedder")) cfg.embedder.kind = index_.embedder;
    if (given(&sub, "--dim")) cfg.embedder.dim = index_.dim;
    if (given(&sub, "--seed")) cfg.embedder.seed = index_.seed;
    if (cfg.project_root.empty()) throw ConfigError("index needs a project directory");
    if (cfg.database.empty()) throw ConfigError("index needs --out");
    if (cfg.embedder.kind != "local" && cfg.embedder.kind != "remote") {
        throw ConfigError("embedder must be 'local' or 'remote'");
    }
    check_secrets(cfg);
    summary_["config"] = to_json(cfg);

    auto encoder = make_encoder(cfg.embedder);
    fs::path root = fs::weakly_canonical(fs::absolute(cfg.project_root));
    auto scan = scan_source_files(root, cfg.extensions);
    std::size_t files = scan.units.size();
    auto db = build_database(std::move(scan.units), *encoder, root.string(), std::move(scan.warnings));
    save_database(db, cfg.database);

    ojson kinds = ojson::object();
    for (auto k : {EntryKind::Module, EntryKind::Class, EntryKind::Function, EntryKind::Variable}) {
        kinds[std::string(to_string(k))] = 0;
    }
    for (const auto& e : db.entries()) kinds[std::string(to_string(e.kind))] = kinds[std::string(to_string(e.kind))].get<int>() + 1;
    ojson warnings = ojson::array();
    for (const auto& w : db.warnings()) warnings.push_back({{"path", w.path}, {"message", w.message}});

    summary_["status"] = "ok";
    summary_["database"] = cfg.database;
    summary_["files"] = files;
    summary_["entries"] = db.entries().size();
    summary_["by_kind"] = kinds;
    summary_["unembedded"] = db.unembedded_entries().size();
    summary_["warnings"] = warnings;
    emit(summary_, fmt::format("indexed {} files, {} entries -> {}\n", files, db.entries().size(), cfg.database));
    return kOk;
}

int Runner::cmd_check(const CLI::App& sub) {
    RunConfig cfg = resolve_base();
    if (given(&sub, "--checker")) cfg.loop.checker = parse_checker(check_.checker);
    if (given(&sub, "--analyzer")) cfg.loop.external.analyzer = check_.analyzer;
    if (!check_.code.empty() && check_.span.empty()) throw ConfigError("--code needs --span");
    summary_["config"] = {{"checker", cfg.loop.checker == CheckerChoice::Builtin ? "builtin" : "external"},
                          {"analyzer", cfg.loop.external.analyzer}};

    auto db = load_database(check_.db);
    fs::path root = db.project_root();
    std::string text = read_text(root / check_.file);
    LineSpan span;
    std::optional<std::string> replacement;
    if (!check_.span.empty()) {
        span = parse_span(check_.span);
        if (!check_.code.empty()) {
            auto [spliced, new_span] = splice_solution(text, span, read_text(check_.code));
            text = std::move(spliced);
            span = new_span;
            replacement = text;
        }
    } else {
        span = {1, std::max(1, static_cast<int>(std::count(text.begin(), text.end(), '\n')) + 1)};
    }

    std::vector<Diagnostic> diags;
    std::string used = "builtin";
    if (cfg.loop.checker == CheckerChoice::External) {
        used = "external";
        fs::path target = root / check_.file;
        fs::path scratch;
        if (replacement) {
            scratch = target.parent_path() / (".ctxfix-check-" + target.filename().string());
            write_text(scratch, *replacement);
            target = scratch;
        }
        try {
            diags = run_external_checker(target, root, cfg.loop.external);
        } catch (...) {
            if (!scratch.empty()) fs::remove(scratch);
            throw;
        }
        if (!scratch.empty()) fs::remove(scratch);
        for (auto& d : diags) d.file = check_.file;
        enrich_symbols(diags, text);
    } else {
        diags = builtin_check(text, span, db, check_.file);
    }
    auto report = filter_to_solution(std::move(diags), span);

    summary_["status"] = report.clean ? "clean" : "diagnostics";
    summary_["checker"] = used;
    summary_["file"] = check_.file;
    summary_["span"] = {span.start, span.end};
    summary_["clean"] = report.clean;
    summary_["dominant_category"] =
        report.dominant_category ? ojson(std::string(to_string(*report.dominant_category))) : ojson(nullptr);
    summary_["diagnostics"] = diagnostics_json(report.solution_diagnostics);
    std::string human;
    for (const auto& d : report.solution_diagnostics) {
        human += fmt::format("{}:{}:{}: {} {}\n", d.file, d.line, d.column, d.code, d.message);
    }
    emit(summary_, human);
    return report.clean ? kOk : kTaskFailure;
}

int Runner::cmd_query(const CLI::App& sub) {
    RunConfig cfg = resolve_base();
    if (given(&sub, "--backend")) apply_backend_flag(cfg.backend, query_.backend);
    if (given(&sub, "--line-budget")) cfg.loop.snippet_line_budget = query_.line_budget;
    QueryOptions options{cfg.loop.snippet_line_budget};

    std::optional<Diagnostic> diag;
    if (!query_.for_error.empty()) diag = diagnostic_from_json(json::parse(read_text(query_.for_error)));
    bool needs_backend = diag && !has_hardcoded_query(diag->code);
    if (needs_backend) check_secrets(cfg);
    summary_["config"] = {{"snippet_line_budget", cfg.loop.snippet_line_budget}};

    auto db = load_database(query_.db);
    std::optional<QueryResult> result;
    std::string origin = "text";
    if (!diag) {
        result = execute_query(parse_query(query_.text), db, options);
    } else {
        summary_["diagnostic"] = to_json(*diag);
        if (has_hardcoded_query(diag->code)) {
            origin = "hardcoded";
            result = hardcoded_query_for(*diag, db, options);
        } else {
            if (cfg.backend.kind == "mock" && cfg.backend.transcript.empty()) {
                throw ConfigError("code " + diag->code + " needs a synthesized query; pass --backend");
            }
            summary_["config"]["backend"] = to_json(cfg)["backend"];
            origin = "synthesized";
            auto backend = make_backend(cfg.backend);
            GenerationConfig gen = cfg.generation;
            gen.n_samples = 1;
            try {
                result = execute_query(synthesize_query(*diag, *backend, gen, {"query", 0}), db, options);
            } catch (const QueryRejected& ex) {
                summary_["status"] = "rejected";
                summary_["origin"] = origin;
                summary_["error"] = ex.what();
                emit(summary_, fmt::format("query rejected: {}\n", ex.what()));
                return kTaskFailure;
            }
        }
    }

    summary_["origin"] = origin;
    if (!result) {
        summary_["status"] = "no-query";
        summary_["tuples"] = ojson::array();
        emit(summary_, "no lookup applies to this diagnostic\n");
        return kOk;
    }
    ojson tuples = ojson::array();
    for (const auto& t : result->tuples) {
        ojson row = ojson::array();
        for (auto id : t) row.push_back(entry_brief(db, id));
        tuples.push_back(std::move(row));
    }
    summary_["status"] = result->tuples.empty() ? "empty" : "ok";
    summary_["query"] = result->query_text;
    summary_["tuple_count"] = result->tuples.size();
    summary_["tuples"] = std::move(tuples);
    summary_["rendered"] = result->rendered;
    std::string human;
    for (const auto& r : result->rendered) human += r + "\n";
    emit(summary_, human);
    return kOk;
}

int Runner::cmd_repair(const CLI::App& sub) {
    RunConfig cfg = resolve_base();
    const RepairFlags& f = repair_;
    if (given(&sub, "--db")) cfg.database = f.db;
    if (given(&sub, "--task")) cfg.tasks = f.tasks;
    if (given(&sub, "--out")) cfg.output_dir = f.out;
    if (given(&sub, "--backend")) apply_backend_flag(cfg.backend, f.backend);
    if (given(&sub, "--max-iters")) cfg.loop.max_iterations = f.max_iters;
    if (given(&sub, "--n")) cfg.loop.n_candidates = f.n;
    if (given(&sub, "--jobs")) cfg.jobs = f.jobs;
    if (given(&sub, "--retrieval-n")) cfg.loop.retrieval_n = f.retrieval_n;
    if (given(&sub, "--temperature")) cfg.generation.temperature = f.temperature;
    if (given(&sub, "--top-k")) cfg.generation.top_k = f.top_k;
    if (given(&sub, "--max-new-tokens")) cfg.generation.max_new_tokens = f.max_new_tokens;
    if (given(&sub, "--prompt-budget")) cfg.generation.prompt_char_budget = f.prompt_budget;
    if (given(&sub, "--model")) cfg.backend.remote.model = f.model;
    if (given(&sub, "--checker")) cfg.loop.checker = parse_checker(f.checker);
    if (given(&sub, "--analyzer")) cfg.loop.external.analyzer = f.analyzer;
    if (given(&sub, "--no-tests")) cfg.loop.run_tests = false;
    if (given(&sub, "--test-timeout")) {
        if (f.test_timeout <= 0) throw ConfigError("--test-timeout must be positive");
        cfg.loop.test_timeout = std::chrono::milliseconds(static_cast<long long>(f.test_timeout * 1000));
    }
    if (cfg.database.empty()) throw ConfigError("repair needs --db");
    if (cfg.tasks.empty()) throw ConfigError("repair needs at least one --task");
    if (cfg.output_dir.empty()) throw ConfigError("repair needs --out");
    if (cfg.jobs < 1) throw ConfigError("--jobs must be >= 1");
    if (cfg.backend.kind == "mock" && cfg.backend.transcript.empty()) {
        throw ConfigError("repair needs --backend remote or --backend mock:<transcript>");
    }
    try {
        cfg.loop.validate();
        cfg.generation.validate();
    } catch (const ContractViolation& ex) {
        throw ConfigError(ex.what());
    }
    check_secrets(cfg);
    summary_["config"] = to_json(cfg);

    std::vector<GenerationTask> tasks;
    for (const auto& path : cfg.tasks) tasks.push_back(load_task(path));
    auto db = load_database(cfg.database);
    auto encoder = make_encoder(db.encoder_description());
    fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);

    struct Outcome {
        std::optional<RepairResult> result;
        std::vector<std::string> backend_warnings;
        std::string error;
    };
    std::vector<Outcome> outcomes(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto& task = tasks[i];
            try {
                auto backend = make_backend(cfg.backend);
                fs::path audit_path = out_dir / (task.id + ".audit.jsonl");
                fs::remove(audit_path);
                backend->set_audit_log(std::make_shared<AuditLog>(audit_path));
                GenerationConfig gen = cfg.generation;
                auto result = repair(task, db, Backends{*backend, *encoder}, gen, cfg.loop);

                std::string traces;
                for (const auto& t : result.traces) traces += to_json(t).dump() + "\n";
                write_text(out_dir / (task.id + ".traces.jsonl"), traces);
                write_text(out_dir / (task.id + ".result.json"), result_summary(result).dump(2) + "\n");
                if (auto* mock = dynamic_cast<MockBackend*>(backend.get())) {
                    outcomes[i].backend_warnings = mock->warnings();
                }
                outcomes[i].result = std::move(result);
            } catch (const Error& ex) {
                outcomes[i].error = ex.what();
            }
        }
    };
    std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), tasks.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    bool failed = false;
    ojson task_rows = ojson::array();
    std::string human;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& o = outcomes[i];
        ojson row;
        if (!o.result) {
            failed = true;
            row["task_id"] = tasks[i].id;
            row["error"] = o.error;
            human += fmt::format("{}: error: {}\n", tasks[i].id, o.error);
        } else {
            row = result_summary(*o.result);
            row.erase("candidates");
            for (const auto& w : o.backend_warnings) row["warnings"].push_back(w);
            row["traces"] = (out_dir / (tasks[i].id + ".traces.jsonl")).string();
            row["result"] = (out_dir / (tasks[i].id + ".result.json")).string();
            int c = row["c"].get<int>();
            if (o.result->aborted || c == 0) failed = true;
            human += fmt::format("{}: {}/{} passing{}\n", tasks[i].id, c, row["n"].get<int>(),
                                 o.result->aborted ? " (aborted: " + *o.result->aborted + ")" : "");
        }
        task_rows.push_back(std::move(row));
    }
    summary_["status"] = failed ? "failures" : "ok";
    summary_["tasks"] = std::move(task_rows);
    emit(summary_, human);
    return failed ? kTaskFailure : kOk;
}

int Runner::cmd_eval(const CLI::App& sub) {
    RunConfig cfg = resolve_base();
    if (given(&sub, "--results")) cfg.output_dir = eval_.results;
    if (cfg.output_dir.empty()) throw ConfigError("eval needs --results");
    for (int k : eval_.ks) {
        if (k < 1) throw ConfigError("--k values must be >= 1");
    }
    summary_["config"] = {{"results", cfg.output_dir}, {"k", eval_.ks}, {"refs", eval_.refs}};

    auto loaded = load_results_directory(cfg.output_dir);
    if (loaded.tasks.empty()) throw IoError("no *.result.json files in " + cfg.output_dir);
    std::map<std::string, std::string> refs;
    if (!eval_.refs.empty()) refs = load_references(eval_.refs);
    auto report = evaluate(loaded.tasks, loaded.traces, eval_.ks, refs);
    if (!eval_.csv.empty()) write_text(eval_.csv, render_distribution_csv(report.distribution));

    summary_["status"] = "ok";
    summary_["report"] = to_json(report);
    emit(summary_, render_text(report));
    return kOk;
}

int Runner::run(const std::vector<std::string>& args) {
    CLI::App app{"Retrieval-augmented code generation with compiler-feedback repair"};
    app.name(args.empty() ? "ctxfix" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", config_path_, "JSON config file (comments allowed); flags override it")
        ->check(CLI::ExistingFile);
    app.add_option("--summary", summary_path_, "Write the JSON run summary here instead of stdout");

    auto* index = app.add_subcommand("index", "Index a project into a database file");
    index->add_option("project_dir", index_.project_dir, "Project root to scan");
    index->add_option("--out", index_.out, "Database file to write");
    index->add_option("--ext", index_.ext, "Source extensions to include (default .py)")->take_all();
    index->add_option("--embedder", index_.embedder, "local | remote");
    index->add_option("--dim", index_.dim, "Embedding dimension");
    index->add_option("--seed", index_.seed, "Local embedder hashing seed");

    auto* check = app.add_subcommand("check", "Check a file, or a candidate spliced into it");
    check->add_option("db", check_.db, "Database file")->required();
    check->add_option("--file", check_.file, "File relative to the project root")->required();
    check->add_option("--span", check_.span, "START:END lines to report on (default whole file)");
    check->add_option("--code", check_.code, "Candidate code file replacing --span");
    check->add_option("--checker", check_.checker, "builtin | external");
    check->add_option("--analyzer", check_.analyzer, "External analyzer executable");

    auto* query = app.add_subcommand("query", "Run a structural query");
    query->add_option("db", query_.db, "Database file")->required();
    auto* text_opt = query->add_option("--text", query_.text, "Query text");
    auto* err_opt = query->add_option("--for-error", query_.for_error, "Diagnostic JSON file to build a query for");
    text_opt->excludes(err_opt);
    query->add_option("--backend", query_.backend, "remote | mock:<transcript> (for synthesized queries)");
    query->add_option("--line-budget", query_.line_budget, "Source lines per rendered snippet");

    auto* rep = app.add_subcommand("repair", "Generate and repair code for tasks");
    rep->add_option("--db", repair_.db, "Database file");
    rep->add_option("--task", repair_.tasks, "Task JSON file (repeatable)");
    rep->add_option("--backend", repair_.backend, "remote | mock:<transcript>");
    rep->add_option("--out", repair_.out, "Output directory for traces and results");
    rep->add_option("--max-iters", repair_.max_iters, "Iterations per candidate (default 3)");
    rep->add_option("--n", repair_.n, "Candidates per task (default 20)");
    rep->add_option("--jobs", repair_.jobs, "Tasks run concurrently");
    rep->add_option("--retrieval-n", repair_.retrieval_n, "Semantic entries per retrieval (default 5)");
    rep->add_option("--temperature", repair_.temperature, "Sampling temperature (default 0.7)");
    rep->add_option("--top-k", repair_.top_k, "Top-k sampling");
    rep->add_option("--max-new-tokens", repair_.max_new_tokens, "Completion length limit");
    rep->add_option("--prompt-budget", repair_.prompt_budget, "Prompt size limit in characters");
    rep->add_option("--model", repair_.model, "Remote model name");
    rep->add_option("--checker", repair_.checker, "builtin | external");
    rep->add_option("--analyzer", repair_.analyzer, "External analyzer executable");
    rep->add_flag("--no-tests", repair_.no_tests, "Skip task test commands");
    rep->add_option("--test-timeout", repair_.test_timeout, "Seconds per test command");

    auto* ev = app.add_subcommand("eval", "Score repair results");
    ev->add_option("--results", eval_.results, "Directory of *.result.json and *.traces.jsonl");
    ev->add_option("--k", eval_.ks, "Comma-separated k values (default 1,5,10)")->delimiter(',');
    ev->add_option("--refs", eval_.refs, "Directory of <task_id>.py reference solutions")->check(CLI::ExistingDirectory);
    ev->add_option("--csv", eval_.csv, "Write the error distribution as CSV");

    app.footer([&app] { return all_flags_footer(app); });

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("ctxfix");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out_, err_);
        return code == 0 ? kOk : kUsage;
    }
    if (query->parsed() && query_.text.empty() && query_.for_error.empty()) {
        err_ << "query needs --text or --for-error\n";
        return kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    summary_["command"] = chosen->get_name();
    try {
        if (chosen == index) return cmd_index(*index);
        if (chosen == check) return cmd_check(*check);
        if (chosen == query) return cmd_query(*query);
        if (chosen == rep) return cmd_repair(*rep);
        return cmd_eval(*ev);
    } catch (const ConfigError& ex) {
        err_ << "configuration error: " << ex.what() << "\n";
        return kUsage;
    } catch (const QueryParseError& ex) {
        err_ << "query error: " << ex.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        err_ << "error: " << ex.what() << "\n";
        summary_["status"] = "error";
        summary_["error"] = ex.what();
        try {
            emit(summary_, "");
        } catch (const std::exception&) {
        }
        return kTaskFailure;
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Runner runner(out, err);
    return runner.run(args);
}

} // namespace ctxfix::cli
