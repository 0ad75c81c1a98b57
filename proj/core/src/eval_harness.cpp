#include "ctxfix/eval_harness.hpp"

#include "ctxfix/python_syntax.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace ctxfix {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

double pass_at_k(int n, int c, int k) {
    if (n < 0 || c < 0 || c > n) {
        throw ContractViolation(fmt::format("pass_at_k requires 0 <= c <= n (n={}, c={})", n, c));
    }
    if (k < 1 || k > n) {
        throw ContractViolation(fmt::format("pass_at_k requires 1 <= k <= n (n={}, k={})", n, k));
    }
    if (n - c < k) {
        return 1.0;
    }
    double prod = 1.0;
    for (int i = n - c + 1; i <= n; ++i) {
        prod *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    }
    return 1.0 - prod;
}

namespace {

std::vector<std::uint32_t> code_points(std::string_view s) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        auto b = static_cast<unsigned char>(s[i]);
        int len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
        bool ok = len > 0 && i + static_cast<std::size_t>(len) <= s.size();
        for (int k = 1; ok && k < len; ++k) {
            ok = (static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]) & 0xC0) == 0x80;
        }
        if (!ok) {
            out.push_back(0x110000u + b);  // raw byte, outside the code point range
            ++i;
            continue;
        }
        std::uint32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
        for (int k = 1; k < len; ++k) {
            cp = (cp << 6) | (static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]) & 0x3F);
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(len);
    }
    return out;
}

std::set<std::string> identifier_set(std::string_view code) {
    auto ids = py::identifiers(code);
    return {ids.begin(), ids.end()};
}

} // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) {
    auto x = code_points(a);
    auto y = code_points(b);
    if (x.size() < y.size()) std::swap(x, y);
    std::vector<std::size_t> prev(y.size() + 1);
    std::vector<std::size_t> cur(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j) {
            std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
    std::size_t la = code_points(a).size();
    std::size_t lb = code_points(b).size();
    std::size_t longest = std::max(la, lb);
    if (longest == 0) {
        return 1.0;
    }
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::string normalize_for_match(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (true) {
        std::size_t nl = text.find('\n', start);
        std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
        auto end = line.find_last_not_of(" \t\r");
        line.resize(end == std::string::npos ? 0 : end + 1);
        lines.push_back(std::move(line));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

int exact_match(std::string_view a, std::string_view b) {
    return normalize_for_match(a) == normalize_for_match(b) ? 1 : 0;
}

PrecisionRecall identifier_f1(std::string_view pred, std::string_view gold) {
    auto p = identifier_set(pred);
    auto g = identifier_set(gold);
    if (p.empty() && g.empty()) {
        return {1.0, 1.0, 1.0};
    }
    std::size_t shared = 0;
    for (const auto& id : p) shared += g.count(id);
    PrecisionRecall r;
    r.precision = p.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(p.size());
    r.recall = g.empty() ? 0.0 : static_cast<double>(shared) / static_cast<double>(g.size());
    r.f1 = shared == 0 ? 0.0 : 2.0 / (1.0 / r.recall + 1.0 / r.precision);
    return r;
}

long ErrorDistribution::at(ErrorCategory category, int iteration) const {
    auto it = counts.find(category);
    if (it == counts.end() || iteration < 0 || static_cast<std::size_t>(iteration) >= it->second.size()) {
        return 0;
    }
    return it->second[static_cast<std::size_t>(iteration)];
}

ErrorDistribution error_distribution(const std::vector<IterationTrace>& traces) {
    ErrorDistribution dist;
    for (const auto& t : traces) {
        dist.iterations = std::max(dist.iterations, t.iteration + 1);
    }
    dist.iterations = std::max(dist.iterations, 1);
    for (auto c : kAllCategories) {
        dist.counts[c].assign(static_cast<std::size_t>(dist.iterations), 0);
    }
    for (const auto& t : traces) {
        auto idx = static_cast<std::size_t>(t.iteration);
        for (const auto& d : t.diagnostics_after) ++dist.counts[d.category][idx];
        for (const auto& d : t.test_diagnostics) ++dist.counts[d.category][idx];
    }
    return dist;
}

TaskResult task_result_from_json(const json& j) {
    try {
        TaskResult r;
        r.task_id = j.at("task_id").get<std::string>();
        r.n = j.at("n").get<int>();
        r.c = j.at("c").get<int>();
        if (r.n < 0 || r.c < 0 || r.c > r.n) {
            throw ConfigError("task " + r.task_id + ": need 0 <= c <= n");
        }
        for (const auto& cj : j.value("candidates", json::array())) {
            CandidateOutcome c;
            c.index = cj.value("index", std::size_t{0});
            c.iterations_used = cj.value("iterations_used", 0);
            if (cj.contains("final_category") && !cj["final_category"].is_null()) {
                c.final_category = cj["final_category"].get<std::string>();
            }
            c.passed = cj.value("passed", false);
            c.code = cj.value("code", std::string());
            r.candidates.push_back(std::move(c));
        }
        return r;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed task result: ") + ex.what());
    }
}

EvalReport evaluate(const std::vector<TaskResult>& tasks, const std::vector<IterationTrace>& traces,
                    const std::vector<int>& ks, const std::map<std::string, std::string>& references) {
    EvalReport report;
    report.ks = ks;
    report.tasks = tasks;
    for (int k : ks) {
        if (k < 1) throw ContractViolation("k must be >= 1");
        double sum = 0.0;
        std::size_t counted = 0;
        for (const auto& t : tasks) {
            if (t.n < k) continue;  // pass@k undefined for fewer samples
            sum += pass_at_k(t.n, t.c, k);
            ++counted;
        }
        report.pass_at_k[k] = counted ? sum / static_cast<double>(counted) : 0.0;
        report.tasks_counted[k] = counted;
    }
    report.distribution = error_distribution(traces);
    if (!references.empty()) {
        MatchMetrics m;
        for (const auto& t : tasks) {
            auto ref = references.find(t.task_id);
            if (ref == references.end() || t.candidates.empty()) continue;
            const std::string& pred = t.candidates.front().code;
            m.code_exact_match += exact_match(pred, ref->second);
            m.code_edit_similarity += edit_similarity(normalize_for_match(pred), normalize_for_match(ref->second));
            m.identifier_exact_match += py::identifiers(pred) == py::identifiers(ref->second) ? 1.0 : 0.0;
            m.identifier_f1 += identifier_f1(pred, ref->second).f1;
            ++m.tasks;
        }
        if (m.tasks) {
            double n = static_cast<double>(m.tasks);
            m.code_exact_match /= n;
            m.code_edit_similarity /= n;
            m.identifier_exact_match /= n;
            m.identifier_f1 /= n;
        }
        report.match = m;
    }
    return report;
}

namespace {

std::vector<fs::path> sorted_files(const fs::path& dir, std::string_view suffix) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

ResultsDirectory load_results_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("results directory " + dir.string() + " does not exist");
    }
    ResultsDirectory out;
    for (const auto& p : sorted_files(dir, ".result.json")) {
        try {
            json j = json::parse(slurp(p));
            if (j.is_array()) {
                for (const auto& item : j) out.tasks.push_back(task_result_from_json(item));
            } else {
                out.tasks.push_back(task_result_from_json(j));
            }
        } catch (const json::parse_error& ex) {
            throw ConfigError(p.string() + " is not JSON: " + ex.what());
        }
    }
    for (const auto& p : sorted_files(dir, ".traces.jsonl")) {
        std::istringstream lines(slurp(p));
        std::string line;
        while (std::getline(lines, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                out.traces.push_back(trace_from_json(json::parse(line)));
            } catch (const json::parse_error& ex) {
                throw ConfigError(p.string() + " has a malformed line: " + ex.what());
            }
        }
    }
    return out;
}

std::map<std::string, std::string> load_references(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("reference directory " + dir.string() + " does not exist");
    }
    std::map<std::string, std::string> out;
    for (const auto& p : sorted_files(dir, ".py")) {
        out[p.stem().string()] = slurp(p);
    }
    return out;
}

ojson to_json(const EvalReport& r) {
    ojson j;
    ojson pass = ojson::object();
    for (int k : r.ks) {
        pass[fmt::format("{}", k)] = r.pass_at_k.at(k);
    }
    j["pass_at_k"] = std::move(pass);
    ojson counted = ojson::object();
    for (int k : r.ks) counted[fmt::format("{}", k)] = r.tasks_counted.at(k);
    j["tasks_counted"] = std::move(counted);
    ojson tasks = ojson::array();
    for (const auto& t : r.tasks) {
        tasks.push_back({{"task_id", t.task_id}, {"n", t.n}, {"c", t.c}});
    }
    j["tasks"] = std::move(tasks);
    ojson dist;
    dist["iterations"] = r.distribution.iterations;
    ojson counts = ojson::object();
    for (auto c : kAllCategories) {
        counts[std::string(to_string(c))] = r.distribution.counts.at(c);
    }
    dist["counts"] = std::move(counts);
    j["error_distribution"] = std::move(dist);
    if (r.match) {
        j["match_metrics"] = {{"C-EM", r.match->code_exact_match},
                              {"C-ES", r.match->code_edit_similarity},
                              {"I-EM", r.match->identifier_exact_match},
                              {"I-F1", r.match->identifier_f1},
                              {"tasks", r.match->tasks}};
    } else {
        j["match_metrics"] = nullptr;
    }
    return j;
}

std::string render_text(const EvalReport& r) {
    std::string out = fmt::format("tasks: {}\n", r.tasks.size());
    for (int k : r.ks) {
        out += fmt::format("pass@{:<3} {:.5f}  ({} tasks)\n", k, r.pass_at_k.at(k), r.tasks_counted.at(k));
    }
    out += "\nerrors per iteration\n";
    out += fmt::format("{:<8}", "category");
    for (int i = 0; i < r.distribution.iterations; ++i) out += fmt::format(" {:>6}", fmt::format("it{}", i));
    out += '\n';
    for (auto c : kAllCategories) {
        out += fmt::format("{:<8}", to_string(c));
        for (int i = 0; i < r.distribution.iterations; ++i) out += fmt::format(" {:>6}", r.distribution.at(c, i));
        out += '\n';
    }
    if (r.match) {
        out += fmt::format("\nC-EM {:.4f}  C-ES {:.4f}  I-EM {:.4f}  I-F1 {:.4f}  ({} tasks)\n",
                           r.match->code_exact_match, r.match->code_edit_similarity,
                           r.match->identifier_exact_match, r.match->identifier_f1, r.match->tasks);
    }
    return out;
}

std::string render_distribution_csv(const ErrorDistribution& d) {
    std::string out = "category,iteration,count\n";
    for (auto c : kAllCategories) {
        for (int i = 0; i < d.iterations; ++i) {
            out += fmt::format("{},{},{}\n", to_string(c), i, d.at(c, i));
        }
    }
    return out;
}

} // namespace ctxfix
