#include "ctxfix/diagnostics.hpp"

#include "ctxfix/python_syntax.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ctxfix {

namespace {

using py::Token;
using py::TokenKind;

constexpr int kMaxInheritanceDepth = 12;

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> property_list(const ContextEntry& e, const std::string& key) {
    std::vector<std::string> out;
    auto it = e.properties.find(key);
    if (it == e.properties.end()) {
        return out;
    }
    for (auto& s : split(it->second, ',')) {
        s = trim(s);
        if (!s.empty()) {
            out.push_back(s);
        }
    }
    return out;
}

bool is_dunder(std::string_view name) {
    return name.size() > 4 && name.substr(0, 2) == "__" && name.substr(name.size() - 2) == "__";
}

bool is_assign_op(const Token& t) {
    if (t.kind != TokenKind::Op) {
        return false;
    }
    if (t.text == "=") {
        return true;
    }
    return t.text.size() >= 2 && t.text.back() == '=' && t.text != "==" && t.text != "<=" && t.text != ">=" &&
           t.text != "!=";
}

// ---------------------------------------------------------------------------
// Name bindings

struct Bindings {
    std::map<std::string, int> counts;
    void add(const std::string& name) { ++counts[name]; }
    bool has(const std::string& name) const { return counts.count(name) != 0; }
    int count(const std::string& name) const {
        auto it = counts.find(name);
        return it == counts.end() ? 0 : it->second;
    }
};

void bind_target_names(const std::vector<Token>& tk, std::size_t b, std::size_t e, Bindings& out) {
    // Names in an assignment target that are not attribute or subscript parts.
    std::vector<bool> subscript;  // per open bracket
    for (std::size_t i = b; i < e; ++i) {
        const Token& t = tk[i];
        if (t.is_op("(") || t.is_op("[") || t.is_op("{")) {
            bool sub = i > b && (tk[i - 1].kind == TokenKind::Name || tk[i - 1].is_op(")") ||
                                 tk[i - 1].is_op("]")) &&
                       !py::is_keyword(tk[i - 1].text);
            subscript.push_back(sub || (!subscript.empty() && subscript.back()));
            continue;
        }
        if (t.is_op(")") || t.is_op("]") || t.is_op("}")) {
            if (!subscript.empty()) {
                subscript.pop_back();
            }
            continue;
        }
        if (t.kind != TokenKind::Name || py::is_keyword(t.text)) {
            continue;
        }
        if (!subscript.empty() && subscript.back()) {
            continue;
        }
        if (i > b && tk[i - 1].is_op(".")) {
            continue;
        }
        if (i + 1 < e && (tk[i + 1].is_op(".") || tk[i + 1].is_op("(") || tk[i + 1].is_op("["))) {
            continue;
        }
        out.add(t.text);
    }
}

void collect_statement_bindings(const py::Statement& stmt, Bindings& out) {
    const auto& tk = stmt.tokens;
    std::size_t n = tk.size();
    std::size_t i0 = 0;
    if (tk[0].is_name("async") && n > 1) {
        i0 = 1;
    }
    const Token& head = tk[i0];
    if (head.is_name("def") && i0 + 1 < n) {
        out.add(tk[i0 + 1].text);
        std::size_t open = i0 + 2;
        std::size_t close = py::matching_bracket(tk, open);
        if (close != std::string::npos) {
            for (const auto& p : py::parse_parameters(tk, open, close)) {
                out.add(p.name);
            }
        }
    } else if (head.is_name("class") && i0 + 1 < n) {
        out.add(tk[i0 + 1].text);
    } else if (head.is_name("import")) {
        for (auto [b, e] : py::split_top_level(tk, 1, n)) {
            if (b >= e) continue;
            if (e - b >= 3 && tk[e - 2].is_name("as")) {
                out.add(tk[e - 1].text);
            } else {
                out.add(tk[b].text);
            }
        }
    } else if (head.is_name("from")) {
        std::size_t imp = 1;
        while (imp < n && !tk[imp].is_name("import")) ++imp;
        std::size_t b0 = imp + 1;
        std::size_t e0 = n;
        if (b0 < e0 && tk[b0].is_op("(")) {
            ++b0;
            --e0;
        }
        for (auto [b, e] : py::split_top_level(tk, b0, e0)) {
            if (b >= e || tk[b].is_op("*")) continue;
            if (e - b >= 3 && tk[e - 2].is_name("as")) {
                out.add(tk[e - 1].text);
            } else {
                out.add(tk[b].text);
            }
        }
    } else if (head.is_name("global") || head.is_name("nonlocal")) {
        for (std::size_t i = 1; i < n; ++i) {
            if (tk[i].kind == TokenKind::Name) out.add(tk[i].text);
        }
    } else if (head.is_name("case")) {
        for (std::size_t i = 1; i < n; ++i) {
            if (tk[i].kind == TokenKind::Name && !py::is_keyword(tk[i].text)) out.add(tk[i].text);
        }
    } else if (head.is_name("del")) {
        // deleting does not bind
    } else if (!(head.kind == TokenKind::Name && py::is_keyword(head.text))) {
        // assignment / annotated / augmented
        if (n >= 2 && head.kind == TokenKind::Name && tk[1].is_op(":")) {
            out.add(head.text);
        }
        std::vector<std::size_t> eqs;
        int depth = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const Token& t = tk[i];
            if (t.is_op("(") || t.is_op("[") || t.is_op("{")) ++depth;
            else if (t.is_op(")") || t.is_op("]") || t.is_op("}")) --depth;
            else if (depth == 0 && t.is_name("lambda")) break;
            else if (depth == 0 && is_assign_op(t)) eqs.push_back(i);
        }
        std::size_t start = 0;
        for (std::size_t eq : eqs) {
            bind_target_names(tk, start, eq, out);
            start = eq + 1;
        }
    }
    // Bindings that can appear anywhere: for-targets, as-targets, walrus, lambda params.
    for (std::size_t i = 0; i < n; ++i) {
        const Token& t = tk[i];
        if (t.is_name("for")) {
            std::size_t j = i + 1;
            int depth = 0;
            while (j < n && !(depth == 0 && tk[j].is_name("in"))) {
                if (tk[j].is_op("(") || tk[j].is_op("[")) ++depth;
                if (tk[j].is_op(")") || tk[j].is_op("]")) --depth;
                ++j;
            }
            bind_target_names(tk, i + 1, j, out);
        } else if (t.is_name("as") && i + 1 < n) {
            if (tk[i + 1].kind == TokenKind::Name) {
                out.add(tk[i + 1].text);
            } else if (tk[i + 1].is_op("(") || tk[i + 1].is_op("[")) {
                std::size_t close = py::matching_bracket(tk, i + 1);
                if (close != std::string::npos) bind_target_names(tk, i + 2, close, out);
            }
        } else if (t.is_op(":=") && i > 0 && tk[i - 1].kind == TokenKind::Name) {
            out.add(tk[i - 1].text);
        } else if (t.is_name("lambda")) {
            for (std::size_t j = i + 1; j < n && !tk[j].is_op(":"); ++j) {
                if (tk[j].kind == TokenKind::Name &&
                    (j == i + 1 || tk[j - 1].is_op(",") || tk[j - 1].is_op("*") || tk[j - 1].is_op("**"))) {
                    out.add(tk[j].text);
                }
            }
        }
    }
}

void collect_bindings(const std::vector<py::Statement>& stmts, Bindings& out) {
    for (const auto& s : stmts) {
        collect_statement_bindings(s, out);
        collect_bindings(s.body, out);
    }
}

// ---------------------------------------------------------------------------
// Outline helpers

void outline_chain(const py::OutlineNode& node, int line, std::vector<const py::OutlineNode*>& chain) {
    for (const auto& c : node.children) {
        if (line >= c.start_line && line <= c.end_line) {
            if (c.kind != py::NodeKind::Block) {
                chain.push_back(&c);
            }
            outline_chain(c, line, chain);
            return;
        }
    }
}

std::vector<const py::OutlineNode*> indexed_children(const py::OutlineNode& node) {
    std::vector<const py::OutlineNode*> out;
    for (const auto& c : node.children) {
        if (c.kind == py::NodeKind::Block) {
            for (auto* g : indexed_children(c)) out.push_back(g);
        } else {
            out.push_back(&c);
        }
    }
    return out;
}

bool has_decorator(const py::OutlineNode& node, std::string_view name) {
    return std::any_of(node.decorators.begin(), node.decorators.end(),
                       [&](const std::string& d) { return d == name || d.rfind(std::string(name) + "(", 0) == 0; });
}

bool has_decorator(const ContextEntry& e, std::string_view name) {
    for (const auto& d : property_list(e, "decorators")) {
        if (d == name || d.rfind(std::string(name) + "(", 0) == 0) return true;
    }
    return false;
}

struct Callable {
    std::vector<py::Parameter> params;  // bound first parameter already removed
    std::string display;                // "function" / "method" / "constructor"
};

// Members and constructor of a class, gathered from the current file outline
// and/or the project index. `known` is false whenever any part of the class
// hierarchy cannot be seen, in which case callers must not report.
struct ClassInfo {
    bool known = true;
    std::string name;
    std::set<std::string> members;
    std::optional<Callable> init;
    bool init_resolved = false;
};

class BuiltinChecker {
public:
    BuiltinChecker(std::string_view text, const LineSpan& span, const ProjectDatabase& db, std::string path)
        : text_(text), span_(span), db_(db), path_(std::move(path)) {}

    std::vector<Diagnostic> run() {
        try {
            tokens_ = py::tokenize(text_);
            stmts_ = py::parse_statements(tokens_);
            outline_ = py::parse_outline(text_);
        } catch (const py::SyntaxError& err) {
            int line = err.line();
            // The surrounding file parsed before the candidate was inserted,
            // so a parse failure belongs to the solution.
            if (line < span_.start) line = span_.start;
            if (line > span_.end) line = span_.end;
            Diagnostic d = make_diagnostic("E0001",
                                           "Parsing failed: '" + std::string(err.what()) + " (<unknown>, line " +
                                               std::to_string(err.line()) + ")'",
                                           path_, line, err.column());
            return {d};
        }
        module_name_ = path_.empty() ? std::string() : module_name_for_path(path_);
        collect_bindings(stmts_, file_bindings_);
        for (const auto& e : db_.entries()) {
            db_names_.insert(e.name);
        }
        std::vector<const py::Statement*> solution;
        gather_solution(stmts_, solution);
        Bindings local;
        for (const auto* s : solution) {
            collect_statement_bindings(*s, local);
            collect_bindings(s->body, local);
        }
        solution_bindings_ = std::move(local);
        for (const auto* s : solution) {
            visit(*s);
        }
        std::stable_sort(diags_.begin(), diags_.end(), [](const Diagnostic& a, const Diagnostic& b) {
            return std::tie(a.line, a.column) < std::tie(b.line, b.column);
        });
        return diags_;
    }

private:
    void gather_solution(const std::vector<py::Statement>& stmts, std::vector<const py::Statement*>& out) const {
        for (const auto& s : stmts) {
            if (span_.contains(s.first_line)) {
                out.push_back(&s);
            } else if (s.first_line < span_.start && s.block_end_line() >= span_.start) {
                gather_solution(s.body, out);
            }
        }
    }

    void visit(const py::Statement& stmt) {
        check_statement(stmt);
        for (const auto& child : stmt.body) {
            visit(child);
        }
    }

    void report(const std::string& code, const std::string& message, const Token& at,
                std::optional<std::string> symbol = std::nullopt) {
        Diagnostic d = make_diagnostic(code, message, path_, at.line, at.column);
        if (symbol) d.symbol = std::move(symbol);
        diags_.push_back(std::move(d));
    }

    bool is_defined(const std::string& name) const {
        return py::is_builtin_name(name) || file_bindings_.has(name) || db_names_.count(name) != 0;
    }

    // -------------------------------------------------------------------
    void check_statement(const py::Statement& stmt) {
        const auto& tk = stmt.tokens;
        if (tk.front().is_name("from")) {
            check_from_import(stmt);
            return;
        }
        if (tk.front().is_name("import") || tk.front().is_name("global") || tk.front().is_name("nonlocal")) {
            return;
        }
        for (std::size_t i = 0; i < tk.size(); ++i) {
            const Token& t = tk[i];
            if (t.kind != TokenKind::Name || py::is_keyword(t.text)) {
                continue;
            }
            bool after_dot = i > 0 && tk[i - 1].is_op(".");
            bool after_def = i > 0 && (tk[i - 1].is_name("def") || tk[i - 1].is_name("class"));
            if (after_dot || after_def) {
                continue;
            }
            if (i + 1 < tk.size() && tk[i + 1].is_op("=")) {
                continue;  // keyword argument or assignment target
            }
            if (!is_defined(t.text)) {
                report("E0602", "Undefined variable '" + t.text + "'", t);
                continue;
            }
            if (i + 2 < tk.size() && tk[i + 1].is_op(".") && tk[i + 2].kind == TokenKind::Name) {
                check_member(tk, i);
            }
            if (i + 1 < tk.size() && tk[i + 1].is_op("(")) {
                check_call_to_name(tk, i);
            }
        }
    }

    // -------------------------------------------------------------------
    // E0611

    std::string resolve_relative(const std::vector<Token>& tk, std::size_t& i) const {
        std::size_t dots = 0;
        while (i < tk.size() && (tk[i].is_op(".") || tk[i].is_op("..."))) {
            dots += tk[i].text.size();
            ++i;
        }
        std::string rest;
        while (i < tk.size() && !tk[i].is_name("import")) {
            rest += tk[i].text;
            ++i;
        }
        if (dots == 0) {
            return rest;
        }
        if (module_name_.empty()) {
            return {};
        }
        auto parts = split(module_name_, '.');
        parts.pop_back();  // the module itself (or __init__) -> its package
        for (std::size_t d = 1; d < dots; ++d) {
            if (parts.empty()) return {};
            parts.pop_back();
        }
        std::string base;
        for (const auto& p : parts) {
            base += base.empty() ? p : "." + p;
        }
        if (rest.empty()) return base;
        return base.empty() ? rest : base + "." + rest;
    }

    void check_from_import(const py::Statement& stmt) {
        const auto& tk = stmt.tokens;
        std::size_t i = 1;
        std::string module = resolve_relative(tk, i);
        if (module.empty() || i >= tk.size()) {
            return;
        }
        auto mod = db_.module_by_name(module);
        if (!mod) {
            return;
        }
        const ContextEntry& m = db_.entry(*mod);
        if (m.properties.count("star_import")) {
            return;
        }
        std::set<std::string> names;
        for (EntryId c : db_.children_of(*mod)) {
            names.insert(db_.entry(c).name);
        }
        for (const auto& imp : property_list(m, "imports")) {
            names.insert(imp);
        }
        if (names.count("__getattr__")) {
            return;
        }
        std::size_t b0 = i + 1;
        std::size_t e0 = tk.size();
        if (b0 < e0 && tk[b0].is_op("(")) {
            ++b0;
            --e0;
        }
        for (auto [b, e] : py::split_top_level(tk, b0, e0)) {
            if (b >= e || tk[b].kind != TokenKind::Name) continue;
            const std::string& name = tk[b].text;
            if (names.count(name) || db_.module_by_name(module + "." + name)) continue;
            report("E0611", "No name '" + name + "' in module '" + module + "'", tk[b]);
        }
    }

    // -------------------------------------------------------------------
    // Class resolution

    // Class named `name` as seen from this file: module-level class in the
    // current outline, an import from an indexed module, or a unique index hit.
    std::optional<ClassInfo> class_by_name(const std::string& name, int depth) const {
        if (depth > kMaxInheritanceDepth) return std::nullopt;
        for (const auto* c : indexed_children(outline_)) {
            if (c->name == name) {
                if (c->kind != py::NodeKind::Class) return std::nullopt;
                return info_from_outline(*c, depth);
            }
        }
        auto ids = db_.by_name(name);
        std::vector<EntryId> classes;
        for (EntryId id : ids) {
            const auto& e = db_.entry(id);
            if (e.kind == EntryKind::Class && e.parent_id &&
                db_.entry(*e.parent_id).kind == EntryKind::Module && e.path != path_) {
                classes.push_back(id);
            }
        }
        if (classes.size() != 1) return std::nullopt;
        return info_from_db(classes.front(), depth);
    }

    std::optional<ClassInfo> class_by_base(const std::string& base_text, int depth) const {
        std::string b = trim(base_text);
        if (b.empty()) return std::nullopt;
        auto dot = b.find_last_of('.');
        std::string simple = dot == std::string::npos ? b : b.substr(dot + 1);
        for (char c : simple) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return std::nullopt;
        }
        return class_by_name(simple, depth);
    }

    void merge_bases(ClassInfo& info, const std::vector<std::string>& bases, int depth) const {
        for (const auto& base : bases) {
            if (trim(base) == "object") continue;
            auto parent = class_by_base(base, depth + 1);
            if (!parent || !parent->known) {
                info.known = false;
                return;
            }
            info.members.insert(parent->members.begin(), parent->members.end());
            if (!info.init_resolved && parent->init_resolved) {
                info.init = parent->init;
                info.init_resolved = true;
            }
        }
    }

    ClassInfo info_from_outline(const py::OutlineNode& cls, int depth) const {
        ClassInfo info;
        info.name = cls.name;
        for (const auto& d : cls.decorators) {
            (void)d;
            info.known = false;  // decorators may synthesize members
        }
        for (const auto* c : indexed_children(cls)) {
            info.members.insert(c->name);
            if (c->kind == py::NodeKind::Function && c->name == "__init__") {
                info.init = callable_from(c->params, has_decorator(*c, "staticmethod"), "constructor");
                info.init_resolved = !c->decorators.empty() ? false : true;
            }
            if (c->kind == py::NodeKind::Function && c->name == "__new__") {
                info.init_resolved = false;
                info.init.reset();
            }
        }
        info.members.insert(cls.instance_attributes.begin(), cls.instance_attributes.end());
        merge_bases(info, cls.bases, depth);
        if (info.members.count("__getattr__") || info.members.count("__getattribute__")) info.known = false;
        if (info.known && !info.init_resolved && cls.bases.empty() && !info.members.count("__new__")) {
            info.init = Callable{{}, "constructor"};
            info.init_resolved = true;
        }
        return info;
    }

    ClassInfo info_from_db(EntryId id, int depth) const {
        const auto& cls = db_.entry(id);
        ClassInfo info;
        info.name = cls.name;
        if (cls.properties.count("decorators")) info.known = false;
        for (EntryId cid : db_.children_of(id)) {
            const auto& c = db_.entry(cid);
            info.members.insert(c.name);
            if (c.kind == EntryKind::Function && c.name == "__init__" && c.signature) {
                info.init = callable_from(c.signature->params, has_decorator(c, "staticmethod"), "constructor");
                info.init_resolved = !c.properties.count("decorators");
            }
            if (c.kind == EntryKind::Function && c.name == "__new__") {
                info.init_resolved = false;
                info.init.reset();
            }
        }
        for (const auto& a : property_list(cls, "instance_attributes")) info.members.insert(a);
        auto bases = property_list(cls, "bases");
        merge_bases(info, bases, depth);
        if (info.members.count("__getattr__") || info.members.count("__getattribute__")) info.known = false;
        if (info.known && !info.init_resolved && bases.empty() && !info.members.count("__new__")) {
            info.init = Callable{{}, "constructor"};
            info.init_resolved = true;
        }
        return info;
    }

    static Callable callable_from(const std::vector<py::Parameter>& params, bool is_static, std::string display) {
        Callable c;
        c.display = std::move(display);
        c.params = params;
        if (!is_static && !c.params.empty() && c.params.front().kind == py::ParamKind::Positional) {
            c.params.erase(c.params.begin());
        }
        return c;
    }

    // Enclosing class (via `self`/`cls`) for a token at `line`.
    struct SelfContext {
        std::string self_name;
        const py::OutlineNode* cls = nullptr;
    };

    std::optional<SelfContext> self_context(int line) const {
        std::vector<const py::OutlineNode*> chain;
        outline_chain(outline_, line, chain);
        for (std::size_t k = chain.size(); k-- > 1;) {
            const auto* fn = chain[k];
            const auto* parent = chain[k - 1];
            if (fn->kind == py::NodeKind::Function && parent->kind == py::NodeKind::Class) {
                if (has_decorator(*fn, "staticmethod") || fn->params.empty() ||
                    fn->params.front().kind != py::ParamKind::Positional) {
                    return std::nullopt;
                }
                // Only the innermost method matters; nested defs rebind nothing here.
                return SelfContext{fn->params.front().name, parent};
            }
        }
        return std::nullopt;
    }

    // Resolves the object `tk[i]` (a Name) to a class for member checks.
    // Returns the class info and the pylint-style owner description.
    std::optional<std::pair<ClassInfo, std::string>> resolve_object(const std::vector<Token>& tk, std::size_t i) const {
        const std::string& name = tk[i].text;
        if (auto ctx = self_context(tk[i].line); ctx && ctx->self_name == name) {
            // Only top-level classes of this file are tracked by qualified position.
            ClassInfo info = info_from_outline(*ctx->cls, 0);
            return std::make_pair(std::move(info), "Instance of '" + ctx->cls->name + "'");
        }
        // Local constructed instance: exactly one binding, `name = Cls(...)`.
        if (file_bindings_.count(name) == 1 && solution_bindings_.count(name) == 1) {
            if (auto cls = constructor_assignment(name)) {
                if (auto info = class_by_name(*cls, 0)) {
                    return std::make_pair(std::move(*info), "Instance of '" + *cls + "'");
                }
            }
            return std::nullopt;
        }
        // A class referenced directly by name, bound only by its definition or an import.
        if (file_bindings_.count(name) <= 1 && !solution_bindings_.has(name)) {
            if (auto info = class_by_name(name, 0)) {
                return std::make_pair(std::move(*info), "Class '" + name + "'");
            }
        }
        return std::nullopt;
    }

    std::optional<std::string> constructor_assignment(const std::string& var) const {
        std::vector<const py::Statement*> solution;
        gather_solution(stmts_, solution);
        std::vector<const py::Statement*> all;
        std::vector<const py::Statement*> stack(solution.rbegin(), solution.rend());
        while (!stack.empty()) {
            const auto* s = stack.back();
            stack.pop_back();
            all.push_back(s);
            for (auto it = s->body.rbegin(); it != s->body.rend(); ++it) stack.push_back(&*it);
        }
        for (const auto* s : all) {
            const auto& tk = s->tokens;
            if (tk.size() >= 5 && tk[0].is_name(var) && tk[1].is_op("=") && tk[2].kind == TokenKind::Name &&
                tk[3].is_op("(") && py::matching_bracket(tk, 3) == tk.size() - 1) {
                return tk[2].text;
            }
        }
        return std::nullopt;
    }

    // -------------------------------------------------------------------
    // E1101 and method-call arity

    void check_member(const std::vector<Token>& tk, std::size_t i) {
        const Token& attr = tk[i + 2];
        if (is_dunder(attr.text)) return;
        auto resolved = resolve_object(tk, i);
        if (!resolved || !resolved->first.known) return;
        const ClassInfo& info = resolved->first;
        if (!info.members.count(attr.text)) {
            report("E1101", resolved->second + " has no '" + attr.text + "' member", tk[i], attr.text);
            return;
        }
        // self.method(...) arity
        if (i + 3 < tk.size() && tk[i + 3].is_op("(")) {
            auto ctx = self_context(tk[i].line);
            if (!ctx || ctx->self_name != tk[i].text) return;
            if (auto method = find_method(*ctx->cls, attr.text, 0)) {
                check_arguments(tk, i + 3, *method, tk[i], attr.text);
            }
        }
    }

    std::optional<Callable> find_method(const py::OutlineNode& cls, const std::string& name, int depth) const {
        if (depth > kMaxInheritanceDepth) return std::nullopt;
        for (const auto* c : indexed_children(cls)) {
            if (c->name != name) continue;
            if (c->kind != py::NodeKind::Function) return std::nullopt;
            bool is_static = has_decorator(*c, "staticmethod");
            for (const auto& d : c->decorators) {
                if (d != "staticmethod" && d != "classmethod") return std::nullopt;
            }
            return callable_from(c->params, is_static, "method");
        }
        // Inherited methods are not checked: overriding order across files is not modelled.
        return std::nullopt;
    }

    // -------------------------------------------------------------------
    // E1121 / E1120 for plain-name calls

    void check_call_to_name(const std::vector<Token>& tk, std::size_t i) {
        const std::string& name = tk[i].text;
        if (py::is_builtin_name(name) || solution_bindings_.has(name) || file_bindings_.count(name) > 1) {
            return;
        }
        if (auto callee = resolve_callable(name)) {
            check_arguments(tk, i + 1, *callee, tk[i], name);
        }
    }

    std::optional<Callable> resolve_callable(const std::string& name) const {
        for (const auto* c : indexed_children(outline_)) {
            if (c->name != name) continue;
            if (c->kind == py::NodeKind::Function) {
                if (!c->decorators.empty()) return std::nullopt;
                Callable call;
                call.params = c->params;
                call.display = "function";
                return call;
            }
            if (c->kind == py::NodeKind::Class) {
                ClassInfo info = info_from_outline(*c, 0);
                if (info.known && info.init_resolved && info.init) return info.init;
            }
            return std::nullopt;
        }
        std::vector<EntryId> hits;
        for (EntryId id : db_.by_name(name)) {
            const auto& e = db_.entry(id);
            if ((e.kind == EntryKind::Function || e.kind == EntryKind::Class) && e.parent_id &&
                db_.entry(*e.parent_id).kind == EntryKind::Module && e.path != path_) {
                hits.push_back(id);
            }
        }
        if (hits.size() != 1) return std::nullopt;
        const auto& e = db_.entry(hits.front());
        if (e.kind == EntryKind::Function) {
            if (e.properties.count("decorators") || !e.signature) return std::nullopt;
            Callable call;
            call.params = e.signature->params;
            call.display = "function";
            return call;
        }
        ClassInfo info = info_from_db(hits.front(), 0);
        if (info.known && info.init_resolved && info.init) return info.init;
        return std::nullopt;
    }

    void check_arguments(const std::vector<Token>& tk, std::size_t open, const Callable& callee, const Token& at,
                         const std::string& callee_name) {
        std::size_t close = py::matching_bracket(tk, open);
        if (close == std::string::npos) return;
        std::size_t positional = 0;
        std::set<std::string> keywords;
        for (auto [b, e] : py::split_top_level(tk, open + 1, close)) {
            if (b >= e) continue;
            if (tk[b].is_op("*") || tk[b].is_op("**")) return;  // unpacking: arity unknown
            if (e - b >= 2 && tk[b].kind == TokenKind::Name && tk[b + 1].is_op("=")) {
                keywords.insert(tk[b].text);
            } else {
                ++positional;
            }
        }
        std::vector<const py::Parameter*> pos_params;
        bool var_positional = false;
        for (const auto& p : callee.params) {
            if (p.kind == py::ParamKind::Positional) pos_params.push_back(&p);
            if (p.kind == py::ParamKind::VarPositional) var_positional = true;
        }
        if (!var_positional && positional > pos_params.size()) {
            report("E1121", "Too many positional arguments for " + callee.display + " call", at, callee_name);
            return;
        }
        for (std::size_t k = 0; k < pos_params.size(); ++k) {
            const auto& p = *pos_params[k];
            if (p.has_default || k < positional || keywords.count(p.name)) continue;
            report("E1120", "No value for argument '" + p.name + "' in " + callee.display + " call", at,
                   callee_name);
        }
    }

    std::string_view text_;
    LineSpan span_;
    const ProjectDatabase& db_;
    std::string path_;
    std::string module_name_;
    std::vector<Token> tokens_;
    std::vector<py::Statement> stmts_;
    py::OutlineNode outline_;
    Bindings file_bindings_;
    Bindings solution_bindings_;
    std::set<std::string> db_names_;
    std::vector<Diagnostic> diags_;
};

} // namespace

std::vector<Diagnostic> builtin_check(std::string_view file_text, const LineSpan& span, const ProjectDatabase& db,
                                      std::string_view file_path) {
    return BuiltinChecker(file_text, span, db, std::string(file_path)).run();
}

} // namespace ctxfix
