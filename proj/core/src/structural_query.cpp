#include "ctxfix/structural_query.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace ctxfix {

std::string_view to_string(Predicate predicate) {
    switch (predicate) {
    case Predicate::Contains: return "contains";
    case Predicate::GetName: return "getName";
    case Predicate::GetScope: return "getScope";
    case Predicate::InSource: return "inSource";
    case Predicate::IsInitMethod: return "isInitMethod";
    }
    return "inSource";
}

namespace {

enum class Tok { Ident, String, Comma, Dot, LParen, RParen, Equals, Semicolon, End };

struct QToken {
    Tok kind;
    std::string text;
    std::size_t pos;
};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::vector<QToken> lex(std::string_view s) {
    std::vector<QToken> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t b = i;
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Ident, std::string(s.substr(b, i - b)), b});
        } else if (c == '\'' || c == '"') {
            std::size_t b = i;
            std::size_t close = s.find(c, i + 1);
            if (close == std::string_view::npos) {
                throw QueryParseError("unterminated string literal", b);
            }
            out.push_back({Tok::String, std::string(s.substr(i + 1, close - i - 1)), b});
            i = close + 1;
        } else if (c == '=') {
            std::size_t b = i;
            i += (i + 1 < s.size() && s[i + 1] == '=') ? 2 : 1;
            out.push_back({Tok::Equals, "=", b});
        } else {
            Tok k;
            switch (c) {
            case ',': k = Tok::Comma; break;
            case '.': k = Tok::Dot; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case ';': k = Tok::Semicolon; break;
            default: throw QueryParseError(std::string("unexpected character '") + c + "'", i);
            }
            out.push_back({k, std::string(1, c), i});
            ++i;
        }
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    StructuralQuery parse() {
        StructuralQuery q;
        expect_keyword("FROM");
        do {
            const QToken& kind_tok = expect(Tok::Ident, "entity kind");
            auto kind = parse_kind(kind_tok.text);
            if (!kind) {
                throw QueryParseError("unknown entity kind '" + kind_tok.text + "'", kind_tok.pos);
            }
            const QToken& var = expect(Tok::Ident, "variable name");
            if (is_reserved(var.text)) {
                throw QueryParseError("expected variable name, found '" + var.text + "'", var.pos);
            }
            if (declared(q, var.text)) {
                throw QueryParseError("variable '" + var.text + "' declared twice", var.pos);
            }
            q.from.push_back({var.text, *kind});
        } while (accept(Tok::Comma));

        if (peek_keyword("WHERE")) {
            ++pos_;
            do {
                q.where.push_back(parse_condition(q, false));
            } while (accept_keyword("AND"));
        }
        expect_keyword("SELECT");
        do {
            q.select.push_back(parse_select_item(q));
        } while (accept(Tok::Comma));
        accept(Tok::Semicolon);
        if (peek().kind != Tok::End) {
            throw QueryParseError("unexpected '" + peek().text + "' after select clause", peek().pos);
        }
        return q;
    }

private:
    static std::optional<EntryKind> parse_kind(std::string_view s) {
        for (auto k : {EntryKind::Module, EntryKind::Class, EntryKind::Function, EntryKind::Variable}) {
            if (iequals(s, to_string(k))) return k;
        }
        return std::nullopt;
    }

    static bool is_reserved(std::string_view s) {
        for (std::string_view kw : {"from", "where", "select", "and", "not", "or"}) {
            if (iequals(s, kw)) return true;
        }
        return false;
    }

    static bool declared(const StructuralQuery& q, std::string_view name) {
        return std::any_of(q.from.begin(), q.from.end(), [&](const QueryVariable& v) { return v.name == name; });
    }

    const QToken& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }

    bool accept(Tok kind) {
        if (peek().kind == kind) {
            ++pos_;
            return true;
        }
        return false;
    }

    const QToken& expect(Tok kind, std::string_view what) {
        if (peek().kind != kind) {
            std::string found = peek().kind == Tok::End ? "end of query" : "'" + peek().text + "'";
            throw QueryParseError("expected " + std::string(what) + ", found " + found, peek().pos);
        }
        return toks_[pos_++];
    }

    bool peek_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && iequals(peek().text, kw); }

    bool accept_keyword(std::string_view kw) {
        if (peek_keyword(kw)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect_keyword(std::string_view kw) {
        if (!accept_keyword(kw)) {
            std::string found = peek().kind == Tok::End ? "end of query" : "'" + peek().text + "'";
            throw QueryParseError("expected " + std::string(kw) + ", found " + found, peek().pos);
        }
    }

    const QToken& expect_variable(const StructuralQuery& q) {
        const QToken& t = expect(Tok::Ident, "variable");
        if (!declared(q, t.text)) {
            throw QueryParseError("undeclared variable '" + t.text + "'", t.pos);
        }
        return t;
    }

    void optional_empty_call() {
        if (accept(Tok::LParen)) {
            expect(Tok::RParen, "')'");
        }
    }

    Condition parse_condition(const StructuralQuery& q, bool negated) {
        if (accept_keyword("NOT")) {
            return parse_condition(q, !negated);
        }
        if (accept(Tok::LParen)) {
            Condition c = parse_condition(q, negated);
            expect(Tok::RParen, "')'");
            return c;
        }
        Condition c;
        c.negated = negated;
        c.subject = expect_variable(q).text;
        expect(Tok::Dot, "'.'");
        const QToken& method = expect(Tok::Ident, "predicate name");
        if (iequals(method.text, "contains")) {
            c.predicate = Predicate::Contains;
            expect(Tok::LParen, "'('");
            c.object = expect_variable(q).text;
            expect(Tok::RParen, "')'");
        } else if (iequals(method.text, "getName")) {
            c.predicate = Predicate::GetName;
            optional_empty_call();
            expect(Tok::Equals, "'='");
            c.literal = expect(Tok::String, "string literal").text;
        } else if (iequals(method.text, "getScope")) {
            c.predicate = Predicate::GetScope;
            optional_empty_call();
            expect(Tok::Equals, "'='");
            c.object = expect_variable(q).text;
        } else if (iequals(method.text, "inSource")) {
            c.predicate = Predicate::InSource;
            optional_empty_call();
        } else if (iequals(method.text, "isInitMethod")) {
            c.predicate = Predicate::IsInitMethod;
            optional_empty_call();
        } else {
            throw QueryParseError("unknown predicate '" + method.text + "'", method.pos);
        }
        return c;
    }

    SelectItem parse_select_item(const StructuralQuery& q) {
        if (peek_keyword("getDefinition") && peek(1).kind == Tok::LParen) {
            pos_ += 2;
            SelectItem item{expect_variable(q).text, true};
            expect(Tok::RParen, "')'");
            return item;
        }
        SelectItem item{expect_variable(q).text, false};
        if (accept(Tok::Dot)) {
            const QToken& m = expect(Tok::Ident, "getDefinition");
            if (!iequals(m.text, "getDefinition")) {
                throw QueryParseError("unknown select function '" + m.text + "'", m.pos);
            }
            optional_empty_call();
            item.definition = true;
        }
        return item;
    }

    std::vector<QToken> toks_;
    std::size_t pos_ = 0;
};

std::string quote(const std::string& literal) {
    char q = literal.find('\'') == std::string::npos ? '\'' : '"';
    return q + literal + q;
}

} // namespace

StructuralQuery parse_query(std::string_view text) { return Parser(text).parse(); }

std::string render_query(const StructuralQuery& query) {
    std::string out = "FROM ";
    for (std::size_t i = 0; i < query.from.size(); ++i) {
        if (i) out += ", ";
        out += std::string(to_string(query.from[i].kind)) + " " + query.from[i].name;
    }
    if (!query.where.empty()) {
        out += " WHERE ";
        for (std::size_t i = 0; i < query.where.size(); ++i) {
            const Condition& c = query.where[i];
            if (i) out += " and ";
            if (c.negated) out += "not ";
            out += c.subject + "." + std::string(to_string(c.predicate));
            switch (c.predicate) {
            case Predicate::Contains: out += "(" + c.object + ")"; break;
            case Predicate::GetName: out += "() = " + quote(c.literal); break;
            case Predicate::GetScope: out += "() = " + c.object; break;
            default: out += "()"; break;
            }
        }
    }
    out += " SELECT ";
    for (std::size_t i = 0; i < query.select.size(); ++i) {
        if (i) out += ", ";
        out += query.select[i].variable;
        if (query.select[i].definition) out += ".getDefinition()";
    }
    return out;
}

std::string query_text_from_completion(std::string_view completion) {
    std::string text;
    try {
        text = extract_code(completion);
    } catch (const EmptyCompletion&) {
        return {};
    }
    static const std::regex start(R"(\bfrom\s+(module|class|function|variable)\b)", std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, start)) {
        text = text.substr(static_cast<std::size_t>(m.position(0)));
    }
    // A query ends at the first blank line.
    auto blank = text.find("\n\n");
    if (blank != std::string::npos) {
        text.resize(blank);
    }
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

StructuralQuery synthesize_query(const Diagnostic& diag, CompletionBackend& backend, const GenerationConfig& config,
                                 const RequestContext& request) {
    PromptBundle prompt = render_query_prompt(diag);
    GenerationConfig single = config;
    single.n_samples = 1;
    std::vector<std::string> responses = backend.complete(prompt, single, request);
    if (responses.empty()) {
        throw QueryRejected("backend returned no completion");
    }
    std::string text = query_text_from_completion(responses.front());
    try {
        return parse_query(text);
    } catch (const QueryParseError& ex) {
        throw QueryRejected(std::string(ex.what()) + ": " + text);
    }
}

} // namespace ctxfix
