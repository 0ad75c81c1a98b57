#include "ctxfix/python_syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_set>

namespace ctxfix::py {

namespace {

constexpr std::array kKeywords = {
    "False", "None",   "True",    "and",      "as",   "assert", "async",  "await",
    "break", "class",  "continue", "def",     "del",  "elif",   "else",   "except",
    "finally", "for",  "from",    "global",   "if",   "import", "in",     "is",
    "lambda", "nonlocal", "not",  "or",       "pass", "raise",  "return", "try",
    "while", "with",   "yield",
};

constexpr std::array kBuiltins = {
    "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray",
    "bytes", "callable", "chr", "classmethod", "compile", "complex", "copyright", "credits",
    "delattr", "dict", "dir", "divmod", "enumerate", "eval", "exec", "exit", "filter", "float",
    "format", "frozenset", "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input",
    "int", "isinstance", "issubclass", "iter", "len", "license", "list", "locals", "map", "max",
    "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print", "property",
    "quit", "range", "repr", "reversed", "round", "set", "setattr", "slice", "sorted",
    "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip", "__import__",
    "__name__", "__file__", "__doc__", "__package__", "__spec__", "__loader__", "__builtins__",
    "__debug__", "__annotations__", "__dict__", "__module__", "__qualname__", "__class__",
    "NotImplemented", "Ellipsis",
    // exceptions
    "BaseException", "BaseExceptionGroup", "Exception", "ExceptionGroup", "ArithmeticError",
    "AssertionError", "AttributeError", "BlockingIOError", "BrokenPipeError", "BufferError",
    "BytesWarning", "ChildProcessError", "ConnectionAbortedError", "ConnectionError",
    "ConnectionRefusedError", "ConnectionResetError", "DeprecationWarning", "EOFError",
    "EncodingWarning", "EnvironmentError", "FileExistsError", "FileNotFoundError",
    "FloatingPointError", "FutureWarning", "GeneratorExit", "IOError", "ImportError",
    "ImportWarning", "IndentationError", "IndexError", "InterruptedError", "IsADirectoryError",
    "KeyError", "KeyboardInterrupt", "LookupError", "MemoryError", "ModuleNotFoundError",
    "NameError", "NotADirectoryError", "NotImplementedError", "OSError", "OverflowError",
    "PendingDeprecationWarning", "PermissionError", "ProcessLookupError", "RecursionError",
    "ReferenceError", "ResourceWarning", "RuntimeError", "RuntimeWarning", "StopAsyncIteration",
    "StopIteration", "SyntaxError", "SyntaxWarning", "SystemError", "SystemExit", "TabError",
    "TimeoutError", "TypeError", "UnboundLocalError", "UnicodeDecodeError", "UnicodeEncodeError",
    "UnicodeError", "UnicodeTranslateError", "UnicodeWarning", "UserWarning", "ValueError",
    "Warning", "ZeroDivisionError",
};

constexpr std::array<std::string_view, 5> kThreeCharOps = {"**=", "//=", ">>=", "<<=", "..."};

constexpr std::array<std::string_view, 20> kTwoCharOps = {
    "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "->", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", ":=", "<>",
};

constexpr std::string_view kOneCharOps = "+-*/%@&|^~<>()[]{},:;.=";

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view prefix) {
    if (prefix.size() > 2) {
        return false;
    }
    std::string lower;
    for (char c : prefix) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return lower == "r" || lower == "b" || lower == "u" || lower == "f" || lower == "rb" ||
           lower == "br" || lower == "fr" || lower == "rf";
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        indents_.push_back(0);
        at_line_start_ = true;
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_.empty()) {
                if (!handle_indentation()) {
                    continue;
                }
            }
            char c = src_[pos_];
            if (c == '\n' || c == '\r') {
                consume_newline_char();
                if (depth_.empty() && !line_empty_) {
                    push(TokenKind::Newline, "", pos_, pos_);
                }
                next_line();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') {
                    ++pos_;
                }
                continue;
            }
            if (c == '\\') {
                std::size_t p = pos_ + 1;
                if (p < src_.size() && (src_[p] == '\n' || src_[p] == '\r')) {
                    pos_ = p;
                    consume_newline_char();
                    ++line_;
                    line_begin_ = pos_;
                    continue;
                }
                fail("unexpected character after line continuation character");
            }
            if (is_ident_start(static_cast<unsigned char>(c))) {
                lex_name_or_string();
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                lex_number();
                continue;
            }
            if (c == '"' || c == '\'') {
                lex_string(pos_, pos_);
                continue;
            }
            lex_operator();
        }
        if (!depth_.empty()) {
            const auto& open = depth_.back();
            throw SyntaxError("'" + std::string(1, open.ch) + "' was never closed", open.line,
                              open.column);
        }
        if (!line_empty_) {
            push(TokenKind::Newline, "", pos_, pos_);
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            push(TokenKind::Dedent, "", pos_, pos_);
        }
        push(TokenKind::EndOfFile, "", pos_, pos_);
        return std::move(tokens_);
    }

private:
    struct Open {
        char ch;
        int line;
        int column;
    };

    [[noreturn]] void fail(const std::string& message) const {
        throw SyntaxError(message, line_, static_cast<int>(pos_ - line_begin_));
    }

    void consume_newline_char() {
        if (src_[pos_] == '\r' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
            pos_ += 2;
        } else {
            ++pos_;
        }
    }

    void next_line() {
        ++line_;
        line_begin_ = pos_;
        if (depth_.empty()) {
            at_line_start_ = true;
            line_empty_ = true;
        }
    }

    // Returns false when the line is blank or comment-only and was skipped.
    bool handle_indentation() {
        int width = 0;
        std::size_t p = pos_;
        while (p < src_.size()) {
            char c = src_[p];
            if (c == ' ') {
                ++width;
            } else if (c == '\t') {
                width = (width / 8 + 1) * 8;
            } else if (c == '\f') {
                width = 0;
            } else {
                break;
            }
            ++p;
        }
        if (p >= src_.size()) {
            pos_ = p;
            return false;
        }
        char c = src_[p];
        if (c == '\n' || c == '\r' || c == '#') {
            pos_ = p;
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') {
                    ++pos_;
                }
            }
            if (pos_ < src_.size()) {
                consume_newline_char();
                ++line_;
                line_begin_ = pos_;
            }
            return false;
        }
        if (c == '\\' && p + 1 < src_.size() && (src_[p + 1] == '\n' || src_[p + 1] == '\r')) {
            // A continuation on an otherwise empty line; treat as indentation-neutral.
        }
        pos_ = p;
        at_line_start_ = false;
        if (width > indents_.back()) {
            indents_.push_back(width);
            push(TokenKind::Indent, "", pos_, pos_);
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                push(TokenKind::Dedent, "", pos_, pos_);
            }
            if (width != indents_.back()) {
                fail("unindent does not match any outer indentation level");
            }
        }
        return true;
    }

    void push(TokenKind kind, std::string text, std::size_t begin, std::size_t end) {
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        t.line = token_line_ ? token_line_ : line_;
        t.column = token_line_ ? token_column_ : static_cast<int>(begin - line_begin_);
        t.end_line = line_;
        t.offset = begin;
        t.end_offset = end;
        token_line_ = 0;
        if (kind != TokenKind::Newline && kind != TokenKind::Indent && kind != TokenKind::Dedent &&
            kind != TokenKind::EndOfFile) {
            line_empty_ = false;
        }
        tokens_.push_back(std::move(t));
    }

    void lex_name_or_string() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') &&
            is_string_prefix(src_.substr(start, pos_ - start))) {
            lex_string(start, pos_);
            return;
        }
        push(TokenKind::Name, std::string(src_.substr(start, pos_ - start)), start, pos_);
    }

    void lex_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
                ++pos_;
            } else if ((c == '+' || c == '-') && pos_ > start &&
                       (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
                       !(src_.substr(start, 2) == "0x" || src_.substr(start, 2) == "0X")) {
                ++pos_;
            } else {
                break;
            }
        }
        push(TokenKind::Number, std::string(src_.substr(start, pos_ - start)), start, pos_);
    }

    void lex_string(std::size_t start, std::size_t quote_pos) {
        token_line_ = line_;
        token_column_ = static_cast<int>(start - line_begin_);
        char q = src_[quote_pos];
        bool triple = quote_pos + 2 < src_.size() && src_[quote_pos + 1] == q && src_[quote_pos + 2] == q;
        pos_ = quote_pos + (triple ? 3 : 1);
        for (;;) {
            if (pos_ >= src_.size()) {
                int l = token_line_;
                int col = token_column_;
                token_line_ = 0;
                throw SyntaxError(triple ? "unterminated triple-quoted string literal"
                                         : "unterminated string literal",
                                  l, col);
            }
            char c = src_[pos_];
            if (c == '\\') {
                pos_ += 2;
                if (pos_ <= src_.size() && (src_[pos_ - 1] == '\n' || src_[pos_ - 1] == '\r')) {
                    if (src_[pos_ - 1] == '\r' && pos_ < src_.size() && src_[pos_] == '\n') {
                        ++pos_;
                    }
                    ++line_;
                    line_begin_ = pos_;
                }
                continue;
            }
            if (c == '\n' || c == '\r') {
                if (!triple) {
                    int l = token_line_;
                    int col = token_column_;
                    token_line_ = 0;
                    throw SyntaxError("unterminated string literal", l, col);
                }
                consume_newline_char();
                ++line_;
                line_begin_ = pos_;
                continue;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        push(TokenKind::String, std::string(src_.substr(start, pos_ - start)), start, pos_);
    }

    void lex_operator() {
        std::size_t start = pos_;
        std::string_view rest = src_.substr(pos_);
        for (auto op : kThreeCharOps) {
            if (rest.substr(0, 3) == op) {
                pos_ += 3;
                push(TokenKind::Op, std::string(op), start, pos_);
                return;
            }
        }
        for (auto op : kTwoCharOps) {
            if (rest.substr(0, 2) == op) {
                if (op == "<>") {
                    fail("invalid syntax");
                }
                pos_ += 2;
                push(TokenKind::Op, std::string(op), start, pos_);
                return;
            }
        }
        char c = src_[pos_];
        if (kOneCharOps.find(c) == std::string_view::npos) {
            fail(std::string("invalid character '") + c + "'");
        }
        int column = static_cast<int>(pos_ - line_begin_);
        if (c == '(' || c == '[' || c == '{') {
            depth_.push_back({c, line_, column});
        } else if (c == ')' || c == ']' || c == '}') {
            char expected = c == ')' ? '(' : (c == ']' ? '[' : '{');
            if (depth_.empty()) {
                fail(std::string("unmatched '") + c + "'");
            }
            if (depth_.back().ch != expected) {
                fail(std::string("closing parenthesis '") + c + "' does not match opening '" +
                     depth_.back().ch + "'");
            }
            depth_.pop_back();
        }
        ++pos_;
        push(TokenKind::Op, std::string(1, c), start, pos_);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::size_t line_begin_ = 0;
    bool at_line_start_ = true;
    bool line_empty_ = true;
    int token_line_ = 0;
    int token_column_ = 0;
    std::vector<int> indents_;
    std::vector<Open> depth_;
    std::vector<Token> tokens_;
};

const std::unordered_set<std::string_view>& keyword_set() {
    static const std::unordered_set<std::string_view> set(kKeywords.begin(), kKeywords.end());
    return set;
}

const std::unordered_set<std::string_view>& builtin_set() {
    static const std::unordered_set<std::string_view> set(kBuiltins.begin(), kBuiltins.end());
    return set;
}

bool is_compound_keyword(const Token& t) {
    static const std::unordered_set<std::string_view> words = {
        "if", "elif", "else", "for", "while", "try", "except", "finally", "with",
        "def", "class", "async", "match", "case"};
    return t.kind == TokenKind::Name && words.count(t.text) != 0;
}

class StatementParser {
public:
    explicit StatementParser(const std::vector<Token>& tokens) : toks_(tokens) {}

    std::vector<Statement> run() {
        auto result = parse_block(/*nested=*/false);
        return result;
    }

private:
    const Token& peek() const { return toks_[pos_]; }

    std::vector<Statement> parse_block(bool nested) {
        std::vector<Statement> out;
        while (pos_ < toks_.size()) {
            const Token& t = peek();
            if (t.kind == TokenKind::EndOfFile) {
                if (nested) {
                    return out;
                }
                ++pos_;
                return out;
            }
            if (t.kind == TokenKind::Dedent) {
                if (!nested) {
                    throw SyntaxError("unexpected dedent", t.line, t.column);
                }
                ++pos_;
                return out;
            }
            if (t.kind == TokenKind::Indent) {
                throw SyntaxError("unexpected indent", t.line, t.column);
            }
            if (t.kind == TokenKind::Newline) {
                ++pos_;
                continue;
            }
            Statement stmt;
            while (pos_ < toks_.size() && peek().kind != TokenKind::Newline &&
                   peek().kind != TokenKind::EndOfFile) {
                stmt.tokens.push_back(peek());
                ++pos_;
            }
            if (pos_ < toks_.size() && peek().kind == TokenKind::Newline) {
                ++pos_;
            }
            stmt.first_line = stmt.tokens.front().line;
            stmt.last_line = stmt.tokens.back().end_line;
            bool wants_block = stmt.tokens.back().is_op(":") && is_compound_keyword(stmt.tokens.front());
            if (wants_block) {
                if (pos_ < toks_.size() && peek().kind == TokenKind::Indent) {
                    ++pos_;
                    stmt.body = parse_block(/*nested=*/true);
                } else {
                    const Token& last = stmt.tokens.back();
                    throw SyntaxError("expected an indented block", last.line + 1, 0);
                }
            } else if (stmt.tokens.back().is_op(":")) {
                const Token& last = stmt.tokens.back();
                throw SyntaxError("invalid syntax", last.line, last.column);
            } else if (pos_ < toks_.size() && peek().kind == TokenKind::Indent) {
                throw SyntaxError("unexpected indent", peek().line, peek().column);
            }
            validate(stmt);
            split_semicolons(std::move(stmt), out);
        }
        return out;
    }

    static void validate(const Statement& stmt) {
        const auto& tk = stmt.tokens;
        std::size_t i = 0;
        if (tk[i].is_name("async") && tk.size() > 1) {
            ++i;
        }
        if (tk[i].is_name("def")) {
            if (i + 2 >= tk.size() || tk[i + 1].kind != TokenKind::Name || !tk[i + 2].is_op("(")) {
                throw SyntaxError("invalid syntax", tk[i].line, tk[i].column);
            }
        } else if (tk[i].is_name("class")) {
            if (i + 1 >= tk.size() || tk[i + 1].kind != TokenKind::Name) {
                throw SyntaxError("invalid syntax", tk[i].line, tk[i].column);
            }
        }
        // Two adjacent atoms (e.g. `x y`, `1 2`) cannot form an expression.
        for (std::size_t k = 1; k < tk.size(); ++k) {
            const Token& a = tk[k - 1];
            const Token& b = tk[k];
            bool a_atom = (a.kind == TokenKind::Name && !is_keyword(a.text)) || a.kind == TokenKind::Number;
            bool b_atom = (b.kind == TokenKind::Name && !is_keyword(b.text)) || b.kind == TokenKind::Number;
            if (a_atom && b_atom && a.text != "match" && a.text != "case" && a.text != "type" &&
                a.text != "print" && a.text != "exec") {
                throw SyntaxError("invalid syntax", b.line, b.column);
            }
        }
    }

    static void split_semicolons(Statement stmt, std::vector<Statement>& out) {
        if (!stmt.body.empty() || is_compound_keyword(stmt.tokens.front())) {
            out.push_back(std::move(stmt));
            return;
        }
        Statement cur;
        for (auto& t : stmt.tokens) {
            if (t.is_op(";")) {
                if (!cur.tokens.empty()) {
                    cur.first_line = cur.tokens.front().line;
                    cur.last_line = cur.tokens.back().end_line;
                    out.push_back(std::move(cur));
                    cur = Statement{};
                }
                continue;
            }
            cur.tokens.push_back(t);
        }
        if (!cur.tokens.empty()) {
            cur.first_line = cur.tokens.front().line;
            cur.last_line = cur.tokens.back().end_line;
            out.push_back(std::move(cur));
        }
    }

    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
};

// Index of the ':' that ends a compound-statement header, or npos.
std::size_t header_colon(const std::vector<Token>& tokens) {
    int depth = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.is_op("(") || t.is_op("[") || t.is_op("{")) {
            ++depth;
        } else if (t.is_op(")") || t.is_op("]") || t.is_op("}")) {
            --depth;
        } else if (depth == 0 && t.is_name("lambda")) {
            // Skip to the lambda's own colon.
            for (++i; i < tokens.size() && !tokens[i].is_op(":"); ++i) {
            }
        } else if (depth == 0 && t.is_op(":")) {
            return i;
        }
    }
    return std::string::npos;
}

class OutlineBuilder {
public:
    explicit OutlineBuilder(std::string_view source) : src_(source) {}

private:
    enum class Scope { Module, Class, Function };

    std::optional<std::string> docstring_of(const std::vector<Statement>& body) const {
        if (body.empty()) {
            return std::nullopt;
        }
        const auto& first = body.front();
        if (first.tokens.empty()) {
            return std::nullopt;
        }
        std::string raw;
        for (const auto& t : first.tokens) {
            if (t.kind != TokenKind::String) {
                return std::nullopt;
            }
            auto lower_prefix = t.text.substr(0, t.text.find_first_of("'\""));
            if (lower_prefix.find_first_of("bBfF") != std::string::npos) {
                return std::nullopt;
            }
            raw += string_literal_value(t.text);
        }
        return clean_docstring(raw);
    }

    std::optional<std::string> inline_docstring(const Statement& stmt, std::size_t colon) const {
        if (colon + 1 < stmt.tokens.size() && stmt.tokens[colon + 1].kind == TokenKind::String) {
            Statement tail;
            tail.tokens.assign(stmt.tokens.begin() + static_cast<long>(colon) + 1, stmt.tokens.end());
            std::vector<Statement> v;
            v.push_back(std::move(tail));
            return docstring_of(v);
        }
        return std::nullopt;
    }

    void add_children(OutlineNode& parent, const std::vector<Statement>& body, Scope scope,
                      OutlineNode& module) {
        std::vector<std::string> decorators;
        int decorator_line = 0;
        for (const auto& stmt : body) {
            const auto& tk = stmt.tokens;
            if (tk.front().is_op("@")) {
                if (decorators.empty()) {
                    decorator_line = stmt.first_line;
                }
                decorators.push_back(token_text(src_, tk, 1, tk.size()));
                continue;
            }
            std::size_t i = 0;
            bool is_async = false;
            if (tk[0].is_name("async") && tk.size() > 1 &&
                (tk[1].is_name("def") || tk[1].is_name("for") || tk[1].is_name("with"))) {
                is_async = true;
                i = 1;
            }
            if (tk[i].is_name("def")) {
                OutlineNode fn = make_function(stmt, i, is_async, scope);
                fn.decorators = std::move(decorators);
                if (decorator_line) {
                    fn.start_line = decorator_line;
                }
                decorators.clear();
                decorator_line = 0;
                parent.children.push_back(std::move(fn));
                continue;
            }
            if (tk[i].is_name("class")) {
                OutlineNode cls = make_class(stmt, module);
                cls.decorators = std::move(decorators);
                if (decorator_line) {
                    cls.start_line = decorator_line;
                }
                decorators.clear();
                decorator_line = 0;
                parent.children.push_back(std::move(cls));
                continue;
            }
            decorators.clear();
            decorator_line = 0;
            if (!stmt.body.empty()) {
                OutlineNode block;
                block.kind = NodeKind::Block;
                block.name = tk[i].text;
                block.start_line = stmt.first_line;
                block.end_line = stmt.block_end_line();
                add_children(block, stmt.body, scope, module);
                // Blocks are transparent for collected module/class facts.
                if (scope == Scope::Class) {
                    for (auto& a : block.instance_attributes) {
                        parent.instance_attributes.push_back(a);
                    }
                }
                parent.children.push_back(std::move(block));
                continue;
            }
            if (scope != Scope::Function) {
                if (tk[0].is_name("import") || tk[0].is_name("from")) {
                    if (scope == Scope::Module) {
                        record_import(stmt, module);
                    }
                    continue;
                }
                add_variables(parent, stmt);
            }
        }
    }

    void record_import(const Statement& stmt, OutlineNode& module) const {
        const auto& tk = stmt.tokens;
        if (tk[0].is_name("import")) {
            for (auto [b, e] : split_top_level(tk, 1, tk.size())) {
                if (b >= e) {
                    continue;
                }
                if (e - b >= 3 && tk[e - 2].is_name("as")) {
                    module.imported_names.push_back(tk[e - 1].text);
                } else {
                    module.imported_names.push_back(tk[b].text);
                }
            }
            return;
        }
        std::size_t imp = 1;
        while (imp < tk.size() && !tk[imp].is_name("import")) {
            ++imp;
        }
        if (imp >= tk.size()) {
            return;
        }
        std::size_t begin = imp + 1;
        std::size_t end = tk.size();
        if (begin < end && tk[begin].is_op("(")) {
            ++begin;
            --end;
        }
        for (auto [b, e] : split_top_level(tk, begin, end)) {
            if (b >= e) {
                continue;
            }
            if (tk[b].is_op("*")) {
                module.has_star_import = true;
            } else if (e - b >= 3 && tk[e - 2].is_name("as")) {
                module.imported_names.push_back(tk[e - 1].text);
            } else {
                module.imported_names.push_back(tk[b].text);
            }
        }
    }

    void add_variables(OutlineNode& parent, const Statement& stmt) const {
        const auto& tk = stmt.tokens;
        // Annotated assignment: NAME ':' annotation ['=' value]
        if (tk.size() >= 3 && tk[0].kind == TokenKind::Name && !is_keyword(tk[0].text) && tk[1].is_op(":")) {
            std::size_t eq = tk.size();
            for (std::size_t k = 2; k < tk.size(); ++k) {
                if (tk[k].is_op("=")) {
                    eq = k;
                    break;
                }
            }
            OutlineNode v;
            v.kind = NodeKind::Variable;
            v.name = tk[0].text;
            v.start_line = stmt.first_line;
            v.end_line = stmt.last_line;
            v.annotation = token_text(src_, tk, 2, eq);
            if (eq < tk.size()) {
                v.value = token_text(src_, tk, eq + 1, tk.size());
            }
            parent.children.push_back(std::move(v));
            return;
        }
        auto parts = split_top_level(tk, 0, tk.size(), "=");
        if (parts.size() < 2) {
            return;
        }
        auto [vb, ve] = parts.back();
        std::string value = token_text(src_, tk, vb, ve);
        for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
            auto [b, e] = parts[p];
            if (b < e && (tk[b].is_op("(") || tk[b].is_op("[")) && matching_bracket(tk, b) == e - 1) {
                ++b;
                --e;
            }
            for (auto [nb, ne] : split_top_level(tk, b, e)) {
                if (ne == nb + 1 && tk[nb].kind == TokenKind::Name && !is_keyword(tk[nb].text)) {
                    OutlineNode v;
                    v.kind = NodeKind::Variable;
                    v.name = tk[nb].text;
                    v.start_line = stmt.first_line;
                    v.end_line = stmt.last_line;
                    v.value = value;
                    parent.children.push_back(std::move(v));
                } else if (ne == nb + 2 && tk[nb].is_op("*") && tk[nb + 1].kind == TokenKind::Name) {
                    OutlineNode v;
                    v.kind = NodeKind::Variable;
                    v.name = tk[nb + 1].text;
                    v.start_line = stmt.first_line;
                    v.end_line = stmt.last_line;
                    v.value = value;
                    parent.children.push_back(std::move(v));
                }
            }
        }
    }

    OutlineNode make_function(const Statement& stmt, std::size_t def_index, bool is_async,
                              Scope enclosing) {
        const auto& tk = stmt.tokens;
        OutlineNode fn;
        fn.kind = NodeKind::Function;
        fn.is_async = is_async;
        fn.name = tk[def_index + 1].text;
        fn.start_line = stmt.first_line;
        fn.end_line = stmt.block_end_line();
        std::size_t open = def_index + 2;
        std::size_t close = matching_bracket(tk, open);
        if (close == std::string::npos) {
            throw SyntaxError("invalid syntax", tk[open].line, tk[open].column);
        }
        fn.params = parse_parameters(tk, open, close);
        if (stmt.body.empty()) {
            fn.docstring = inline_docstring(stmt, header_colon(tk));
        } else {
            fn.docstring = docstring_of(stmt.body);
            std::string self_name;
            if (enclosing == Scope::Class && !fn.params.empty() &&
                fn.params.front().kind == ParamKind::Positional) {
                self_name = fn.params.front().name;
            }
            if (!self_name.empty()) {
                collect_instance_attributes(stmt.body, self_name, fn.instance_attributes);
            }
            add_children(fn, stmt.body, Scope::Function, *module_);
        }
        return fn;
    }

    OutlineNode make_class(const Statement& stmt, OutlineNode& module) {
        const auto& tk = stmt.tokens;
        OutlineNode cls;
        cls.kind = NodeKind::Class;
        cls.name = tk[1].text;
        cls.start_line = stmt.first_line;
        cls.end_line = stmt.block_end_line();
        if (tk.size() > 2 && tk[2].is_op("(")) {
            std::size_t close = matching_bracket(tk, 2);
            if (close == std::string::npos) {
                throw SyntaxError("invalid syntax", tk[2].line, tk[2].column);
            }
            for (auto [b, e] : split_top_level(tk, 3, close)) {
                if (b >= e) {
                    continue;
                }
                if (e - b >= 2 && tk[b].kind == TokenKind::Name && tk[b + 1].is_op("=")) {
                    continue;  // metaclass=..., keyword arguments
                }
                cls.bases.push_back(token_text(src_, tk, b, e));
            }
        }
        if (stmt.body.empty()) {
            cls.docstring = inline_docstring(stmt, header_colon(tk));
            return cls;
        }
        cls.docstring = docstring_of(stmt.body);
        OutlineNode* saved = module_;
        module_ = &module;
        add_children(cls, stmt.body, Scope::Class, module);
        module_ = saved;
        for (auto& child : cls.children) {
            gather_attributes(child, cls.instance_attributes);
        }
        std::sort(cls.instance_attributes.begin(), cls.instance_attributes.end());
        cls.instance_attributes.erase(
            std::unique(cls.instance_attributes.begin(), cls.instance_attributes.end()),
            cls.instance_attributes.end());
        return cls;
    }

    static void gather_attributes(OutlineNode& node, std::vector<std::string>& out) {
        if (node.kind == NodeKind::Function) {
            for (auto& a : node.instance_attributes) {
                out.push_back(a);
            }
            node.instance_attributes.clear();
        } else if (node.kind == NodeKind::Block) {
            for (auto& c : node.children) {
                gather_attributes(c, out);
            }
        }
    }

    void collect_instance_attributes(const std::vector<Statement>& body, const std::string& self_name,
                                     std::vector<std::string>& out) const {
        for (const auto& stmt : body) {
            const auto& tk = stmt.tokens;
            if (tk.front().is_name("def") || tk.front().is_name("class") ||
                (tk.front().is_name("async") && tk.size() > 1 && tk[1].is_name("def"))) {
                continue;
            }
            if (!stmt.body.empty()) {
                collect_instance_attributes(stmt.body, self_name, out);
            }
            // self.x = ..., self.x: T = ..., self.x += ..., and tuple targets.
            for (std::size_t k = 0; k + 2 < tk.size(); ++k) {
                if (tk[k].is_name(self_name) && tk[k + 1].is_op(".") && tk[k + 2].kind == TokenKind::Name &&
                    (k == 0 || !tk[k - 1].is_op("."))) {
                    std::size_t after = k + 3;
                    if (after < tk.size()) {
                        const Token& n = tk[after];
                        bool assigns = n.is_op("=") || n.is_op(",") || n.is_op(":") ||
                                       (n.kind == TokenKind::Op && n.text.size() >= 2 &&
                                        n.text.back() == '=' && n.text != "==" && n.text != "<=" &&
                                        n.text != ">=" && n.text != "!=");
                        if (assigns) {
                            out.push_back(tk[k + 2].text);
                        }
                    }
                }
            }
        }
    }

    std::string_view src_;
    OutlineNode* module_ = nullptr;

public:
    OutlineNode build_root() {
        auto stmts = parse_statements(src_);
        OutlineNode root;
        root.kind = NodeKind::Module;
        root.start_line = 1;
        int lines = static_cast<int>(std::count(src_.begin(), src_.end(), '\n'));
        if (!src_.empty() && src_.back() != '\n') {
            ++lines;
        }
        root.end_line = std::max(1, lines);
        root.docstring = docstring_of(stmts);
        module_ = &root;
        add_children(root, stmts, Scope::Module, root);
        std::sort(root.imported_names.begin(), root.imported_names.end());
        root.imported_names.erase(std::unique(root.imported_names.begin(), root.imported_names.end()),
                                  root.imported_names.end());
        return root;
    }
};

} // namespace

bool is_keyword(std::string_view word) { return keyword_set().count(word) != 0; }

bool is_builtin_name(std::string_view word) { return builtin_set().count(word) != 0; }

std::vector<Token> tokenize(std::string_view source) { return Tokenizer(source).run(); }

int Statement::block_end_line() const {
    int end = last_line;
    if (!body.empty()) {
        end = std::max(end, body.back().block_end_line());
    }
    return end;
}

std::vector<Statement> parse_statements(const std::vector<Token>& tokens) {
    return StatementParser(tokens).run();
}

std::vector<Statement> parse_statements(std::string_view source) {
    auto tokens = tokenize(source);
    return parse_statements(tokens);
}

std::size_t matching_bracket(const std::vector<Token>& tokens, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.kind != TokenKind::Op) {
            continue;
        }
        if (t.text == "(" || t.text == "[" || t.text == "{") {
            ++depth;
        } else if (t.text == ")" || t.text == "]" || t.text == "}") {
            if (--depth == 0) {
                return i;
            }
        }
    }
    return std::string::npos;
}

std::vector<std::pair<std::size_t, std::size_t>> split_top_level(const std::vector<Token>& tokens,
                                                                 std::size_t begin, std::size_t end,
                                                                 std::string_view separator) {
    std::vector<std::pair<std::size_t, std::size_t>> parts;
    int depth = 0;
    std::size_t start = begin;
    bool in_lambda = false;
    for (std::size_t i = begin; i < end; ++i) {
        const Token& t = tokens[i];
        if (t.kind == TokenKind::Op) {
            if (t.text == "(" || t.text == "[" || t.text == "{") {
                ++depth;
            } else if (t.text == ")" || t.text == "]" || t.text == "}") {
                --depth;
            } else if (depth == 0 && t.text == separator && !(in_lambda && separator == ",")) {
                parts.emplace_back(start, i);
                start = i + 1;
            } else if (depth == 0 && in_lambda && t.text == ":") {
                in_lambda = false;
            }
        } else if (depth == 0 && t.is_name("lambda")) {
            in_lambda = true;
        }
    }
    if (start < end || !parts.empty()) {
        parts.emplace_back(start, end);
    }
    return parts;
}

std::vector<Parameter> parse_parameters(const std::vector<Token>& tokens, std::size_t open_paren,
                                        std::size_t close_paren) {
    std::vector<Parameter> params;
    bool keyword_only = false;
    for (auto [b, e] : split_top_level(tokens, open_paren + 1, close_paren)) {
        if (b >= e) {
            continue;
        }
        const Token& first = tokens[b];
        if (first.is_op("/")) {
            continue;
        }
        Parameter p;
        std::size_t name_at = b;
        if (first.is_op("*")) {
            if (e == b + 1) {
                keyword_only = true;
                continue;
            }
            p.kind = ParamKind::VarPositional;
            name_at = b + 1;
            keyword_only = true;
        } else if (first.is_op("**")) {
            p.kind = ParamKind::VarKeyword;
            name_at = b + 1;
        } else {
            p.kind = keyword_only ? ParamKind::KeywordOnly : ParamKind::Positional;
        }
        if (name_at >= e || tokens[name_at].kind != TokenKind::Name) {
            throw SyntaxError("invalid syntax", first.line, first.column);
        }
        p.name = tokens[name_at].text;
        int depth = 0;
        for (std::size_t k = name_at + 1; k < e; ++k) {
            const Token& t = tokens[k];
            if (t.is_op("(") || t.is_op("[") || t.is_op("{")) {
                ++depth;
            } else if (t.is_op(")") || t.is_op("]") || t.is_op("}")) {
                --depth;
            } else if (depth == 0 && t.is_op("=")) {
                p.has_default = true;
                break;
            }
        }
        params.push_back(std::move(p));
    }
    return params;
}

std::string token_text(std::string_view source, const std::vector<Token>& tokens, std::size_t begin,
                       std::size_t end) {
    if (begin >= end || end > tokens.size()) {
        return {};
    }
    std::size_t from = tokens[begin].offset;
    std::size_t to = tokens[end - 1].end_offset;
    std::string_view raw = source.substr(from, to - from);
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c != '\n' && c != '\r') {
            out.push_back(c);
            continue;
        }
        while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) {
            out.pop_back();
        }
        while (i + 1 < raw.size() && (raw[i + 1] == ' ' || raw[i + 1] == '\t' || raw[i + 1] == '\n' ||
                                      raw[i + 1] == '\r')) {
            ++i;
        }
        if (!out.empty() && out.back() != '(' && out.back() != '[' && out.back() != '{') {
            out.push_back(' ');
        }
    }
    return out;
}

std::string string_literal_value(std::string_view literal) {
    std::size_t q = literal.find_first_of("'\"");
    if (q == std::string_view::npos) {
        return std::string(literal);
    }
    std::string_view prefix = literal.substr(0, q);
    bool raw = prefix.find_first_of("rR") != std::string_view::npos;
    char quote = literal[q];
    std::size_t qlen = (literal.size() >= q + 6 && literal[q + 1] == quote && literal[q + 2] == quote) ? 3 : 1;
    if (literal.size() < q + 2 * qlen) {
        return {};
    }
    std::string_view body = literal.substr(q + qlen, literal.size() - q - 2 * qlen);
    if (raw) {
        return std::string(body);
    }
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\' || i + 1 >= body.size()) {
            out.push_back(c);
            continue;
        }
        char n = body[++i];
        switch (n) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case '"': out.push_back('"'); break;
        case '\n': break;
        default:
            out.push_back('\\');
            out.push_back(n);
        }
    }
    return out;
}

std::string clean_docstring(std::string_view raw) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : raw) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c == '\t' ? ' ' : c);
        }
    }
    lines.push_back(cur);
    std::size_t margin = std::string::npos;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& l = lines[i];
        std::size_t first = l.find_first_not_of(' ');
        if (first != std::string::npos) {
            margin = std::min(margin, first);
        }
    }
    auto trim_left = [](std::string& s) {
        std::size_t f = s.find_first_not_of(' ');
        s = f == std::string::npos ? std::string() : s.substr(f);
    };
    trim_left(lines[0]);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (margin != std::string::npos && lines[i].size() >= margin) {
            lines[i] = lines[i].substr(margin);
        } else {
            trim_left(lines[i]);
        }
    }
    for (auto& l : lines) {
        while (!l.empty() && l.back() == ' ') {
            l.pop_back();
        }
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    while (!lines.empty() && lines.front().empty()) {
        lines.erase(lines.begin());
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) {
            out.push_back('\n');
        }
        out += lines[i];
    }
    return out;
}

OutlineNode parse_outline(std::string_view source) { return OutlineBuilder(source).build_root(); }

std::vector<std::string> identifiers(std::string_view source) {
    std::vector<std::string> out;
    try {
        for (const auto& t : tokenize(source)) {
            if (t.kind == TokenKind::Name && !is_keyword(t.text)) {
                out.push_back(t.text);
            }
        }
        return out;
    } catch (const SyntaxError&) {
        out.clear();
    }
    static const std::regex ident(R"([A-Za-z_][A-Za-z0-9_]*)");
    std::string text(source);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), ident); it != std::sregex_iterator(); ++it) {
        std::string word = it->str();
        if (!is_keyword(word)) {
            out.push_back(std::move(word));
        }
    }
    return out;
}

} // namespace ctxfix::py
