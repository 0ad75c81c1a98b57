#pragma once

// Lightweight Python front end: a tokenizer, an indentation-aware statement
// tree, and an outline of the definitions the indexer cares about. It does not
// build expression trees; analyses that need expressions work on token runs.

#include "ctxfix/errors.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix::py {

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, EndOfFile };

struct Token {
    TokenKind kind = TokenKind::EndOfFile;
    std::string text;
    int line = 0;       // 1-based
    int column = 0;     // 0-based byte column
    int end_line = 0;   // line of the last character (multi-line strings)
    std::size_t offset = 0;
    std::size_t end_offset = 0;

    bool is_op(std::string_view op) const { return kind == TokenKind::Op && text == op; }
    bool is_name(std::string_view name) const { return kind == TokenKind::Name && text == name; }
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, int line, int column)
        : Error(message), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

bool is_keyword(std::string_view word);
bool is_builtin_name(std::string_view word);

/// Tokenizes a whole module. Throws SyntaxError on malformed input.
std::vector<Token> tokenize(std::string_view source);

/// One logical line plus the block it introduces, if any.
struct Statement {
    std::vector<Token> tokens;  // without the trailing NEWLINE
    int first_line = 0;
    int last_line = 0;
    std::vector<Statement> body;

    bool starts_with(std::string_view word) const {
        return !tokens.empty() && tokens.front().is_name(word);
    }
    /// Last line covered by this statement and its nested block.
    int block_end_line() const;
};

/// Groups tokens into statements. Semicolon-separated simple statements are split.
std::vector<Statement> parse_statements(std::string_view source);
std::vector<Statement> parse_statements(const std::vector<Token>& tokens);

enum class ParamKind { Positional, VarPositional, KeywordOnly, VarKeyword };

struct Parameter {
    std::string name;
    ParamKind kind = ParamKind::Positional;
    bool has_default = false;

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

enum class NodeKind { Module, Class, Function, Variable, Block };

/// Outline node. Block nodes stand for compound statements (if/try/for/...)
/// that may contain definitions but are not themselves indexed.
struct OutlineNode {
    NodeKind kind = NodeKind::Block;
    std::string name;
    int start_line = 0;
    int end_line = 0;
    std::optional<std::string> docstring;
    std::vector<Parameter> params;
    std::vector<std::string> decorators;
    std::vector<std::string> bases;
    std::string value;
    std::string annotation;
    bool is_async = false;
    std::vector<std::string> instance_attributes;
    std::vector<std::string> imported_names;
    bool has_star_import = false;
    std::vector<OutlineNode> children;
};

/// Parses a module into its definition outline. Throws SyntaxError.
OutlineNode parse_outline(std::string_view source);

/// Parses the tokens between the parentheses of a def header.
std::vector<Parameter> parse_parameters(const std::vector<Token>& tokens, std::size_t open_paren,
                                        std::size_t close_paren);

/// Index of the matching closing bracket for the opener at `open`, or npos.
std::size_t matching_bracket(const std::vector<Token>& tokens, std::size_t open);

/// Splits [begin, end) on commas at bracket depth zero.
std::vector<std::pair<std::size_t, std::size_t>> split_top_level(const std::vector<Token>& tokens,
                                                                 std::size_t begin, std::size_t end,
                                                                 std::string_view separator = ",");

/// Source text spanned by tokens [begin, end), with internal line breaks collapsed.
std::string token_text(std::string_view source, const std::vector<Token>& tokens, std::size_t begin,
                       std::size_t end);

/// Value of a string literal token (prefix and quotes removed, simple escapes decoded).
std::string string_literal_value(std::string_view literal);

/// Strips common indentation like inspect.cleandoc.
std::string clean_docstring(std::string_view raw);

/// Identifier tokens (keywords excluded) in source order. Falls back to a
/// regular-expression scan when the text does not tokenize.
std::vector<std::string> identifiers(std::string_view source);

} // namespace ctxfix::py
