#pragma once

#include <string>
#include <vector>

#include "logitext/document.hpp"

namespace logitext {

struct ParseError : std::runtime_error {
    ParseError(std::string message, std::size_t line = 0, std::size_t col = 0)
        : std::runtime_error(line ? message + " (line " + std::to_string(line) + ", col " +
                                        std::to_string(col) + ")"
                                  : message),
          line(line),
          col(col) {}
    std::size_t line = 0;
    std::size_t col = 0;
};

// One textual let binding, before NLTC conversion / quantifier expansion.
struct LetBinding {
    std::string out_var;
    std::string clause;  // raw clause text between [[ ]]
    std::vector<std::pair<std::string, std::string>> where_clauses;
};

struct QuantifierTerm {
    enum class Kind { ForAll, ForSome };
    Kind kind;
    std::vector<std::string> items;  // bracketed clause texts, in order
    std::size_t begin = 0;           // region span within the host clause
    std::size_t end = 0;
};

// Collapse whitespace runs to single spaces and trim.
std::string normalize_whitespace(const std::string& text);

// Split source on triple-backtick fences. The leading fenced (v1,...,vn)
// header becomes a DeclBlock; everything else alternates Text/Code.
RawDocument tokenize_blocks(const std::string& source);

std::vector<VarDecl> parse_declarations(const Block& decl_block);

// Parses the interior of a {{ ... }} let term.
LetBinding parse_let(const std::string& term);

// Finds a {{forall ...}} / {{forsome ...}} region in a clause, if any.
std::optional<QuantifierTerm> find_quantifier(const std::string& clause);

struct QuantifierExpansion {
    std::vector<LetBinding> children;  // <host>_q<i>, 1-based
    FormulaPtr formula;                // Iff(host, Or/And(children))
};
QuantifierExpansion expand_quantifier(const QuantifierTerm& q, const LetBinding& host);

// Newline-separated `v = expr` statements; '#' starts a comment.
std::vector<FormulaPtr> parse_code(const Block& code_block);

ParsedDocument parse_document(const std::string& source);

}  // namespace logitext
