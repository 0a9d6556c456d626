#include "logitext/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace logitext {

namespace {

constexpr const char* kFence = "```";

std::pair<std::size_t, std::size_t> line_col(const std::string& source, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < source.size(); ++i) {
        if (source[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool valid_identifier(const std::string& s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    return std::all_of(s.begin() + 1, s.end(), is_ident_char);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool whitespace_only(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::string normalize_whitespace(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_ws = true;  // trims leading whitespace
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

RawDocument tokenize_blocks(const std::string& source) {
    if (source.empty()) throw ParseError("EmptyDocument: document has no content");

    RawDocument raw;
    raw.source = source;

    // Offsets of fence delimiters, in order.
    std::vector<std::size_t> fences;
    for (std::size_t pos = source.find(kFence); pos != std::string::npos;
         pos = source.find(kFence, pos + 3))
        fences.push_back(pos);

    if (fences.size() % 2 != 0) {
        auto [line, col] = line_col(source, fences.back());
        throw ParseError("UnterminatedFence: code fence opened but never closed", line, col);
    }

    struct Segment {
        bool fenced;
        std::size_t begin, end;  // span including fences for fenced segments
    };
    std::vector<Segment> segments;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i + 1 < fences.size(); i += 2) {
        std::size_t open = fences[i], close = fences[i + 1];
        if (open > cursor) segments.push_back({false, cursor, open});
        segments.push_back({true, open, close + 3});
        cursor = close + 3;
    }
    if (cursor < source.size()) segments.push_back({false, cursor, source.size()});

    bool first_fenced = true;
    std::size_t pending_ws_begin = std::string::npos;  // leading whitespace to fold forward
    for (const auto& seg : segments) {
        std::string payload = source.substr(seg.begin, seg.end - seg.begin);
        if (!seg.fenced) {
            // Whitespace-only gaps extend an adjacent block's span rather than
            // becoming text blocks of their own, so block counts stay stable
            // regardless of trailing newlines.
            if (whitespace_only(payload)) {
                if (!raw.blocks.empty())
                    raw.blocks.back().end = seg.end;
                else
                    pending_ws_begin = seg.begin;
                continue;
            }
            Block b{BlockKind::Text, seg.begin, seg.end, payload};
            if (pending_ws_begin != std::string::npos) {
                b.begin = pending_ws_begin;
                b.payload = source.substr(b.begin, b.end - b.begin);
                pending_ws_begin = std::string::npos;
            }
            raw.blocks.push_back(std::move(b));
            continue;
        }

        std::size_t body_begin = seg.begin + 3, body_end = seg.end - 3;
        std::string body = source.substr(body_begin, body_end - body_begin);
        std::size_t span_begin =
            pending_ws_begin != std::string::npos ? pending_ws_begin : seg.begin;
        pending_ws_begin = std::string::npos;

        std::string trimmed = trim(body);
        if (first_fenced && !trimmed.empty() && trimmed[0] == '(') {
            // Declaration header; anything after the closing paren is code.
            std::size_t close_paren = body.find(')');
            if (close_paren == std::string::npos) {
                auto [line, col] = line_col(source, body_begin);
                throw ParseError("BadIdentifier: unclosed variable declaration list", line, col);
            }
            std::string decl_text = body.substr(0, close_paren + 1);
            std::string rest = body.substr(close_paren + 1);
            if (whitespace_only(rest)) {
                raw.blocks.push_back({BlockKind::Decl, span_begin, seg.end, decl_text});
            } else {
                std::size_t split = body_begin + close_paren + 1;
                raw.blocks.push_back({BlockKind::Decl, span_begin, split, decl_text});
                raw.blocks.push_back({BlockKind::Code, split, seg.end, rest});
            }
        } else {
            raw.blocks.push_back({BlockKind::Code, span_begin, seg.end, body});
        }
        first_fenced = false;
    }
    if (pending_ws_begin != std::string::npos && !raw.blocks.empty())
        raw.blocks.back().end = source.size();
    else if (raw.blocks.empty())
        throw ParseError("EmptyDocument: document has no content");

    return raw;
}

std::vector<VarDecl> parse_declarations(const Block& decl_block) {
    std::string text = trim(decl_block.payload);
    if (text.size() < 2 || text.front() != '(' || text.back() != ')')
        throw ParseError("BadIdentifier: declaration list must be parenthesized");
    text = text.substr(1, text.size() - 2);

    std::vector<VarDecl> decls;
    std::set<std::string> seen;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty()) throw ParseError("BadIdentifier: empty declaration entry");
        VarDecl d;
        std::size_t colon = token.find(':');
        if (colon != std::string::npos) {
            d.name = trim(token.substr(0, colon));
            std::string suffix = trim(token.substr(colon + 1));
            if (suffix != "str")
                throw ParseError("BadIdentifier: unknown type suffix ':" + suffix + "'");
            d.kind = VarKind::String;
        } else {
            d.name = token;
            d.kind = VarKind::Bool;
        }
        if (!valid_identifier(d.name))
            throw ParseError("BadIdentifier: '" + d.name + "' is not a valid variable name");
        if (!seen.insert(d.name).second)
            throw ParseError("DuplicateDecl: variable '" + d.name + "' declared twice");
        decls.push_back(std::move(d));
    }
    if (decls.empty()) throw ParseError("BadIdentifier: empty declaration list");
    return decls;
}

namespace {

// Scans a balanced [[ ... ]] region starting right after the opening brackets;
// returns the interior and the offset one past the closing brackets.
std::pair<std::string, std::size_t> scan_bracketed(const std::string& text, std::size_t start) {
    int depth = 1;
    std::size_t pos = start;
    while (pos < text.size()) {
        if (text.compare(pos, 2, "[[") == 0) {
            ++depth;
            pos += 2;
        } else if (text.compare(pos, 2, "]]") == 0) {
            --depth;
            pos += 2;
            if (depth == 0) return {text.substr(start, pos - 2 - start), pos};
        } else {
            ++pos;
        }
    }
    throw ParseError("MissingClauseBrackets: '[[' without matching ']]'");
}

void skip_ws(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

std::string read_ident(const std::string& s, std::size_t& pos) {
    std::size_t start = pos;
    while (pos < s.size() && is_ident_char(s[pos])) ++pos;
    return s.substr(start, pos - start);
}

bool consume_keyword(const std::string& s, std::size_t& pos, const std::string& kw) {
    if (s.compare(pos, kw.size(), kw) != 0) return false;
    std::size_t after = pos + kw.size();
    if (after < s.size() && is_ident_char(s[after])) return false;
    pos = after;
    return true;
}

}  // namespace

LetBinding parse_let(const std::string& term) {
    std::size_t pos = 0;
    skip_ws(term, pos);
    if (!consume_keyword(term, pos, "let"))
        throw ParseError("MissingClauseBrackets: let term must start with 'let'");
    skip_ws(term, pos);

    LetBinding b;
    b.out_var = read_ident(term, pos);
    if (!valid_identifier(b.out_var))
        throw ParseError("BadIdentifier: invalid let output variable");
    skip_ws(term, pos);
    if (pos >= term.size() || term[pos] != '=')
        throw ParseError("MissingClauseBrackets: expected '=' after let variable");
    ++pos;
    skip_ws(term, pos);
    if (term.compare(pos, 2, "[[") != 0)
        throw ParseError("MissingClauseBrackets: expected '[[' to open clause");
    auto [clause, after] = scan_bracketed(term, pos + 2);
    b.clause = clause;
    pos = after;

    skip_ws(term, pos);
    if (pos >= term.size()) return b;  // lenient: zero where-clauses accepted
    if (!consume_keyword(term, pos, "where"))
        throw ParseError("BadQuote: unexpected text after clause (expected 'where')");
    while (true) {
        skip_ws(term, pos);
        if (pos >= term.size() || term[pos] != '"')
            throw ParseError("BadQuote: expected quoted subclause in where-list");
        std::size_t close = term.find('"', pos + 1);
        if (close == std::string::npos)
            throw ParseError("BadQuote: unterminated quoted subclause");
        std::string quoted = term.substr(pos + 1, close - pos - 1);
        if (quoted.empty()) throw ParseError("BadQuote: empty quoted subclause");
        pos = close + 1;
        skip_ws(term, pos);
        if (!consume_keyword(term, pos, "is"))
            throw ParseError("MissingWhereTarget: expected 'is' after quoted subclause");
        skip_ws(term, pos);
        std::string target = read_ident(term, pos);
        if (!valid_identifier(target))
            throw ParseError("MissingWhereTarget: expected variable after 'is'");
        b.where_clauses.emplace_back(quoted, target);
        skip_ws(term, pos);
        if (pos >= term.size()) break;
        if (!consume_keyword(term, pos, "and"))
            throw ParseError("BadQuote: expected 'and' between where-clauses");
    }
    return b;
}

std::optional<QuantifierTerm> find_quantifier(const std::string& clause) {
    std::size_t open = clause.find("{{");
    if (open == std::string::npos) return std::nullopt;

    std::size_t pos = open + 2;
    skip_ws(clause, pos);
    QuantifierTerm q;
    if (consume_keyword(clause, pos, "forall"))
        q.kind = QuantifierTerm::Kind::ForAll;
    else if (consume_keyword(clause, pos, "forsome"))
        q.kind = QuantifierTerm::Kind::ForSome;
    else
        throw ParseError("SyntaxError: only forall/forsome terms may be nested in a clause");

    // Matching }} with nesting; nested {{ inside the region is rejected below.
    int depth = 1;
    std::size_t scan = pos, close = std::string::npos;
    while (scan < clause.size()) {
        if (clause.compare(scan, 2, "{{") == 0) {
            ++depth;
            scan += 2;
        } else if (clause.compare(scan, 2, "}}") == 0) {
            --depth;
            if (depth == 0) {
                close = scan;
                break;
            }
            scan += 2;
        } else {
            ++scan;
        }
    }
    if (close == std::string::npos)
        throw ParseError("SyntaxError: quantifier '{{' without matching '}}'");

    std::string interior = clause.substr(pos, close - pos);
    if (interior.find("{{") != std::string::npos)
        throw ParseError("SyntaxError: nested quantifiers are not supported");
    if (clause.find("{{", close + 2) != std::string::npos)
        throw ParseError("SyntaxError: multiple quantifiers in one clause are not supported");

    std::size_t item_pos = 0;
    while ((item_pos = interior.find("[[", item_pos)) != std::string::npos) {
        auto [item, after] = scan_bracketed(interior, item_pos + 2);
        q.items.push_back(item);
        item_pos = after;
    }
    q.begin = open;
    q.end = close + 2;
    return q;
}

QuantifierExpansion expand_quantifier(const QuantifierTerm& q, const LetBinding& host) {
    if (q.items.empty())
        throw ParseError("EmptyQuantifier: quantifier must contain at least one [[item]]");

    QuantifierExpansion out;
    std::vector<FormulaPtr> child_refs;
    for (std::size_t i = 0; i < q.items.size(); ++i) {
        LetBinding child;
        child.out_var = host.out_var + "_q" + std::to_string(i + 1);
        std::string clause = host.clause;
        clause.replace(q.begin, q.end - q.begin, q.items[i]);
        child.clause = clause;
        child.where_clauses = host.where_clauses;
        child_refs.push_back(Formula::var(child.out_var));
        out.children.push_back(std::move(child));
    }
    FormulaPtr body = q.kind == QuantifierTerm::Kind::ForSome
                          ? Formula::disjunction(std::move(child_refs))
                          : Formula::conjunction(std::move(child_refs));
    out.formula = Formula::iff(host.out_var, body);
    return out;
}

// ---------------------------------------------------------------------------
// Code-block expression parsing: precedence not > and > or.

namespace {

struct CodeToken {
    enum class Kind { Ident, True, False, And, Or, Not, LParen, RParen, End };
    Kind kind;
    std::string text;
    std::size_t col;
};

std::vector<CodeToken> lex_code_line(const std::string& line, std::size_t line_no) {
    std::vector<CodeToken> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        char c = line[pos];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
            continue;
        }
        if (c == '(') {
            tokens.push_back({CodeToken::Kind::LParen, "(", pos});
            ++pos;
        } else if (c == ')') {
            tokens.push_back({CodeToken::Kind::RParen, ")", pos});
            ++pos;
        } else if (is_ident_start(c)) {
            std::size_t start = pos;
            std::string word = read_ident(line, pos);
            CodeToken::Kind kind = CodeToken::Kind::Ident;
            if (word == "and")
                kind = CodeToken::Kind::And;
            else if (word == "or")
                kind = CodeToken::Kind::Or;
            else if (word == "not")
                kind = CodeToken::Kind::Not;
            else if (word == "True")
                kind = CodeToken::Kind::True;
            else if (word == "False")
                kind = CodeToken::Kind::False;
            tokens.push_back({kind, word, start});
        } else {
            throw ParseError("SyntaxError: unexpected character '" + std::string(1, c) + "'",
                             line_no, pos + 1);
        }
    }
    tokens.push_back({CodeToken::Kind::End, "", line.size()});
    return tokens;
}

class ExprParser {
public:
    ExprParser(std::vector<CodeToken> tokens, std::size_t line_no)
        : tokens_(std::move(tokens)), line_(line_no) {}

    FormulaPtr parse() {
        FormulaPtr f = parse_or();
        if (peek().kind != CodeToken::Kind::End)
            throw ParseError("SyntaxError: trailing tokens after expression", line_,
                             peek().col + 1);
        return f;
    }

private:
    const CodeToken& peek() const { return tokens_[pos_]; }
    const CodeToken& advance() { return tokens_[pos_++]; }

    FormulaPtr parse_or() {
        std::vector<FormulaPtr> parts{parse_and()};
        while (peek().kind == CodeToken::Kind::Or) {
            advance();
            parts.push_back(parse_and());
        }
        return Formula::disjunction(std::move(parts));
    }

    FormulaPtr parse_and() {
        std::vector<FormulaPtr> parts{parse_not()};
        while (peek().kind == CodeToken::Kind::And) {
            advance();
            parts.push_back(parse_not());
        }
        return Formula::conjunction(std::move(parts));
    }

    FormulaPtr parse_not() {
        if (peek().kind == CodeToken::Kind::Not) {
            advance();
            return Formula::negation(parse_not());
        }
        return parse_atom();
    }

    FormulaPtr parse_atom() {
        const CodeToken& t = advance();
        switch (t.kind) {
            case CodeToken::Kind::Ident: return Formula::var(t.text);
            case CodeToken::Kind::True: return Formula::constant(true);
            case CodeToken::Kind::False: return Formula::constant(false);
            case CodeToken::Kind::LParen: {
                FormulaPtr f = parse_or();
                if (peek().kind != CodeToken::Kind::RParen)
                    throw ParseError("SyntaxError: expected ')'", line_, peek().col + 1);
                advance();
                return f;
            }
            default:
                throw ParseError("SyntaxError: unexpected token '" + t.text + "'", line_,
                                 t.col + 1);
        }
    }

    std::vector<CodeToken> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

}  // namespace

std::vector<FormulaPtr> parse_code(const Block& code_block) {
    std::vector<FormulaPtr> out;
    std::stringstream ss(code_block.payload);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (whitespace_only(line)) continue;

        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("SyntaxError: expected 'var = expr' statement", line_no, 1);
        std::string lhs = trim(line.substr(0, eq));
        if (!valid_identifier(lhs))
            throw ParseError("SyntaxError: invalid left-hand variable '" + lhs + "'", line_no, 1);
        ExprParser parser(lex_code_line(line.substr(eq + 1), line_no), line_no);
        out.push_back(Formula::iff(lhs, parser.parse()));
    }
    return out;
}

// ---------------------------------------------------------------------------

ParsedDocument parse_document(const std::string& source) {
    ParsedDocument doc;
    doc.source = std::make_shared<RawDocument>(tokenize_blocks(source));

    std::map<std::string, VarKind> declared;
    for (const auto& block : doc.source->blocks) {
        if (block.kind != BlockKind::Decl) continue;
        for (const auto& d : parse_declarations(block)) declared.emplace(d.name, d.kind);
    }

    auto declare_bool = [&](const std::string& name, bool warn) {
        auto it = declared.find(name);
        if (it != declared.end()) {
            if (it->second == VarKind::String)
                throw ParseError("SyntaxError: string variable '" + name +
                                 "' used where a boolean is required");
            return;
        }
        declared.emplace(name, VarKind::Bool);
        if (warn)
            doc.warnings.push_back("auto-declared boolean variable '" + name +
                                   "' (not in declaration header)");
    };

    auto add_nltc = [&](const LetBinding& b) {
        declare_bool(b.out_var, false);
        NLTC n;
        n.id = b.out_var;
        n.out_var = b.out_var;
        n.clause = normalize_whitespace(b.clause);
        n.deps = b.where_clauses;
        n.doc_context = &doc.source->source;
        if (n.clause.empty()) throw ParseError("MissingClauseBrackets: empty clause text");
        for (const auto& existing : doc.nltcs)
            if (existing.id == n.id)
                throw ParseError("DuplicateDecl: '" + n.id + "' bound by two let terms");
        for (const auto& [quoted, target] : n.deps)
            if (n.clause.find(normalize_whitespace(quoted)) == std::string::npos)
                doc.warnings.push_back("where-clause \"" + quoted +
                                       "\" does not appear verbatim in clause of '" + n.id + "'");
        doc.nltcs.push_back(std::move(n));
    };

    for (const auto& block : doc.source->blocks) {
        if (block.kind == BlockKind::Code) {
            for (auto& f : parse_code(block)) {
                std::set<std::string> vars;
                f->collect_vars(vars);
                for (const auto& v : vars) declare_bool(v, true);
                doc.formulas.push_back(std::move(f));
            }
            continue;
        }
        if (block.kind != BlockKind::Text) continue;

        const std::string& text = block.payload;
        std::size_t pos = 0;
        while ((pos = text.find("{{", pos)) != std::string::npos) {
            int depth = 1;
            std::size_t scan = pos + 2, close = std::string::npos;
            while (scan < text.size()) {
                if (text.compare(scan, 2, "{{") == 0) {
                    ++depth;
                    scan += 2;
                } else if (text.compare(scan, 2, "}}") == 0) {
                    --depth;
                    if (depth == 0) {
                        close = scan;
                        break;
                    }
                    scan += 2;
                } else {
                    ++scan;
                }
            }
            if (close == std::string::npos) {
                auto [line, col] = line_col(source, block.begin + pos);
                throw ParseError("SyntaxError: '{{' without matching '}}'", line, col);
            }
            std::string term = text.substr(pos + 2, close - pos - 2);
            std::size_t probe = 0;
            skip_ws(term, probe);
            if (term.compare(probe, 3, "let") == 0) {
                LetBinding b = parse_let(term);
                if (auto q = find_quantifier(b.clause)) {
                    QuantifierExpansion exp = expand_quantifier(*q, b);
                    declare_bool(b.out_var, false);
                    for (const auto& child : exp.children) add_nltc(child);
                    doc.formulas.push_back(exp.formula);
                } else {
                    add_nltc(b);
                }
            } else {
                auto [line, col] = line_col(source, block.begin + pos);
                throw ParseError(
                    "SyntaxError: quantifier terms are only supported inside a let clause", line,
                    col);
            }
            pos = close + 2;
        }
    }

    for (const auto& [name, kind] : declared) {
        if (kind == VarKind::Bool)
            doc.bool_vars.insert(name);
        else
            doc.string_vars.insert(name);
    }

    for (const auto& n : doc.nltcs)
        for (const auto& [quoted, target] : n.deps)
            if (!declared.count(target))
                throw ParseError("UnresolvedVar: '" + target + "' referenced by '" + n.id +
                                 "' is not declared");

    return doc;
}

}  // namespace logitext
