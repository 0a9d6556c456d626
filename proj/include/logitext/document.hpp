#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace logitext {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Raw document segmentation

enum class BlockKind { Text, Code, Decl };

struct Block {
    BlockKind kind;
    std::size_t begin = 0;  // byte offset into source
    std::size_t end = 0;    // one past last byte of the block's span
    std::string payload;    // fences excluded for code/decl blocks
};

struct RawDocument {
    std::string source;
    std::vector<Block> blocks;
};

// ---------------------------------------------------------------------------
// Variables and values

enum class VarKind { Bool, String };

struct VarDecl {
    std::string name;
    VarKind kind = VarKind::Bool;
};

using Value = std::variant<bool, std::string>;

inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }

std::string value_to_string(const Value& v);

// Partial or total map from variable names to values. Keys are kept sorted,
// which makes the canonical JSON form stable.
class Assignment {
public:
    Assignment() = default;
    Assignment(std::initializer_list<std::pair<const std::string, Value>> init)
        : bindings_(init) {}

    bool contains(const std::string& name) const { return bindings_.count(name) > 0; }
    const Value& at(const std::string& name) const;
    bool bool_at(const std::string& name) const;
    const std::string& string_at(const std::string& name) const;

    void bind(const std::string& name, Value v);  // Conflict on contradicting rebind
    std::optional<Value> get(const std::string& name) const;

    std::size_t size() const { return bindings_.size(); }
    bool empty() const { return bindings_.empty(); }
    const std::map<std::string, Value>& bindings() const { return bindings_; }

    bool operator==(const Assignment& other) const = default;
    auto operator<=>(const Assignment& other) const = default;

    Json to_json() const;
    static Assignment from_json(const Json& j);

private:
    std::map<std::string, Value> bindings_;
};

struct ConflictError : std::runtime_error {
    explicit ConflictError(const std::string& var)
        : std::runtime_error("conflicting values for variable '" + var + "'"), variable(var) {}
    std::string variable;
};

struct UnboundVarError : std::runtime_error {
    explicit UnboundVarError(const std::string& var)
        : std::runtime_error("unbound variable '" + var + "'"), variable(var) {}
    std::string variable;
};

// Union of two assignments; identical duplicate bindings collapse,
// contradicting ones raise ConflictError.
Assignment merge_assignments(const Assignment& a, const Assignment& b);

// ---------------------------------------------------------------------------
// Boolean formulas

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { Var, Const, Not, And, Or, Iff };

    Kind kind;
    std::string name;               // Var name, or Iff left-hand variable
    bool value = false;             // Const
    std::vector<FormulaPtr> args;   // Not: 1, And/Or: >= 2, Iff: rhs in args[0]

    static FormulaPtr var(std::string name);
    static FormulaPtr constant(bool value);
    static FormulaPtr negation(FormulaPtr f);
    static FormulaPtr conjunction(std::vector<FormulaPtr> fs);
    static FormulaPtr disjunction(std::vector<FormulaPtr> fs);
    static FormulaPtr iff(std::string lhs_var, FormulaPtr rhs);

    // All variable names referenced, including the Iff left-hand side.
    void collect_vars(std::set<std::string>& out) const;

    Json to_json() const;
    static FormulaPtr from_json(const Json& j);
    std::string to_string() const;
};

// Total boolean evaluation; throws UnboundVarError on a missing variable.
bool eval_formula(const FormulaPtr& f, const Assignment& a);

// Three-valued evaluation over a partial assignment: nullopt = undetermined.
std::optional<bool> eval_formula_partial(const FormulaPtr& f, const Assignment& a);

// ---------------------------------------------------------------------------
// Textual constraints and parsed documents

struct NLTC {
    std::string id;        // stable identifier; equals out_var
    std::string out_var;   // boolean output variable
    std::string clause;    // whitespace-normalized clause text
    std::vector<std::pair<std::string, std::string>> deps;  // quoted subclause -> variable
    const std::string* doc_context = nullptr;  // enclosing document source

    bool reads(const std::string& var) const;
    std::vector<std::string> string_deps(const std::set<std::string>& string_vars) const;
};

struct ParsedDocument {
    std::set<std::string> bool_vars;
    std::set<std::string> string_vars;
    std::vector<FormulaPtr> formulas;
    std::vector<NLTC> nltcs;
    std::shared_ptr<RawDocument> source;
    std::vector<std::string> warnings;

    bool is_declared(const std::string& name) const {
        return bool_vars.count(name) || string_vars.count(name);
    }
    std::optional<VarKind> kind_of(const std::string& name) const;

    Json to_json() const;
};

// ---------------------------------------------------------------------------
// Solver configuration and outcomes

struct SolverConfig {
    int max_refinements = 5;       // T
    double timeout_seconds = 3000.0;
    bool cover = false;
    std::optional<int> cover_limit;
    unsigned seed = 0;
    std::optional<std::string> cache_path;
    // Cover distinctness / blocking projection; empty = derive from document
    // (variables appearing in at least one NLTC, else all bool vars).
    std::vector<std::string> projection;

    void validate() const;
};

struct Diagnostics {
    int iterations = 0;
    int propose_calls = 0;
    int verify_calls = 0;
    int cache_hits = 0;
    int models_proposed = 0;
    int models_blocked = 0;
    double wall_seconds = 0.0;

    Json to_json(bool include_wall = false) const;
};

struct CheckOutcome {
    enum class Status { Sat, Unsat, Timeout };
    Status status = Status::Unsat;
    Assignment assignment;  // total over vs ∪ us when Sat
    Diagnostics stats;

    bool sat() const { return status == Status::Sat; }
};

struct VerifyJudgment {
    std::string id;
    std::string description;
    bool target = false;
    bool predicted = false;
    std::string rationale;

    bool operator==(const VerifyJudgment&) const = default;
    Json to_json() const;
    static VerifyJudgment from_json(const Json& j);
};

// Canonical single-line JSON (sorted keys) used for CLI output and cache keys.
std::string canonical_json(const Json& j);

}  // namespace logitext
