#include "logitext/document.hpp"

#include <algorithm>
#include <sstream>

namespace logitext {

std::string value_to_string(const Value& v) {
    if (is_bool(v)) return std::get<bool>(v) ? "True" : "False";
    return std::get<std::string>(v);
}

const Value& Assignment::at(const std::string& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) throw UnboundVarError(name);
    return it->second;
}

bool Assignment::bool_at(const std::string& name) const {
    const Value& v = at(name);
    if (!is_bool(v)) throw std::runtime_error("variable '" + name + "' is not boolean");
    return std::get<bool>(v);
}

const std::string& Assignment::string_at(const std::string& name) const {
    const Value& v = at(name);
    if (is_bool(v)) throw std::runtime_error("variable '" + name + "' is not a string");
    return std::get<std::string>(v);
}

void Assignment::bind(const std::string& name, Value v) {
    auto it = bindings_.find(name);
    if (it != bindings_.end()) {
        if (it->second != v) throw ConflictError(name);
        return;
    }
    bindings_.emplace(name, std::move(v));
}

std::optional<Value> Assignment::get(const std::string& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
}

Json Assignment::to_json() const {
    Json j = Json::object();
    for (const auto& [name, v] : bindings_) {
        if (is_bool(v))
            j[name] = std::get<bool>(v);
        else
            j[name] = std::get<std::string>(v);
    }
    return j;
}

Assignment Assignment::from_json(const Json& j) {
    Assignment a;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_boolean())
            a.bind(it.key(), it.value().get<bool>());
        else if (it.value().is_string())
            a.bind(it.key(), it.value().get<std::string>());
        else
            throw std::runtime_error("assignment value for '" + it.key() +
                                     "' must be a boolean or string");
    }
    return a;
}

Assignment merge_assignments(const Assignment& a, const Assignment& b) {
    Assignment out = a;
    for (const auto& [name, v] : b.bindings()) out.bind(name, v);
    return out;
}

// ---------------------------------------------------------------------------
// Formula

FormulaPtr Formula::var(std::string name) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Var;
    f->name = std::move(name);
    return f;
}

FormulaPtr Formula::constant(bool value) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Const;
    f->value = value;
    return f;
}

FormulaPtr Formula::negation(FormulaPtr inner) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Not;
    f->args.push_back(std::move(inner));
    return f;
}

static FormulaPtr make_nary(Formula::Kind kind, std::vector<FormulaPtr> fs) {
    if (fs.empty()) throw std::invalid_argument("n-ary connective with no children");
    if (fs.size() == 1) return fs.front();
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->args = std::move(fs);
    return f;
}

FormulaPtr Formula::conjunction(std::vector<FormulaPtr> fs) {
    return make_nary(Kind::And, std::move(fs));
}

FormulaPtr Formula::disjunction(std::vector<FormulaPtr> fs) {
    return make_nary(Kind::Or, std::move(fs));
}

FormulaPtr Formula::iff(std::string lhs_var, FormulaPtr rhs) {
    auto f = std::make_shared<Formula>();
    f->kind = Kind::Iff;
    f->name = std::move(lhs_var);
    f->args.push_back(std::move(rhs));
    return f;
}

void Formula::collect_vars(std::set<std::string>& out) const {
    switch (kind) {
        case Kind::Var: out.insert(name); break;
        case Kind::Const: break;
        case Kind::Iff: out.insert(name); [[fallthrough]];
        default:
            for (const auto& a : args) a->collect_vars(out);
    }
}

Json Formula::to_json() const {
    switch (kind) {
        case Kind::Var: return Json{{"var", name}};
        case Kind::Const: return Json{{"const", value}};
        case Kind::Not: return Json{{"not", args[0]->to_json()}};
        case Kind::And: {
            Json kids = Json::array();
            for (const auto& a : args) kids.push_back(a->to_json());
            return Json{{"and", kids}};
        }
        case Kind::Or: {
            Json kids = Json::array();
            for (const auto& a : args) kids.push_back(a->to_json());
            return Json{{"or", kids}};
        }
        case Kind::Iff: return Json{{"iff", Json::array({name, args[0]->to_json()})}};
    }
    throw std::logic_error("unreachable");
}

FormulaPtr Formula::from_json(const Json& j) {
    if (j.contains("var")) return var(j["var"].get<std::string>());
    if (j.contains("const")) return constant(j["const"].get<bool>());
    if (j.contains("not")) return negation(from_json(j["not"]));
    if (j.contains("and")) {
        std::vector<FormulaPtr> kids;
        for (const auto& k : j["and"]) kids.push_back(from_json(k));
        return conjunction(std::move(kids));
    }
    if (j.contains("or")) {
        std::vector<FormulaPtr> kids;
        for (const auto& k : j["or"]) kids.push_back(from_json(k));
        return disjunction(std::move(kids));
    }
    if (j.contains("iff"))
        return iff(j["iff"][0].get<std::string>(), from_json(j["iff"][1]));
    throw std::runtime_error("malformed formula JSON: " + j.dump());
}

std::string Formula::to_string() const {
    std::ostringstream os;
    auto join = [&](const char* op) {
        os << "(";
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) os << " " << op << " ";
            os << args[i]->to_string();
        }
        os << ")";
    };
    switch (kind) {
        case Kind::Var: os << name; break;
        case Kind::Const: os << (value ? "True" : "False"); break;
        case Kind::Not: os << "(not " << args[0]->to_string() << ")"; break;
        case Kind::And: join("and"); break;
        case Kind::Or: join("or"); break;
        case Kind::Iff: os << name << " = " << args[0]->to_string(); break;
    }
    return os.str();
}

bool eval_formula(const FormulaPtr& f, const Assignment& a) {
    switch (f->kind) {
        case Formula::Kind::Var: return a.bool_at(f->name);
        case Formula::Kind::Const: return f->value;
        case Formula::Kind::Not: return !eval_formula(f->args[0], a);
        case Formula::Kind::And:
            return std::all_of(f->args.begin(), f->args.end(),
                               [&](const FormulaPtr& g) { return eval_formula(g, a); });
        case Formula::Kind::Or:
            return std::any_of(f->args.begin(), f->args.end(),
                               [&](const FormulaPtr& g) { return eval_formula(g, a); });
        case Formula::Kind::Iff: return a.bool_at(f->name) == eval_formula(f->args[0], a);
    }
    throw std::logic_error("unreachable");
}

std::optional<bool> eval_formula_partial(const FormulaPtr& f, const Assignment& a) {
    switch (f->kind) {
        case Formula::Kind::Var: {
            auto v = a.get(f->name);
            if (!v) return std::nullopt;
            return std::get<bool>(*v);
        }
        case Formula::Kind::Const: return f->value;
        case Formula::Kind::Not: {
            auto v = eval_formula_partial(f->args[0], a);
            if (!v) return std::nullopt;
            return !*v;
        }
        case Formula::Kind::And: {
            bool all_known = true;
            for (const auto& g : f->args) {
                auto v = eval_formula_partial(g, a);
                if (!v)
                    all_known = false;
                else if (!*v)
                    return false;
            }
            if (all_known) return true;
            return std::nullopt;
        }
        case Formula::Kind::Or: {
            bool all_known = true;
            for (const auto& g : f->args) {
                auto v = eval_formula_partial(g, a);
                if (!v)
                    all_known = false;
                else if (*v)
                    return true;
            }
            if (all_known) return false;
            return std::nullopt;
        }
        case Formula::Kind::Iff: {
            auto lhs = a.get(f->name);
            auto rhs = eval_formula_partial(f->args[0], a);
            if (!lhs || !rhs) return std::nullopt;
            return std::get<bool>(*lhs) == *rhs;
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// NLTC / ParsedDocument

bool NLTC::reads(const std::string& var) const {
    return std::any_of(deps.begin(), deps.end(),
                       [&](const auto& d) { return d.second == var; });
}

std::vector<std::string> NLTC::string_deps(const std::set<std::string>& string_vars) const {
    std::vector<std::string> out;
    for (const auto& [u, p] : deps)
        if (string_vars.count(p) && std::find(out.begin(), out.end(), p) == out.end())
            out.push_back(p);
    return out;
}

std::optional<VarKind> ParsedDocument::kind_of(const std::string& name) const {
    if (bool_vars.count(name)) return VarKind::Bool;
    if (string_vars.count(name)) return VarKind::String;
    return std::nullopt;
}

Json ParsedDocument::to_json() const {
    Json j = Json::object();
    j["bool_vars"] = bool_vars;
    j["string_vars"] = string_vars;
    Json fs = Json::array();
    for (const auto& f : formulas) fs.push_back(f->to_json());
    j["formulas"] = fs;
    Json ns = Json::array();
    for (const auto& n : nltcs) {
        Json d = Json::object();
        d["id"] = n.id;
        d["out_var"] = n.out_var;
        d["clause"] = n.clause;
        Json deps = Json::array();
        for (const auto& [u, p] : n.deps) deps.push_back(Json::array({u, p}));
        d["deps"] = deps;
        ns.push_back(d);
    }
    j["nltcs"] = ns;
    return j;
}

// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
    if (max_refinements < 1) throw std::invalid_argument("max_refinements must be >= 1");
    if (timeout_seconds <= 0) throw std::invalid_argument("timeout must be positive");
    if (cover_limit && *cover_limit < 1) throw std::invalid_argument("cover_limit must be >= 1");
}

Json Diagnostics::to_json(bool include_wall) const {
    Json j = Json::object();
    j["iterations"] = iterations;
    j["propose_calls"] = propose_calls;
    j["verify_calls"] = verify_calls;
    j["cache_hits"] = cache_hits;
    j["models_proposed"] = models_proposed;
    j["models_blocked"] = models_blocked;
    if (include_wall) j["wall_seconds"] = wall_seconds;
    return j;
}

Json VerifyJudgment::to_json() const {
    Json j = Json::object();
    j["id"] = id;
    j["description"] = description;
    j["target"] = target;
    j["predicted"] = predicted;
    j["rationale"] = rationale;
    return j;
}

VerifyJudgment VerifyJudgment::from_json(const Json& j) {
    VerifyJudgment v;
    v.id = j.at("id").get<std::string>();
    v.description = j.value("description", std::string{});
    v.target = j.at("target").get<bool>();
    v.predicted = j.at("predicted").get<bool>();
    v.rationale = j.value("rationale", std::string{});
    return v;
}

std::string canonical_json(const Json& j) { return j.dump(); }

}  // namespace logitext
