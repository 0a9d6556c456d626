#include "logitext/check.hpp"

#include <algorithm>

#include "logitext/logic.hpp"

namespace logitext {

namespace {

void validate_input(const ParsedDocument& doc, const Assignment& input) {
    for (const auto& [name, value] : input.bindings()) {
        auto kind = doc.kind_of(name);
        if (!kind) throw ConflictError(name);
        if ((*kind == VarKind::Bool) != is_bool(value))
            throw std::invalid_argument("assignment for '" + name +
                                        "' has the wrong type for its declaration");
    }
}

// Single-constraint verify used by the classification path and verify_all:
// the candidate is the first bound string dependency's value.
VerifyJudgment verify_one(const NLTC& nltc,
                          bool target,
                          const Assignment& context,
                          const std::set<std::string>& string_vars,
                          OracleBackend& backend) {
    OracleRequest req;
    req.kind = OracleRequest::Kind::Verify;
    req.constraints.push_back({nltc, target});
    req.context = context;
    req.candidate = std::string{};
    for (const auto& dep : nltc.string_deps(string_vars)) {
        if (auto v = context.get(dep)) {
            req.candidate = std::get<std::string>(*v);
            req.candidate_var = dep;
            break;
        }
    }
    return backend.verify(req).at(0);
}

struct Classification {
    CheckOutcome::Status status;
    Assignment assignment;
};

// Evaluate NLTCs in dependency order, propagating formula definitions in
// between; frozen booleans that contradict oracle-derived values are Unsat.
Classification classify(const ParsedDocument& doc,
                        const Assignment& input,
                        const SolverConfig& config,
                        OracleBackend& backend,
                        Diagnostics& stats,
                        const Deadline& deadline) {
    Assignment bound = input;
    std::vector<bool> nltc_done(doc.nltcs.size(), false);
    std::vector<bool> formula_done(doc.formulas.size(), false);

    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t i = 0; i < doc.nltcs.size(); ++i) {
            if (nltc_done[i]) continue;
            const NLTC& n = doc.nltcs[i];
            bool ready = std::all_of(n.deps.begin(), n.deps.end(),
                                     [&](const auto& d) { return bound.contains(d.second); });
            if (!ready) continue;
            deadline.check();
            bool target = bound.contains(n.out_var) ? bound.bool_at(n.out_var) : true;
            VerifyJudgment j = verify_one(n, target, bound, doc.string_vars, backend);
            ++stats.verify_calls;
            nltc_done[i] = true;
            progress = true;
            if (bound.contains(n.out_var)) {
                if (bound.bool_at(n.out_var) != j.predicted)
                    return {CheckOutcome::Status::Unsat, {}};
            } else {
                bound.bind(n.out_var, j.predicted);
            }
        }
        for (std::size_t i = 0; i < doc.formulas.size(); ++i) {
            if (formula_done[i]) continue;
            const FormulaPtr& f = doc.formulas[i];
            if (f->kind == Formula::Kind::Iff) {
                auto rhs = eval_formula_partial(f->args[0], bound);
                if (!rhs) continue;
                formula_done[i] = true;
                progress = true;
                if (bound.contains(f->name)) {
                    if (bound.bool_at(f->name) != *rhs) return {CheckOutcome::Status::Unsat, {}};
                } else {
                    bound.bind(f->name, *rhs);
                }
            } else {
                auto v = eval_formula_partial(f, bound);
                if (!v) continue;
                formula_done[i] = true;
                progress = true;
                if (!*v) return {CheckOutcome::Status::Unsat, {}};
            }
        }
    }

    // Anything the oracle and propagation left open is completed logically.
    std::vector<std::string> unbound;
    for (const auto& v : doc.bool_vars)
        if (!bound.contains(v)) unbound.push_back(v);
    if (!unbound.empty()) {
        std::vector<std::string> all(doc.bool_vars.begin(), doc.bool_vars.end());
        SolverSession session(doc.formulas, bound, all, all);
        auto model = session.propose_model();
        if (!model) return {CheckOutcome::Status::Unsat, {}};
        bound = merge_assignments(bound, *model);
    }
    for (const auto& f : doc.formulas)
        if (!eval_formula(f, bound)) return {CheckOutcome::Status::Unsat, {}};
    return {CheckOutcome::Status::Sat, bound};
}

Assignment bool_bindings(const Assignment& a) {
    Assignment out;
    for (const auto& [name, value] : a.bindings())
        if (is_bool(value)) out.bind(name, value);
    return out;
}

struct GenerationStep {
    enum class Kind { Sat, Blocked, Exhausted } kind;
    Assignment assignment;  // total, when Sat
    Assignment model;       // proposed boolean model, when Sat
};

GenerationStep generation_step(const ParsedDocument& doc,
                               const Assignment& input,
                               const SolverConfig& config,
                               OracleBackend& backend,
                               SolutionCache& cache,
                               SolverSession& session,
                               const std::vector<std::string>& unbound_strings,
                               const std::vector<const NLTC*>& post_set,
                               Diagnostics& stats,
                               const Deadline& deadline,
                               TraceLog* trace) {
    deadline.check();
    auto model = session.propose_model();
    if (!model) return {GenerationStep::Kind::Exhausted, {}, {}};
    ++stats.models_proposed;
    if (trace)
        trace->record(Json{{"event", "propose_model"},
                           {"model", project_assignment(*model, session.projection()).to_json()}});

    auto block = [&]() {
        session.block_model(*model);
        ++stats.models_blocked;
        if (trace)
            trace->record(
                Json{{"event", "block"},
                     {"model", project_assignment(*model, session.projection()).to_json()}});
    };

    Assignment solved;
    for (const auto& u : unbound_strings) {
        std::vector<NLTC> relevant;
        for (const auto& n : doc.nltcs)
            if (n.reads(u)) relevant.push_back(n);
        if (relevant.empty()) {
            solved.bind(u, std::string{});  // unconstrained string variable
            continue;
        }
        Assignment ctx = merge_assignments(merge_assignments(input, *model), solved);
        auto r = nlsolve(u, relevant, ctx, backend, config, cache, doc.string_vars, deadline,
                         trace);
        stats.propose_calls += r.propose_calls;
        stats.verify_calls += r.verify_calls;
        if (r.cache_hit) ++stats.cache_hits;
        if (!r.value) {
            block();
            return {GenerationStep::Kind::Blocked, {}, {}};
        }
        solved.bind(u, *r.value);
    }

    // NLTCs that no NLSolver call covered (no unbound string dep) are checked
    // against the proposed model; a contradiction rejects the model.
    if (!post_set.empty()) {
        deadline.check();
        OracleRequest req;
        req.kind = OracleRequest::Kind::Verify;
        req.context = merge_assignments(merge_assignments(input, *model), solved);
        req.candidate = std::string{};
        for (const auto* n : post_set)
            req.constraints.push_back({*n, model->bool_at(n->out_var)});
        auto judgments = backend.verify(req);
        ++stats.verify_calls;
        if (trace)
            trace->record(Json{{"event", "verify_batch"},
                               {"constraints", req.constraints.size()},
                               {"phase", "post_verify"}});
        // A mismatch here is caused by the mismatched constraints' own
        // variables, which may lie outside the distinctness projection; the
        // blocked assignment includes them so other completions of the same
        // projection stay reachable.
        Assignment rejected = project_assignment(*model, session.projection());
        bool mismatch = false;
        for (const auto& j : judgments) {
            if (j.predicted == j.target) continue;
            mismatch = true;
            for (const auto* n : post_set) {
                if (n->id != j.id) continue;
                rejected.bind(n->out_var, model->bool_at(n->out_var));
                for (const auto& [quoted, var] : n->deps)
                    if (auto v = model->get(var)) rejected.bind(var, *v);
            }
        }
        if (mismatch) {
            session.block_exact(rejected);
            ++stats.models_blocked;
            if (trace)
                trace->record(Json{{"event", "block"}, {"model", rejected.to_json()},
                                   {"phase", "post_verify"}});
            return {GenerationStep::Kind::Blocked, {}, {}};
        }
    }

    Assignment total = merge_assignments(merge_assignments(input, *model), solved);
    return {GenerationStep::Kind::Sat, total, *model};
}

}  // namespace

std::vector<std::string> projection_vars(const ParsedDocument& doc, const SolverConfig& config) {
    if (!config.projection.empty()) return config.projection;
    std::set<std::string> vars;
    for (const auto& n : doc.nltcs) {
        vars.insert(n.out_var);
        for (const auto& [quoted, target] : n.deps)
            if (doc.bool_vars.count(target)) vars.insert(target);
    }
    if (vars.empty()) vars = doc.bool_vars;
    return {vars.begin(), vars.end()};
}

CheckOutcome check(const ParsedDocument& doc,
                   const Assignment& input,
                   const SolverConfig& config,
                   OracleBackend& backend,
                   SolutionCache& cache,
                   TraceLog* trace) {
    config.validate();
    validate_input(doc, input);
    auto start = std::chrono::steady_clock::now();
    CheckOutcome out;
    Deadline deadline(config.timeout_seconds);

    try {
        bool all_strings_bound =
            std::all_of(doc.string_vars.begin(), doc.string_vars.end(),
                        [&](const std::string& u) { return input.contains(u); });
        if (all_strings_bound) {
            auto r = classify(doc, input, config, backend, out.stats, deadline);
            out.status = r.status;
            out.assignment = r.assignment;
        } else {
            std::vector<std::string> all_bools(doc.bool_vars.begin(), doc.bool_vars.end());
            SolverSession session(doc.formulas, bool_bindings(input), all_bools,
                                  projection_vars(doc, config));
            std::vector<std::string> unbound_strings;
            for (const auto& u : doc.string_vars)
                if (!input.contains(u)) unbound_strings.push_back(u);
            std::vector<const NLTC*> post_set;
            for (const auto& n : doc.nltcs) {
                bool covered = std::any_of(
                    unbound_strings.begin(), unbound_strings.end(),
                    [&](const std::string& u) { return n.reads(u); });
                if (!covered) post_set.push_back(&n);
            }

            out.status = CheckOutcome::Status::Unsat;
            while (true) {
                ++out.stats.iterations;
                auto step = generation_step(doc, input, config, backend, cache, session,
                                            unbound_strings, post_set, out.stats, deadline,
                                            trace);
                if (step.kind == GenerationStep::Kind::Exhausted) break;
                if (step.kind == GenerationStep::Kind::Blocked) continue;
                out.status = CheckOutcome::Status::Sat;
                out.assignment = step.assignment;
                break;
            }
        }
    } catch (const TimeoutReached&) {
        out.status = CheckOutcome::Status::Timeout;
        out.assignment = Assignment{};
    }

    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

CoverResult check_cover(const ParsedDocument& doc,
                        const Assignment& input,
                        const SolverConfig& config,
                        OracleBackend& backend,
                        SolutionCache& cache,
                        TraceLog* trace) {
    config.validate();
    validate_input(doc, input);
    CoverResult out;
    Deadline deadline(config.timeout_seconds);

    std::vector<std::string> all_bools(doc.bool_vars.begin(), doc.bool_vars.end());
    SolverSession session(doc.formulas, bool_bindings(input), all_bools,
                          projection_vars(doc, config));
    std::vector<std::string> unbound_strings;
    for (const auto& u : doc.string_vars)
        if (!input.contains(u)) unbound_strings.push_back(u);
    std::vector<const NLTC*> post_set;
    for (const auto& n : doc.nltcs) {
        bool covered = std::any_of(unbound_strings.begin(), unbound_strings.end(),
                                   [&](const std::string& u) { return n.reads(u); });
        if (!covered) post_set.push_back(&n);
    }

    out.status = "exhausted";
    try {
        while (true) {
            if (config.cover_limit &&
                static_cast<int>(out.assignments.size()) >= *config.cover_limit) {
                out.status = "limit";
                break;
            }
            ++out.stats.iterations;
            auto step = generation_step(doc, input, config, backend, cache, session,
                                        unbound_strings, post_set, out.stats, deadline, trace);
            if (step.kind == GenerationStep::Kind::Exhausted) break;
            if (step.kind == GenerationStep::Kind::Blocked) continue;
            out.assignments.push_back(step.assignment);
            // Enumerated models stay excluded so later solutions differ on the
            // projection.
            session.block_model(step.model);
            if (trace)
                trace->record(Json{{"event", "cover_emit"},
                                   {"model",
                                    project_assignment(step.model, session.projection())
                                        .to_json()}});
        }
    } catch (const TimeoutReached&) {
        out.status = "timeout";
    }
    return out;
}

std::vector<VerifyJudgment> verify_all(const ParsedDocument& doc,
                                       const Assignment& total,
                                       OracleBackend& backend) {
    std::vector<VerifyJudgment> out;
    for (const auto& n : doc.nltcs)
        out.push_back(verify_one(n, total.bool_at(n.out_var), total, doc.string_vars, backend));
    return out;
}

}  // namespace logitext
