#include "logitext/nlsolver.hpp"

#include <algorithm>

namespace logitext {

namespace {

CacheKey key_for(const std::string& target,
                 const std::vector<NLTC>& constraints,
                 const std::vector<std::pair<std::string, bool>>& bool_context,
                 const Assignment& context,
                 const std::set<std::string>& string_vars) {
    // String deps other than the search target are hashed into the key but
    // never partially matched on.
    std::vector<std::pair<std::string, std::string>> string_values;
    std::set<std::string> seen;
    for (const auto& n : constraints)
        for (const auto& dep : n.string_deps(string_vars)) {
            if (dep == target || seen.count(dep)) continue;
            if (auto v = context.get(dep)) {
                string_values.emplace_back(dep, std::get<std::string>(*v));
                seen.insert(dep);
            }
        }
    return CacheKey::make(target, constraints, bool_context, string_values);
}

}  // namespace

NlSolveResult nlsolve(const std::string& target,
                      const std::vector<NLTC>& constraints,
                      const Assignment& context,
                      OracleBackend& backend,
                      const SolverConfig& config,
                      SolutionCache& cache,
                      const std::set<std::string>& string_vars,
                      const Deadline& deadline,
                      TraceLog* trace) {
    NlSolveResult result;

    std::vector<std::pair<std::string, bool>> bool_context;
    for (const auto& n : constraints) bool_context.emplace_back(n.out_var, context.bool_at(n.out_var));
    std::sort(bool_context.begin(), bool_context.end());

    CacheKey exact_key = key_for(target, constraints, bool_context, context, string_vars);
    if (auto hit = cache.lookup(exact_key)) {
        result.value = *hit;
        result.cache_hit = true;
        if (trace)
            trace->record(Json{{"event", "nlsolve_cache_hit"}, {"target", target}});
        return result;
    }

    OracleRequest base;
    base.constraints.reserve(constraints.size());
    for (const auto& n : constraints)
        base.constraints.push_back({n, context.bool_at(n.out_var)});
    base.context = context;
    base.candidate_var = target;

    std::string candidate;
    if (auto seed = cache.closest_partial_match(exact_key)) {
        candidate = *seed;
    } else {
        OracleRequest req = base;
        req.kind = OracleRequest::Kind::Propose;
        deadline.check();
        candidate = backend.propose(req);
        ++result.propose_calls;
    }
    result.history.emplace_back(candidate, std::vector<VerifyJudgment>{});

    for (int round = 1; round <= config.max_refinements; ++round) {
        result.rounds = round;
        deadline.check();

        OracleRequest req = base;
        req.kind = OracleRequest::Kind::Verify;
        req.candidate = candidate;
        auto judgments = backend.verify(req);
        ++result.verify_calls;

        std::vector<VerifyJudgment> mismatches;
        for (const auto& j : judgments)
            if (j.predicted != j.target) mismatches.push_back(j);

        if (trace)
            trace->record(Json{{"event", "nlsolve_round"},
                               {"target", target},
                               {"round", round},
                               {"mismatches", mismatches.size()}});

        // Record the candidate under the context the verifier actually saw:
        // mismatched targets replaced by predictions.
        auto predicted_context = bool_context;
        for (auto& [var, value] : predicted_context)
            for (const auto& j : mismatches)
                if (j.id == var) value = j.predicted;
        cache.store(key_for(target, constraints, predicted_context, context, string_vars),
                    candidate);

        if (mismatches.empty()) {
            result.value = candidate;
            return result;
        }
        result.history.back().second = mismatches;

        if (round < config.max_refinements) {
            OracleRequest refine = base;
            refine.kind = OracleRequest::Kind::Propose;
            refine.failed = mismatches;
            for (const auto& [text, fails] : result.history) refine.history.push_back(text);
            deadline.check();
            candidate = backend.propose(refine);
            ++result.propose_calls;
            result.history.emplace_back(candidate, std::vector<VerifyJudgment>{});
        }
    }
    return result;  // value stays empty: search exhausted
}

}  // namespace logitext
