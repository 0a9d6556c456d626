#pragma once

#include <string>
#include <vector>

#include "logitext/cache.hpp"
#include "logitext/document.hpp"
#include "logitext/nlsolver.hpp"
#include "logitext/oracle.hpp"
#include "logitext/trace.hpp"

namespace logitext {

// Blocking / cover-distinctness projection: the configured override, else the
// variables appearing in at least one NLTC (out_vars and boolean deps), else
// all boolean variables.
std::vector<std::string> projection_vars(const ParsedDocument& doc, const SolverConfig& config);

// Satisfiability interface over a document and partial assignment: the
// classification fast-path when every string variable is bound, otherwise the
// propose/solve/block loop.
CheckOutcome check(const ParsedDocument& doc,
                   const Assignment& input,
                   const SolverConfig& config,
                   OracleBackend& backend,
                   SolutionCache& cache,
                   TraceLog* trace = nullptr);

struct CoverResult {
    std::vector<Assignment> assignments;  // pairwise-distinct projections
    std::string status;                   // "exhausted" | "limit" | "timeout"
    Diagnostics stats;
};

CoverResult check_cover(const ParsedDocument& doc,
                        const Assignment& input,
                        const SolverConfig& config,
                        OracleBackend& backend,
                        SolutionCache& cache,
                        TraceLog* trace = nullptr);

// Verifies every NLTC against its bound deps with target = total[out_var].
std::vector<VerifyJudgment> verify_all(const ParsedDocument& doc,
                                       const Assignment& total,
                                       OracleBackend& backend);

}  // namespace logitext
