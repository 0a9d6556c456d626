#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "logitext/cache.hpp"
#include "logitext/document.hpp"
#include "logitext/oracle.hpp"
#include "logitext/trace.hpp"

namespace logitext {

struct TimeoutReached : std::runtime_error {
    TimeoutReached() : std::runtime_error("timeout reached") {}
};

// Wall-clock budget shared across one check() invocation; probed between
// solver proposals and oracle calls.
class Deadline {
public:
    explicit Deadline(double seconds)
        : end_(std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(seconds))) {}

    bool expired() const { return std::chrono::steady_clock::now() >= end_; }
    void check() const {
        if (expired()) throw TimeoutReached();
    }

private:
    std::chrono::steady_clock::time_point end_;
};

struct NlSolveResult {
    std::optional<std::string> value;
    bool cache_hit = false;
    int propose_calls = 0;
    int verify_calls = 0;
    int rounds = 0;
    // One entry per proposed candidate: (text, judgments of its failed round).
    std::vector<std::pair<std::string, std::vector<VerifyJudgment>>> history;
};

// Iterative propose/verify search for a string value of `target` whose
// verified truth values match the boolean context, with exact- and
// partial-match cache seeding and failure-history feedback.
NlSolveResult nlsolve(const std::string& target,
                      const std::vector<NLTC>& constraints,
                      const Assignment& context,
                      OracleBackend& backend,
                      const SolverConfig& config,
                      SolutionCache& cache,
                      const std::set<std::string>& string_vars,
                      const Deadline& deadline,
                      TraceLog* trace = nullptr);

}  // namespace logitext
