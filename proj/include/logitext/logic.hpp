#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logitext/document.hpp"

namespace logitext {

// Restriction of a total model to the given variables.
Assignment project_assignment(const Assignment& model, const std::vector<std::string>& vars);

// Deterministic model-proposing session over a set of boolean formulas.
// Search order: variables sorted by name, false tried before true. Blocking
// operates on the projection of models onto `projection`, so models differing
// only outside the projection are excluded together.
class SolverSession {
public:
    SolverSession(std::vector<FormulaPtr> formulas,
                  Assignment frozen,
                  std::vector<std::string> all_vars,
                  std::vector<std::string> projection);

    // Total assignment over all variables satisfying every formula, extending
    // the frozen bindings and avoiding every blocked projection; nullopt when
    // exhausted.
    std::optional<Assignment> propose_model();

    void block_model(const Assignment& model);

    // Blocks exactly the given partial assignment (no projection applied);
    // used when a rejection is caused by variables outside the projection.
    void block_exact(Assignment partial);

    std::vector<Assignment> enumerate_models(std::optional<int> limit = std::nullopt);

    const std::vector<std::string>& projection() const { return projection_; }
    std::size_t blocked_count() const { return blocked_.size(); }

private:
    bool violates_block(const Assignment& partial) const;
    bool search(std::size_t index, Assignment& partial, Assignment& out) const;

    std::vector<FormulaPtr> formulas_;
    Assignment frozen_;
    std::vector<std::string> decision_order_;  // sorted
    std::vector<std::string> projection_;
    std::vector<Assignment> blocked_;          // projections of rejected models
};

}  // namespace logitext
