#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logitext/document.hpp"

namespace logitext {

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GapReport {
    // Whole-prompt accuracy vs. clause-wise-plus-solver accuracy.
    std::optional<double> accuracy_whole;      // a
    std::optional<double> accuracy_composed;   // a*
    std::optional<double> compositional_gap;   // a - a*

    // Per-instance enumeration shortfall.
    std::vector<int> subject_counts;  // n_j (valid, deduplicated)
    std::vector<int> solver_counts;   // n*_j
    std::optional<double> combinatorial_gap;   // mean (n*_j - n_j) / n*_j

    std::vector<std::string> warnings;

    Json to_json() const;
    std::string to_csv() const;
};

// a = mean_j [whole_prompt[j] == labels[j]];
// a* = mean_j [eval_formula(policy, clause_values[j]) == labels[j]];
// gap = a - a*.
GapReport score_composition(const std::vector<bool>& labels,
                            const std::vector<bool>& whole_prompt,
                            const std::vector<Assignment>& clause_values,
                            const FormulaPtr& policy);

// For each instance: n_j = the subject's assignments that satisfy every
// formula (totalized over `all_vars`; instances may be partial over the
// projection only), deduplicated on the projection; n*_j = solver enumeration
// count under the same frozen bindings. Instances with n*_j = 0 are skipped
// with a warning.
GapReport score_enumeration(const std::vector<std::vector<Assignment>>& subject_assignments,
                            const std::vector<FormulaPtr>& formulas,
                            const Assignment& frozen,
                            const std::vector<std::string>& all_vars,
                            const std::vector<std::string>& projection);

// Merge the fields of two partial reports (used when the CLI computes both
// metrics in one run).
GapReport merge_reports(const GapReport& a, const GapReport& b);

}  // namespace logitext
