#include "logitext/gaps.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "logitext/logic.hpp"

namespace logitext {

Json GapReport::to_json() const {
    Json j = Json::object();
    if (accuracy_whole) j["accuracy_whole"] = *accuracy_whole;
    if (accuracy_composed) j["accuracy_composed"] = *accuracy_composed;
    if (compositional_gap) j["compositional_gap"] = *compositional_gap;
    if (!solver_counts.empty()) {
        j["subject_counts"] = subject_counts;
        j["solver_counts"] = solver_counts;
    }
    if (combinatorial_gap) j["combinatorial_gap"] = *combinatorial_gap;
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

std::string GapReport::to_csv() const {
    std::ostringstream out;
    out << "metric,value\n";
    if (accuracy_whole) out << "accuracy_whole," << *accuracy_whole << "\n";
    if (accuracy_composed) out << "accuracy_composed," << *accuracy_composed << "\n";
    if (compositional_gap) out << "compositional_gap," << *compositional_gap << "\n";
    if (combinatorial_gap) out << "combinatorial_gap," << *combinatorial_gap << "\n";
    for (std::size_t i = 0; i < solver_counts.size(); ++i)
        out << "instance_" << i << "_counts," << subject_counts[i] << "/" << solver_counts[i]
            << "\n";
    return out.str();
}

GapReport score_composition(const std::vector<bool>& labels,
                            const std::vector<bool>& whole_prompt,
                            const std::vector<Assignment>& clause_values,
                            const FormulaPtr& policy) {
    if (labels.size() != whole_prompt.size() || labels.size() != clause_values.size())
        throw LengthMismatch("labels, predictions, and clause values must have equal length");
    if (labels.empty()) throw LengthMismatch("at least one instance is required");

    int whole_hits = 0;
    int composed_hits = 0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (whole_prompt[j] == labels[j]) ++whole_hits;
        if (eval_formula(policy, clause_values[j]) == labels[j]) ++composed_hits;
    }

    GapReport report;
    report.accuracy_whole = static_cast<double>(whole_hits) / labels.size();
    report.accuracy_composed = static_cast<double>(composed_hits) / labels.size();
    report.compositional_gap = *report.accuracy_whole - *report.accuracy_composed;
    return report;
}

GapReport score_enumeration(const std::vector<std::vector<Assignment>>& subject_assignments,
                            const std::vector<FormulaPtr>& formulas,
                            const Assignment& frozen,
                            const std::vector<std::string>& all_vars,
                            const std::vector<std::string>& projection) {
    GapReport report;
    double total = 0.0;
    int counted = 0;

    SolverSession reference(formulas, frozen, all_vars, projection);
    int n_star = static_cast<int>(reference.enumerate_models().size());

    for (std::size_t j = 0; j < subject_assignments.size(); ++j) {
        if (n_star == 0) {
            report.warnings.push_back("instance " + std::to_string(j) +
                                      " skipped: solver found no models");
            continue;
        }
        // A subject assignment counts when some extension over all variables
        // satisfies every formula; total assignments reduce to direct
        // evaluation.
        std::set<Assignment> distinct;
        for (const auto& a : subject_assignments[j]) {
            Assignment combined;
            try {
                combined = merge_assignments(frozen, a);
            } catch (const ConflictError&) {
                continue;  // contradicts the frozen bindings
            }
            SolverSession probe(formulas, combined, all_vars, projection);
            auto model = probe.propose_model();
            if (!model) continue;
            distinct.insert(project_assignment(*model, projection));
        }
        int n = static_cast<int>(distinct.size());
        report.subject_counts.push_back(n);
        report.solver_counts.push_back(n_star);
        total += static_cast<double>(n_star - n) / n_star;
        ++counted;
    }

    if (counted > 0) report.combinatorial_gap = total / counted;
    return report;
}

GapReport merge_reports(const GapReport& a, const GapReport& b) {
    GapReport out = a;
    if (!out.accuracy_whole) out.accuracy_whole = b.accuracy_whole;
    if (!out.accuracy_composed) out.accuracy_composed = b.accuracy_composed;
    if (!out.compositional_gap) out.compositional_gap = b.compositional_gap;
    if (out.solver_counts.empty()) {
        out.subject_counts = b.subject_counts;
        out.solver_counts = b.solver_counts;
    }
    if (!out.combinatorial_gap) out.combinatorial_gap = b.combinatorial_gap;
    out.warnings.insert(out.warnings.end(), b.warnings.begin(), b.warnings.end());
    return out;
}

}  // namespace logitext
