#include "logitext/logic.hpp"

#include <algorithm>

namespace logitext {

Assignment project_assignment(const Assignment& model, const std::vector<std::string>& vars) {
    Assignment out;
    for (const auto& v : vars)
        if (auto val = model.get(v)) out.bind(v, *val);
    return out;
}

SolverSession::SolverSession(std::vector<FormulaPtr> formulas,
                             Assignment frozen,
                             std::vector<std::string> all_vars,
                             std::vector<std::string> projection)
    : formulas_(std::move(formulas)),
      frozen_(std::move(frozen)),
      decision_order_(std::move(all_vars)),
      projection_(std::move(projection)) {
    std::sort(decision_order_.begin(), decision_order_.end());
    decision_order_.erase(std::unique(decision_order_.begin(), decision_order_.end()),
                          decision_order_.end());
    std::sort(projection_.begin(), projection_.end());
    projection_.erase(std::unique(projection_.begin(), projection_.end()), projection_.end());
}

bool SolverSession::violates_block(const Assignment& partial) const {
    for (const auto& blocked : blocked_) {
        bool match = true;
        for (const auto& [var, val] : blocked.bindings()) {
            auto cur = partial.get(var);
            if (!cur || *cur != val) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

bool SolverSession::search(std::size_t index, Assignment& partial, Assignment& out) const {
    for (const auto& f : formulas_) {
        auto v = eval_formula_partial(f, partial);
        if (v && !*v) return false;
    }
    if (violates_block(partial)) return false;
    if (index == decision_order_.size()) {
        out = partial;
        return true;
    }
    const std::string& var = decision_order_[index];
    if (partial.contains(var)) return search(index + 1, partial, out);
    for (bool value : {false, true}) {
        Assignment next = partial;
        next.bind(var, value);
        if (search(index + 1, next, out)) return true;
    }
    return false;
}

std::optional<Assignment> SolverSession::propose_model() {
    Assignment partial = frozen_;
    Assignment out;
    if (!search(0, partial, out)) return std::nullopt;
    return out;
}

void SolverSession::block_model(const Assignment& model) {
    blocked_.push_back(project_assignment(model, projection_));
}

void SolverSession::block_exact(Assignment partial) { blocked_.push_back(std::move(partial)); }

std::vector<Assignment> SolverSession::enumerate_models(std::optional<int> limit) {
    std::vector<Assignment> models;
    while (!limit || static_cast<int>(models.size()) < *limit) {
        auto m = propose_model();
        if (!m) break;
        models.push_back(*m);
        block_model(*m);
    }
    return models;
}

}  // namespace logitext
