// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logitext/check.hpp"
#include "logitext/gaps.hpp"
#include "logitext/logic.hpp"
#include "logitext/parser.hpp"

using namespace logitext;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << name;
    if (!ok && !detail.empty()) std::cout << " — " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
}

std::string fixture_path(const std::string& name) {
    return std::string(LT_FIXTURES_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ParsedDocument policy_doc() { return parse_document(read_file(fixture_path("content_policy.lt"))); }

ScriptedOracle policy_oracle(const std::string& rules = "content_policy_rules.json", double flip = 0.0,
                             unsigned seed = 0) {
    return ScriptedOracle(OracleScript::load(fixture_path(rules)), flip, seed);
}

SolverConfig clause_projection_config() {
    SolverConfig config;
    config.projection = {"C1", "C2", "C3", "C4", "C5"};
    return config;
}

// ---------------------------------------------------------------------------

void criterion_parser_fidelity() {
    try {
        ParsedDocument doc = policy_doc();
        std::set<std::string> expected_bools = {
            "C1",    "C2",    "C3",    "C4",    "C5",    "C6",    "C7",    "C8", "d",
            "C2_q1", "C2_q2", "C2_q3", "C2_q4", "C2_q5", "C2_q6", "C2_q7", "t"};
        bool ok = doc.string_vars == std::set<std::string>{"M"} &&
                  doc.bool_vars == expected_bools && doc.nltcs.size() == 13 &&
                  doc.formulas.size() == 4;
        bool found_policy = false;
        for (const auto& f : doc.formulas)
            if (f->to_string() == "d = (C1 and C2 and (C3 or C4 or C5))") found_policy = true;
        report(1, "parser fidelity on the canonical document", ok && found_policy);
    } catch (const std::exception& e) {
        report(1, "parser fidelity on the canonical document", false, e.what());
    }
}

FormulaPtr random_formula(std::mt19937& rng, const std::vector<std::string>& vars, int depth) {
    std::uniform_int_distribution<int> pick_var(0, static_cast<int>(vars.size()) - 1);
    std::uniform_int_distribution<int> pick_kind(0, depth <= 0 ? 1 : 4);
    switch (pick_kind(rng)) {
        case 0: return Formula::var(vars[pick_var(rng)]);
        case 1: return Formula::constant(rng() % 2 == 0);
        case 2: return Formula::negation(random_formula(rng, vars, depth - 1));
        case 3: {
            std::vector<FormulaPtr> kids;
            for (int i = 0; i < 2 + static_cast<int>(rng() % 2); ++i)
                kids.push_back(random_formula(rng, vars, depth - 1));
            return Formula::conjunction(std::move(kids));
        }
        default: {
            std::vector<FormulaPtr> kids;
            for (int i = 0; i < 2 + static_cast<int>(rng() % 2); ++i)
                kids.push_back(random_formula(rng, vars, depth - 1));
            return Formula::disjunction(std::move(kids));
        }
    }
}

void criterion_enumeration_equivalence() {
    std::mt19937 rng(97);
    bool ok = true;
    std::string detail;
    for (int trial = 0; trial < 200 && ok; ++trial) {
        int n = 1 + static_cast<int>(rng() % 12);
        std::vector<std::string> vars;
        for (int i = 0; i < n; ++i) vars.push_back("x" + std::to_string(i));
        std::vector<FormulaPtr> formulas;
        for (int i = 0, c = 1 + static_cast<int>(rng() % 3); i < c; ++i)
            formulas.push_back(random_formula(rng, vars, 3));
        std::vector<std::string> projection;
        for (const auto& v : vars)
            if (rng() % 2 == 0) projection.push_back(v);
        if (projection.empty()) projection.push_back(vars[0]);

        SolverSession session(formulas, {}, vars, projection);
        std::set<Assignment> got;
        for (const auto& m : session.enumerate_models())
            got.insert(project_assignment(m, projection));

        std::set<Assignment> expected;
        for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
            Assignment a;
            for (int i = 0; i < n; ++i) a.bind(vars[i], (mask >> i & 1) != 0);
            bool sat = true;
            for (const auto& f : formulas)
                if (!eval_formula(f, a)) sat = false;
            if (sat) expected.insert(project_assignment(a, projection));
        }
        if (got != expected) {
            ok = false;
            detail = "mismatch at trial " + std::to_string(trial);
        }
    }
    report(2, "model enumeration equals brute force on 200 random documents", ok, detail);
}

void criterion_instance_generation() {
    try {
        ParsedDocument doc = policy_doc();
        auto oracle = policy_oracle();
        SolutionCache cache;
        SolverConfig config = clause_projection_config();

        CheckOutcome out = check(doc, Assignment{{"C4", false}, {"C5", false}, {"d", true}},
                                 config, oracle, cache);
        bool ok = out.status == CheckOutcome::Status::Sat && out.assignment.bool_at("C3");
        std::string m = ok ? out.assignment.string_at("M") : "";

        // The candidate must contain all and only the keywords of true-target
        // text constraints (plus the fixed suffix).
        OracleScript script = OracleScript::load(fixture_path("content_policy_rules.json"));
        std::string expected;
        if (ok) {
            for (const auto& n : doc.nltcs) {
                if (!n.reads("M") || !out.assignment.bool_at(n.out_var)) continue;
                for (const auto& kw : script.rules.at(n.id)) {
                    if (!expected.empty()) expected += " ";
                    expected += kw;
                }
            }
            expected += expected.empty() ? "msg" : " msg";
        }
        ok = ok && m == expected;

        auto auditor = policy_oracle();
        for (const auto& j : verify_all(doc, out.assignment, auditor))
            if (j.predicted != j.target) ok = false;
        report(3, "constrained instance generation on the canonical document", ok);
    } catch (const std::exception& e) {
        report(3, "constrained instance generation on the canonical document", false, e.what());
    }
}

void criterion_coverage() {
    try {
        ParsedDocument doc = policy_doc();
        auto oracle = policy_oracle();
        SolutionCache cache;
        SolverConfig config = clause_projection_config();

        CoverResult result = check_cover(doc, Assignment{{"d", true}}, config, oracle, cache);
        std::set<Assignment> combos;
        for (const auto& a : result.assignments)
            combos.insert(project_assignment(a, config.projection));
        bool valid = true;
        for (const auto& a : result.assignments)
            for (const auto& f : doc.formulas)
                if (!eval_formula(f, a)) valid = false;
        report(4, "coverage enumeration finds the seven clause combinations",
               result.status == "exhausted" && result.assignments.size() == 7 &&
                   combos.size() == 7 && valid);
    } catch (const std::exception& e) {
        report(4, "coverage enumeration finds the seven clause combinations", false, e.what());
    }
}

void criterion_refinement_curve() {
    try {
        ParsedDocument doc = policy_doc();
        std::vector<NLTC> constraints;
        for (const auto& n : doc.nltcs)
            if (n.reads("M")) constraints.push_back(n);
        Assignment context{{"C1", true},  {"C2_q1", true},  {"C2_q2", false}, {"C2_q3", false},
                           {"C2_q4", false}, {"C2_q5", false}, {"C2_q6", false},
                           {"C2_q7", false}, {"C3", true},  {"C4", false},  {"C5", false},
                           {"C7", false}};

        const int trials = 500;
        bool ok = true;
        std::string detail;
        for (double p : {0.0, 0.1, 0.3}) {
            std::vector<double> rate;
            for (int T = 1; T <= 5; ++T) {
                int successes = 0;
                for (int t = 0; t < trials; ++t) {
                    auto oracle = policy_oracle("content_policy_rules.json", p,
                                                static_cast<unsigned>(t) + 1);
                    SolutionCache cache;
                    SolverConfig config;
                    config.max_refinements = T;
                    Deadline deadline(60.0);
                    auto r = nlsolve("M", constraints, context, oracle, config, cache, {"M"},
                                     deadline);
                    if (r.value) ++successes;
                }
                rate.push_back(static_cast<double>(successes) / trials);
            }
            for (std::size_t i = 1; i < rate.size(); ++i)
                if (rate[i] + 0.02 < rate[i - 1]) {
                    ok = false;
                    detail = "success rate decreased at p=" + std::to_string(p);
                }
            if (p == 0.0 && rate[0] != 1.0) {
                ok = false;
                detail = "noise-free single-round success below 100%";
            }
        }
        report(5, "refinement success is monotone in the round budget", ok, detail);
    } catch (const std::exception& e) {
        report(5, "refinement success is monotone in the round budget", false, e.what());
    }
}

void criterion_blocking_progress() {
    try {
        ParsedDocument doc = policy_doc();
        auto oracle = policy_oracle("content_policy_rules_refuse2.json");
        SolutionCache cache;
        SolverConfig config = clause_projection_config();
        TraceLog trace;

        CoverResult result =
            check_cover(doc, Assignment{{"d", true}}, config, oracle, cache, &trace);
        std::set<Assignment> combos;
        for (const auto& a : result.assignments)
            combos.insert(project_assignment(a, {"C3", "C4", "C5"}));

        int refusal_blocks = 0;
        std::set<Assignment> blocked_combos;
        for (const auto& e : trace.events())
            if (e.value("event", std::string{}) == "block" && !e.contains("phase")) {
                ++refusal_blocks;
                blocked_combos.insert(
                    project_assignment(Assignment::from_json(e["model"]), {"C3", "C4", "C5"}));
            }
        std::set<Assignment> refused = {
            Assignment{{"C3", true}, {"C4", false}, {"C5", false}},
            Assignment{{"C3", false}, {"C4", true}, {"C5", false}}};
        report(6, "refused combinations each cost exactly one blocked proposal",
               result.status == "exhausted" && result.assignments.size() == 5 &&
                   combos.size() == 5 && refusal_blocks == 2 && blocked_combos == refused);
    } catch (const std::exception& e) {
        report(6, "refused combinations each cost exactly one blocked proposal", false,
               e.what());
    }
}

void criterion_cache_effectiveness() {
    try {
        ParsedDocument doc = policy_doc();
        SolverConfig config = clause_projection_config();
        Assignment input{{"C4", false}, {"C5", false}, {"d", true}};

        SolutionCache cache;
        auto cold_oracle = policy_oracle();
        CheckOutcome cold = check(doc, input, config, cold_oracle, cache);
        auto warm_oracle = policy_oracle();
        CheckOutcome warm = check(doc, input, config, warm_oracle, cache);

        report(7, "a warm cache removes propose calls and shrinks verify calls",
               cold.status == CheckOutcome::Status::Sat &&
                   warm.status == CheckOutcome::Status::Sat && cold.stats.propose_calls > 0 &&
                   warm.stats.propose_calls == 0 && warm.stats.cache_hits > 0 &&
                   warm.stats.verify_calls < cold.stats.verify_calls &&
                   warm.assignment == cold.assignment);
    } catch (const std::exception& e) {
        report(7, "a warm cache removes propose calls and shrinks verify calls", false,
               e.what());
    }
}

void criterion_gap_arithmetic() {
    try {
        ParsedDocument doc = policy_doc();
        Json labels_json = Json::parse(read_file(fixture_path("gap_labels.json")));
        std::vector<bool> labels = labels_json["labels"].get<std::vector<bool>>();
        std::vector<bool> predictions = labels_json["predictions"].get<std::vector<bool>>();
        std::vector<Assignment> rows;
        for (const auto& a : labels_json["clause_values"]) rows.push_back(Assignment::from_json(a));
        FormulaPtr policy;
        for (const auto& f : doc.formulas)
            if (f->kind == Formula::Kind::Iff && f->name == "d") policy = f->args[0];
        GapReport comp = score_composition(labels, predictions, rows, policy);

        Json subject_json = Json::parse(read_file(fixture_path("gap_subject.json")));
        std::vector<std::vector<Assignment>> instances;
        for (const auto& inst : subject_json["instances"]) {
            std::vector<Assignment> one;
            for (const auto& a : inst) one.push_back(Assignment::from_json(a));
            instances.push_back(one);
        }
        std::vector<std::string> all_bools(doc.bool_vars.begin(), doc.bool_vars.end());
        GapReport comb = score_enumeration(instances, doc.formulas,
                                           Assignment::from_json(subject_json["frozen"]),
                                           all_bools, {"C1", "C2", "C3", "C4", "C5"});

        bool ok = comp.compositional_gap && comb.combinatorial_gap &&
                  std::abs(*comp.compositional_gap - (-0.4)) < 1e-9 &&
                  std::abs(*comb.combinatorial_gap - 5.0 / 7.0) < 1e-9;
        report(8, "gap arithmetic on the constructed fixtures", ok);
    } catch (const std::exception& e) {
        report(8, "gap arithmetic on the constructed fixtures", false, e.what());
    }
}

// ---------------------------------------------------------------------------
// Prompt goldens

OracleRequest golden_propose_request() {
    auto make = [](const std::string& id, const std::string& clause,
                   std::vector<std::pair<std::string, std::string>> deps) {
        NLTC n;
        n.id = id;
        n.out_var = id;
        n.clause = clause;
        n.deps = std::move(deps);
        return n;
    };
    OracleRequest req;
    req.kind = OracleRequest::Kind::Propose;
    req.constraints = {
        {make("K1", "the note is addressed to the whole team", {{"the note", "M"}}), true},
        {make("K2", "the note mentions a deadline", {{"the note", "M"}}), false},
        {make("K3", "the note thanks a colleague by name", {{"the note", "M"}}), true},
        {make("K4", "the note refers to the quarterly report", {{"the note", "M"}}), false},
        {make("K5", "the tone is apologetic", {{"the tone", "M"}}), false},
        {make("K6", "the note acknowledges the outage",
              {{"the outage", "O"}, {"the note", "M"}}), true}};
    req.context.bind("O", std::string("Tuesday's database outage"));
    req.candidate_var = "M";
    req.failed = {{"K2", "the note mentions a deadline", false, true,
                   "the draft promised a date"},
                  {"K6", "the note acknowledges the outage", true, false,
                   "the incident was never named"}};
    req.history = {"Team, thanks for the great sprint. We will ship by Friday.",
                   "Team, thanks for pushing through a rough week."};
    return req;
}

OracleRequest golden_verify_request() {
    OracleRequest req = golden_propose_request();
    req.kind = OracleRequest::Kind::Verify;
    req.failed.clear();
    req.history.clear();
    req.candidate =
        "Team, thank you — especially Priya — for the steady hands during Tuesday's database "
        "outage. No dates to worry about; just rest up.";
    return req;
}

void dump_goldens() {
    Prompt propose = build_propose_prompt(golden_propose_request());
    Prompt verify = build_verify_prompt(golden_verify_request());
    std::ofstream(fixture_path("golden_propose_system.txt"), std::ios::binary) << propose.system;
    std::ofstream(fixture_path("golden_propose_user.txt"), std::ios::binary) << propose.user;
    std::ofstream(fixture_path("golden_verify_system.txt"), std::ios::binary) << verify.system;
    std::ofstream(fixture_path("golden_verify_user.txt"), std::ios::binary) << verify.user;
}

void criterion_prompt_goldens() {
    try {
        Prompt propose = build_propose_prompt(golden_propose_request());
        Prompt verify = build_verify_prompt(golden_verify_request());
        bool ok = propose.system == read_file(fixture_path("golden_propose_system.txt")) &&
                  propose.user == read_file(fixture_path("golden_propose_user.txt")) &&
                  verify.system == read_file(fixture_path("golden_verify_system.txt")) &&
                  verify.user == read_file(fixture_path("golden_verify_user.txt"));
        ok = ok &&
             propose.system.find("Return ONLY the text, no preambles.") != std::string::npos &&
             verify.user.find("Return ONLY valid JSON array, nothing else.") !=
                 std::string::npos;
        report(9, "prompt rendering matches the frozen goldens", ok);
    } catch (const std::exception& e) {
        report(9, "prompt rendering matches the frozen goldens", false, e.what());
    }
}

// ---------------------------------------------------------------------------
// CLI determinism

std::string run_cli(const std::string& args) {
    std::string command = std::string("\"") + LT_CLI_PATH + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    pclose(pipe);
    return out;
}

void criterion_cli_determinism() {
    try {
        std::string doc = std::string("\"") + fixture_path("content_policy.lt") + "\"";
        std::string rules = std::string("\"") + fixture_path("content_policy_rules.json") + "\"";
        std::string refuse = std::string("\"") + fixture_path("content_policy_rules_refuse2.json") + "\"";
        std::string proj =
            " --project C1 --project C2 --project C3 --project C4 --project C5";
        std::vector<std::string> commands = {
            "check " + doc + " --assign C4=false --assign C5=false --assign d=true"
                " --oracle scripted --script " + rules + proj,
            "cover " + doc + " --assign d=true --oracle scripted --script " + rules + proj,
            "cover " + doc + " --assign d=true --oracle scripted --script " + refuse + proj,
            "check " + doc +
                " --assign \"M=group ethnicity stereotyping msg\" --oracle scripted --script " +
                rules + " --flip 0.3 --seed 11"};
        bool ok = true;
        std::string detail;
        for (const auto& cmd : commands) {
            std::string first = run_cli(cmd);
            std::string second = run_cli(cmd);
            if (first.empty() || first != second) {
                ok = false;
                detail = "output diverged for: " + cmd;
                break;
            }
        }
        report(10, "repeated seeded CLI runs are byte-identical", ok, detail);
    } catch (const std::exception& e) {
        report(10, "repeated seeded CLI runs are byte-identical", false, e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::string(argv[1]) == "--dump-goldens") {
        dump_goldens();
        std::cout << "goldens written to " << LT_FIXTURES_DIR << "\n";
        return 0;
    }
    criterion_parser_fidelity();
    criterion_enumeration_equivalence();
    criterion_instance_generation();
    criterion_coverage();
    criterion_refinement_curve();
    criterion_blocking_progress();
    criterion_cache_effectiveness();
    criterion_gap_arithmetic();
    criterion_prompt_goldens();
    criterion_cli_determinism();
    if (failures == 0)
        std::cout << "all acceptance criteria passed\n";
    else
        std::cout << failures << " acceptance criteria failed\n";
    return failures == 0 ? 0 : 1;
}
