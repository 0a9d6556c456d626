#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "logitext/check.hpp"
#include "logitext/gaps.hpp"
#include "logitext/parser.hpp"

namespace {

using namespace logitext;

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnsat = 3;
constexpr int kExitTimeout = 4;
constexpr int kExitOracle = 5;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("no such file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Json read_json_file(const std::string& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw UsageError("invalid JSON in " + path + ": " + e.what());
    }
}

struct CommonOpts {
    std::string doc_path;
    std::vector<std::string> assigns;
    std::string oracle_kind = "scripted";
    std::string script_path;
    std::string remote_url;
    std::string remote_model = "default";
    double flip = 0.0;
    double timeout = 3000.0;
    int max_iters = 5;
    std::string cache_path;
    unsigned seed = 0;
    std::string trace_path;
    std::vector<std::string> projection;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("file", opts.doc_path, "Document file (.lt)")->required();
    cmd->add_option("--assign", opts.assigns,
                    "Input binding k=v; bare true/false parse as booleans, v=@file reads the "
                    "value from a file");
    cmd->add_option("--oracle", opts.oracle_kind, "Oracle backend: scripted or remote")
        ->check(CLI::IsMember({"scripted", "remote"}));
    cmd->add_option("--script", opts.script_path, "Rules file for the scripted oracle");
    cmd->add_option("--remote-url", opts.remote_url, "Base URL of the chat-completion endpoint");
    cmd->add_option("--remote-model", opts.remote_model, "Model name for the remote oracle");
    cmd->add_option("--flip", opts.flip,
                    "Scripted oracle: probability of flipping each verify judgment")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--timeout", opts.timeout, "Wall-clock budget in seconds");
    cmd->add_option("--max-iters", opts.max_iters, "Refinement rounds per text constraint");
    cmd->add_option("--cache", opts.cache_path, "Solution cache file (JSON lines)");
    cmd->add_option("--seed", opts.seed, "Random seed for the scripted oracle");
    cmd->add_option("--trace", opts.trace_path, "Write a JSON-lines trace of solver activity");
    cmd->add_option("--project", opts.projection,
                    "Variables the blocking / cover-distinctness projection uses");
}

Assignment parse_assigns(const ParsedDocument& doc, const std::vector<std::string>& assigns) {
    Assignment input;
    for (const auto& spec : assigns) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw UsageError("--assign expects k=v, got: " + spec);
        std::string name = spec.substr(0, eq);
        std::string raw = spec.substr(eq + 1);
        auto kind = doc.kind_of(name);
        if (!kind) throw UsageError("--assign names undeclared variable '" + name + "'");
        if (!raw.empty() && raw[0] == '@') {
            std::string text = read_file(raw.substr(1));
            if (!text.empty() && text.back() == '\n') text.pop_back();
            raw = text;
            if (*kind == VarKind::Bool)
                throw UsageError("@file values only apply to string variables");
            input.bind(name, raw);
            continue;
        }
        if (*kind == VarKind::Bool) {
            if (raw == "true")
                input.bind(name, true);
            else if (raw == "false")
                input.bind(name, false);
            else
                throw UsageError("boolean variable '" + name + "' needs true or false, got: " +
                                 raw);
        } else {
            input.bind(name, raw);
        }
    }
    return input;
}

std::unique_ptr<OracleBackend> make_backend(const CommonOpts& opts) {
    if (opts.oracle_kind == "scripted") {
        if (opts.script_path.empty())
            throw UsageError("--oracle scripted requires --script rules.json");
        OracleScript script = OracleScript::load(opts.script_path);
        return std::make_unique<ScriptedOracle>(std::move(script), opts.flip, opts.seed);
    }
    RemoteOracleConfig config;
    if (!opts.remote_url.empty()) config.base_url = opts.remote_url;
    config.model = opts.remote_model;
    return std::make_unique<RemoteOracle>(config);
}

SolverConfig make_config(const CommonOpts& opts) {
    SolverConfig config;
    config.max_refinements = opts.max_iters;
    config.timeout_seconds = opts.timeout;
    config.seed = opts.seed;
    if (!opts.cache_path.empty()) config.cache_path = opts.cache_path;
    config.projection = opts.projection;
    config.validate();
    return config;
}

struct Session {
    ParsedDocument doc;
    Assignment input;
    SolverConfig config;
    std::unique_ptr<OracleBackend> backend;
    SolutionCache cache;
    std::unique_ptr<TraceLog> trace;
};

Session open_session(const CommonOpts& opts) {
    Session s;
    s.doc = parse_document(read_file(opts.doc_path));
    for (const auto& w : s.doc.warnings) std::cerr << "warning: " << w << "\n";
    s.input = parse_assigns(s.doc, opts.assigns);
    s.config = make_config(opts);
    s.backend = make_backend(opts);
    if (s.config.cache_path) s.cache.attach_file(*s.config.cache_path);
    if (!opts.trace_path.empty()) s.trace = std::make_unique<TraceLog>(opts.trace_path);
    return s;
}

int cmd_parse(const std::string& path) {
    ParsedDocument doc = parse_document(read_file(path));
    for (const auto& w : doc.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << canonical_json(doc.to_json()) << "\n";
    return kExitOk;
}

int cmd_check(const CommonOpts& opts) {
    Session s = open_session(opts);
    CheckOutcome outcome =
        check(s.doc, s.input, s.config, *s.backend, s.cache, s.trace.get());
    Json out = Json::object();
    switch (outcome.status) {
        case CheckOutcome::Status::Sat:
            out["status"] = "sat";
            out["assignment"] = outcome.assignment.to_json();
            break;
        case CheckOutcome::Status::Unsat:
            out["status"] = "unsat";
            break;
        case CheckOutcome::Status::Timeout:
            out["status"] = "timeout";
            break;
    }
    out["stats"] = outcome.stats.to_json();
    std::cout << canonical_json(out) << "\n";
    std::cerr << "wall_seconds=" << outcome.stats.wall_seconds << "\n";
    if (outcome.status == CheckOutcome::Status::Unsat) return kExitUnsat;
    if (outcome.status == CheckOutcome::Status::Timeout) return kExitTimeout;
    return kExitOk;
}

int cmd_cover(const CommonOpts& opts, std::optional<int> limit) {
    Session s = open_session(opts);
    s.config.cover = true;
    s.config.cover_limit = limit;
    CoverResult result =
        check_cover(s.doc, s.input, s.config, *s.backend, s.cache, s.trace.get());
    for (const auto& a : result.assignments)
        std::cout << canonical_json(Json{{"assignment", a.to_json()}}) << "\n";
    Json status = Json{{"count", result.assignments.size()},
                       {"stats", result.stats.to_json()},
                       {"status", result.status}};
    std::cout << canonical_json(status) << "\n";
    return result.status == "timeout" ? kExitTimeout : kExitOk;
}

int cmd_audit(const CommonOpts& opts) {
    Session s = open_session(opts);
    for (const auto& v : s.doc.bool_vars)
        if (!s.input.contains(v))
            throw UsageError("audit needs a total assignment; missing '" + v + "'");
    for (const auto& v : s.doc.string_vars)
        if (!s.input.contains(v))
            throw UsageError("audit needs a total assignment; missing '" + v + "'");
    auto judgments = verify_all(s.doc, s.input, *s.backend);
    bool all_ok = true;
    Json arr = Json::array();
    for (const auto& j : judgments) {
        arr.push_back(j.to_json());
        if (j.predicted != j.target) all_ok = false;
    }
    std::cout << canonical_json(Json{{"consistent", all_ok}, {"judgments", arr}}) << "\n";
    return all_ok ? kExitOk : kExitUnsat;
}

int cmd_gaps(const std::string& doc_path,
             const std::string& labels_path,
             const std::string& subject_path,
             const std::string& policy_var,
             const std::vector<std::string>& projection,
             bool csv) {
    ParsedDocument doc = parse_document(read_file(doc_path));
    if (labels_path.empty() && subject_path.empty())
        throw UsageError("gaps needs --labels and/or --subject");

    GapReport report;
    if (!labels_path.empty()) {
        Json j = read_json_file(labels_path);
        std::vector<bool> labels = j.at("labels").get<std::vector<bool>>();
        std::vector<bool> predictions = j.at("predictions").get<std::vector<bool>>();
        std::vector<Assignment> clause_values;
        for (const auto& a : j.at("clause_values")) clause_values.push_back(Assignment::from_json(a));
        if (labels.empty()) throw UsageError("labels file has no instances");
        FormulaPtr policy;
        for (const auto& f : doc.formulas)
            if (f->kind == Formula::Kind::Iff && f->name == policy_var) policy = f->args[0];
        if (!policy)
            throw UsageError("document has no definition for policy variable '" + policy_var +
                             "'");
        try {
            report = score_composition(labels, predictions, clause_values, policy);
        } catch (const LengthMismatch& e) {
            throw UsageError(e.what());
        }
    }
    if (!subject_path.empty()) {
        Json j = read_json_file(subject_path);
        Assignment frozen;
        if (j.contains("frozen")) frozen = Assignment::from_json(j.at("frozen"));
        std::vector<std::vector<Assignment>> instances;
        for (const auto& inst : j.at("instances")) {
            std::vector<Assignment> one;
            for (const auto& a : inst) one.push_back(Assignment::from_json(a));
            instances.push_back(std::move(one));
        }
        if (instances.empty()) throw UsageError("subject file has no instances");
        SolverConfig config;
        config.projection = projection;
        std::vector<std::string> all_bools(doc.bool_vars.begin(), doc.bool_vars.end());
        report = merge_reports(report,
                               score_enumeration(instances, doc.formulas, frozen, all_bools,
                                                 projection_vars(doc, config)));
    }
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    if (csv)
        std::cout << report.to_csv();
    else
        std::cout << canonical_json(report.to_json()) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid text/logic document checker"};
    app.require_subcommand(1);

    std::string parse_path;
    CLI::App* parse_cmd = app.add_subcommand("parse", "Parse a document and print its JSON form");
    parse_cmd->add_option("file", parse_path, "Document file (.lt)")->required();

    CommonOpts check_opts;
    CLI::App* check_cmd = app.add_subcommand("check", "Decide satisfiability of a document");
    add_common(check_cmd, check_opts);

    CommonOpts cover_opts;
    std::optional<int> cover_limit;
    CLI::App* cover_cmd = app.add_subcommand("cover", "Enumerate distinct satisfying assignments");
    add_common(cover_cmd, cover_opts);
    cover_cmd->add_option("--limit", cover_limit, "Stop after this many assignments");

    CommonOpts audit_opts;
    CLI::App* audit_cmd =
        app.add_subcommand("audit", "Verify every text constraint of a total assignment");
    add_common(audit_cmd, audit_opts);

    std::string gaps_doc, gaps_labels, gaps_subject, gaps_policy = "d";
    std::vector<std::string> gaps_projection;
    bool gaps_csv = false;
    CLI::App* gaps_cmd = app.add_subcommand("gaps", "Score subject transcripts against the solver");
    gaps_cmd->add_option("file", gaps_doc, "Document file (.lt)")->required();
    gaps_cmd->add_option("--labels", gaps_labels,
                         "JSON file with labels, predictions, and clause_values");
    gaps_cmd->add_option("--subject", gaps_subject,
                         "JSON file with frozen bindings and per-instance assignment lists");
    gaps_cmd->add_option("--policy", gaps_policy, "Policy output variable (default: d)");
    gaps_cmd->add_option("--project", gaps_projection, "Projection for assignment distinctness");
    gaps_cmd->add_flag("--csv", gaps_csv, "Emit CSV instead of JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*parse_cmd) return cmd_parse(parse_path);
        if (*check_cmd) return cmd_check(check_opts);
        if (*cover_cmd) return cmd_cover(cover_opts, cover_limit);
        if (*audit_cmd) return cmd_audit(audit_opts);
        if (*gaps_cmd)
            return cmd_gaps(gaps_doc, gaps_labels, gaps_subject, gaps_policy, gaps_projection,
                            gaps_csv);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const OracleError& e) {
        std::cerr << "oracle error: " << e.what() << "\n";
        return kExitOracle;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
