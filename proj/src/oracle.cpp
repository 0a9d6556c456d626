#include "logitext/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>

namespace logitext {

namespace {

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

std::string bool_word(bool b) { return b ? "True" : "False"; }

// Bound dependency values are rendered inline beneath each constraint line so
// the model sees the context the clause refers to.
std::string render_constraints_block(const OracleRequest& req) {
    std::ostringstream out;
    bool first = true;
    for (const auto& ct : req.constraints) {
        if (!first) out << "\n";
        first = false;
        out << "- (" << ct.nltc.id << ") target=" << bool_word(ct.target)
            << " :: " << ct.nltc.clause;
        for (const auto& [quoted, var] : ct.nltc.deps) {
            if (req.candidate_var && var == *req.candidate_var) continue;
            auto value = req.context.get(var);
            if (!value) continue;
            out << "\n  where \"" << quoted << "\" is " << value_to_string(*value);
        }
    }
    return out.str();
}

std::string render_failed_block(const OracleRequest& req) {
    if (req.failed.empty()) return "(none)";
    std::ostringstream out;
    bool first = true;
    for (const auto& j : req.failed) {
        if (!first) out << "\n";
        first = false;
        out << "- (" << j.id << ") target=" << bool_word(j.target)
            << ", predicted=" << bool_word(j.predicted) << " :: " << j.description
            << " [why failed last time: " << j.rationale << "]";
    }
    return out.str();
}

std::string render_history_block(const OracleRequest& req) {
    if (req.history.empty()) return "(none)";
    std::ostringstream out;
    bool first = true;
    for (const auto& h : req.history) {
        if (!first) out << "\n\n---\n\n";
        first = false;
        out << h;
    }
    return out.str();
}

// Keeps the triple-quoted candidate block well-delimited.
std::string escape_candidate(const std::string& text) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text.compare(pos, 3, "\"\"\"") == 0) {
            out += "\\\"\"\"";
            pos += 3;
        } else {
            out += text[pos++];
        }
    }
    return out;
}

}  // namespace

Prompt build_propose_prompt(const OracleRequest& req) {
    require(req.kind == OracleRequest::Kind::Propose, "propose prompt from non-propose request");
    require(!req.constraints.empty(), "propose request needs at least one constraint");
    require(!req.candidate.has_value(), "propose request must not carry a candidate");

    Prompt p;
    p.system =
        "You write concise, clear prose that meets semantic constraints. "
        "Return ONLY the text, no preambles.";
    std::ostringstream user;
    user << "You must produce a text that satisfies the following semantic constraint truth "
            "values.\n"
         << "\n"
         << "Constraints (with target truth values):\n"
         << render_constraints_block(req) << "\n"
         << "\n"
         << "If some constraints previously failed, focus on satisfying them now:\n"
         << render_failed_block(req) << "\n"
         << "\n"
         << "Guidelines:\n"
         << "Write one coherent text (few paragraphs max) that attempts to satisfy ALL target "
            "truth values.\n"
         << "The text should be natural and readable.\n"
         << "Avoid mentioning constraints explicitly.\n"
         << "Do not include JSON. Output ONLY the text.\n"
         << "\n"
         << "Previous attempts for context (do NOT copy; improve instead):\n"
         << render_history_block(req) << "\n";
    p.user = user.str();
    return p;
}

Prompt build_verify_prompt(const OracleRequest& req) {
    require(req.kind == OracleRequest::Kind::Verify, "verify prompt from non-verify request");
    require(!req.constraints.empty(), "verify request needs at least one constraint");
    require(req.candidate.has_value(), "verify request needs a candidate");

    Prompt p;
    p.system =
        "You are a meticulous verifier. "
        "Given a candidate text and a list of constraints with desired truth values, "
        "judge for EACH constraint whether it is semantically TRUE or FALSE in the candidate "
        "text. "
        "Be strict and literal, not aspirational.";
    std::ostringstream user;
    user << "Candidate text:\n"
         << "\"\"\"\n"
         << escape_candidate(*req.candidate) << "\n"
         << "\"\"\"\n"
         << "\n"
         << "\n"
         << "Evaluate each constraint independently. For each item, return JSON array entries "
            "of the form:\n"
         << "{\n"
         << "  \"id\": \"<constraint id>\",\n"
         << "  \"description\": \"<verbatim description>\",\n"
         << "  \"target\": true|false,\n"
         << "  \"predicted\": true|false,\n"
         << "  \"rationale\": \"<short explanation>\"\n"
         << "}\n"
         << "\n"
         << "Constraints:\n"
         << render_constraints_block(req) << "\n"
         << "\n"
         << "Return ONLY valid JSON array, nothing else.";
    p.user = user.str();
    return p;
}

std::vector<VerifyJudgment> parse_verify_response(const std::string& raw,
                                                  const std::vector<std::string>& expected_ids,
                                                  std::vector<std::string>* warnings) {
    // Salvage the first top-level [...] span (string-aware bracket scan).
    std::size_t start = std::string::npos;
    int depth = 0;
    bool in_string = false, escaped = false;
    std::size_t end = std::string::npos;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (in_string) {
            if (escaped)
                escaped = false;
            else if (c == '\\')
                escaped = true;
            else if (c == '"')
                in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            if (depth == 0 && start == std::string::npos) start = i;
            ++depth;
        } else if (c == ']') {
            if (depth > 0 && --depth == 0 && start != std::string::npos) {
                end = i;
                break;
            }
        }
    }
    if (start == std::string::npos || end == std::string::npos)
        throw MalformedResponse("no JSON array found in response");

    Json parsed;
    try {
        parsed = Json::parse(raw.substr(start, end - start + 1));
    } catch (const Json::parse_error& e) {
        throw MalformedResponse(std::string("invalid JSON: ") + e.what());
    }
    if (!parsed.is_array()) throw MalformedResponse("response is not a JSON array");

    std::map<std::string, VerifyJudgment> by_id;
    for (const auto& entry : parsed) {
        if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string())
            throw MalformedResponse("array entry missing string 'id'");
        std::string id = entry["id"].get<std::string>();
        if (!entry.contains("predicted") || !entry["predicted"].is_boolean())
            throw MalformedResponse("entry '" + id + "' missing boolean 'predicted'");
        if (entry.contains("target") && !entry["target"].is_boolean())
            throw MalformedResponse("entry '" + id + "' has non-boolean 'target'");
        if (std::find(expected_ids.begin(), expected_ids.end(), id) == expected_ids.end()) {
            if (warnings) warnings->push_back("ignoring unexpected id '" + id + "'");
            continue;
        }
        if (by_id.count(id)) throw MalformedResponse("duplicate id '" + id + "'");
        VerifyJudgment j;
        j.id = id;
        j.description = entry.value("description", std::string{});
        j.target = entry.value("target", false);
        j.predicted = entry["predicted"].get<bool>();
        j.rationale = entry.value("rationale", std::string{});
        by_id.emplace(id, std::move(j));
    }
    std::vector<VerifyJudgment> out;
    for (const auto& id : expected_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw MalformedResponse("missing id " + id);
        out.push_back(it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scripted oracle

OracleScript OracleScript::from_json(const Json& j) {
    OracleScript s;
    if (j.contains("rules"))
        for (auto it = j["rules"].begin(); it != j["rules"].end(); ++it)
            s.rules[it.key()] = it.value().get<std::vector<std::string>>();
    if (j.contains("refusals"))
        for (const auto& combo : j["refusals"]) {
            std::vector<std::pair<std::string, bool>> pairs;
            for (const auto& pair : combo)
                pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<bool>());
            s.refusals.push_back(std::move(pairs));
        }
    return s;
}

OracleScript OracleScript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open oracle script '" + path + "'");
    Json j;
    in >> j;
    return from_json(j);
}

ScriptedOracle::ScriptedOracle(OracleScript script, double flip_probability, unsigned seed)
    : script_(std::move(script)), flip_probability_(flip_probability), rng_(seed) {}

bool ScriptedOracle::keywords_present(const std::string& id, const std::string& haystack) const {
    auto it = script_.rules.find(id);
    if (it == script_.rules.end()) return false;  // no rule, never holds
    return std::all_of(it->second.begin(), it->second.end(), [&](const std::string& kw) {
        return haystack.find(kw) != std::string::npos;
    });
}

std::string ScriptedOracle::propose(const OracleRequest& req) {
    require(req.kind == OracleRequest::Kind::Propose, "propose on non-propose request");
    require(!req.constraints.empty(), "propose request needs at least one constraint");

    for (const auto& combo : script_.refusals) {
        bool all = !combo.empty();
        for (const auto& [id, value] : combo) {
            bool found = false;
            for (const auto& ct : req.constraints)
                if (ct.nltc.id == id && ct.target == value) {
                    found = true;
                    break;
                }
            if (!found) {
                all = false;
                break;
            }
        }
        if (all) return kUnrealizable;
    }

    std::vector<const ConstraintTarget*> sorted;
    for (const auto& ct : req.constraints) sorted.push_back(&ct);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->nltc.id < b->nltc.id; });
    std::string text;
    for (const auto* ct : sorted) {
        if (!ct->target) continue;
        auto it = script_.rules.find(ct->nltc.id);
        if (it == script_.rules.end()) continue;
        for (const auto& kw : it->second) {
            if (!text.empty()) text += " ";
            text += kw;
        }
    }
    if (!text.empty()) text += " ";
    text += "msg";

    // Never repeat a candidate within one search; history carries the attempts.
    auto seen = [&](const std::string& t) {
        return std::find(req.history.begin(), req.history.end(), t) != req.history.end();
    };
    if (seen(text)) {
        for (int k = 2;; ++k) {
            std::string alt = text + " alt" + std::to_string(k);
            if (!seen(alt)) return alt;
        }
    }
    return text;
}

std::vector<VerifyJudgment> ScriptedOracle::verify(const OracleRequest& req) {
    require(req.kind == OracleRequest::Kind::Verify, "verify on non-verify request");
    require(!req.constraints.empty(), "verify request needs at least one constraint");
    require(req.candidate.has_value(), "verify request needs a candidate");

    std::bernoulli_distribution flip(flip_probability_);
    std::vector<VerifyJudgment> out;
    bool refused = *req.candidate == kUnrealizable;
    for (const auto& ct : req.constraints) {
        std::string haystack = *req.candidate;
        for (const auto& [quoted, var] : ct.nltc.deps) {
            if (req.candidate_var && var == *req.candidate_var) continue;
            auto value = req.context.get(var);
            if (!value) continue;
            if (is_bool(*value))
                haystack += " " + var + "=" + bool_word(std::get<bool>(*value));
            else
                haystack += " " + std::get<std::string>(*value);
        }
        VerifyJudgment j;
        j.id = ct.nltc.id;
        j.description = ct.nltc.clause;
        j.target = ct.target;
        j.predicted = refused ? !ct.target : keywords_present(ct.nltc.id, haystack);
        j.rationale = refused ? "unrealizable" : "keyword-match";
        if (flip_probability_ > 0.0 && flip(rng_)) j.predicted = !j.predicted;
        out.push_back(std::move(j));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Remote backend

RemoteOracle::RemoteOracle(RemoteOracleConfig config) : config_(std::move(config)) {}

std::string RemoteOracle::complete(const Prompt& prompt, double temperature) {
    Json body = Json::object();
    body["model"] = config_.model;
    body["messages"] = Json::array({Json{{"role", "system"}, {"content", prompt.system}},
                                    Json{{"role", "user"}, {"content", prompt.user}}});
    body["temperature"] = temperature;

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
        httplib::Client client(config_.base_url);
        client.set_read_timeout(300, 0);
        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        try {
            Json reply = Json::parse(res->body);
            return trim_copy(
                reply.at("choices").at(0).at("message").at("content").get<std::string>());
        } catch (const std::exception& e) {
            last_error = std::string("bad completion payload: ") + e.what();
        }
    }
    throw OracleError("remote oracle failed: " + last_error);
}

std::string RemoteOracle::propose(const OracleRequest& req) {
    return complete(build_propose_prompt(req), config_.propose_temperature);
}

std::vector<VerifyJudgment> RemoteOracle::verify(const OracleRequest& req) {
    Prompt prompt = build_verify_prompt(req);
    std::vector<std::string> ids;
    for (const auto& ct : req.constraints) ids.push_back(ct.nltc.id);
    std::string last_error;
    for (int attempt = 0; attempt <= config_.verify_retries; ++attempt) {
        std::string raw = complete(prompt, config_.verify_temperature);
        try {
            auto judged = parse_verify_response(raw, ids);
            // Targets come from the request, whatever the model echoed.
            for (std::size_t i = 0; i < judged.size(); ++i)
                judged[i].target = req.constraints[i].target;
            return judged;
        } catch (const MalformedResponse& e) {
            last_error = e.what();
        }
    }
    throw OracleError("verify response stayed malformed after retries: " + last_error);
}

}  // namespace logitext
