#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "logitext/document.hpp"

namespace logitext {

struct OracleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedResponse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstraintTarget {
    NLTC nltc;
    bool target = false;
};

struct OracleRequest {
    enum class Kind { Propose, Verify };
    Kind kind = Kind::Propose;
    std::vector<ConstraintTarget> constraints;
    Assignment context;                        // bound dependency values
    std::optional<std::string> candidate;      // verify only
    std::optional<std::string> candidate_var;  // variable the candidate realizes
    std::vector<VerifyJudgment> failed;        // propose refinement only
    std::vector<std::string> history;          // prior candidates, oldest first
};

struct Prompt {
    std::string system;
    std::string user;
};

Prompt build_propose_prompt(const OracleRequest& req);
Prompt build_verify_prompt(const OracleRequest& req);

// Strict parse of the verify JSON array; salvages the first top-level [...]
// span from prose-wrapped replies. Every expected id must appear exactly once;
// extra ids are dropped with a warning. Throws MalformedResponse otherwise.
std::vector<VerifyJudgment> parse_verify_response(const std::string& raw,
                                                  const std::vector<std::string>& expected_ids,
                                                  std::vector<std::string>* warnings = nullptr);

class OracleBackend {
public:
    virtual ~OracleBackend() = default;
    virtual std::string propose(const OracleRequest& req) = 0;
    virtual std::vector<VerifyJudgment> verify(const OracleRequest& req) = 0;
};

// ---------------------------------------------------------------------------
// Deterministic scripted oracle

// Sentinel candidate for refused target combinations; never verifies.
inline constexpr const char* kUnrealizable = "UNREALIZABLE";

struct OracleScript {
    // NLTC id -> keywords that must all appear for the constraint to hold.
    std::map<std::string, std::vector<std::string>> rules;
    // Target combinations declared unrealizable; a combination matches a
    // request when every (id, target) pair in it appears among the targets.
    std::vector<std::vector<std::pair<std::string, bool>>> refusals;

    static OracleScript from_json(const Json& j);
    static OracleScript load(const std::string& path);
};

class ScriptedOracle : public OracleBackend {
public:
    explicit ScriptedOracle(OracleScript script, double flip_probability = 0.0,
                            unsigned seed = 0);

    std::string propose(const OracleRequest& req) override;
    std::vector<VerifyJudgment> verify(const OracleRequest& req) override;

private:
    bool keywords_present(const std::string& id, const std::string& haystack) const;

    OracleScript script_;
    double flip_probability_;
    std::mt19937 rng_;
};

// ---------------------------------------------------------------------------
// Remote chat-completion backend

struct RemoteOracleConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "default";
    std::string api_key_env = "LT_API_KEY";
    double propose_temperature = 0.7;
    double verify_temperature = 0.0;  // verify runs at temperature 0
    int verify_retries = 2;
    int transport_retries = 2;
};

class RemoteOracle : public OracleBackend {
public:
    explicit RemoteOracle(RemoteOracleConfig config);

    std::string propose(const OracleRequest& req) override;
    std::vector<VerifyJudgment> verify(const OracleRequest& req) override;

private:
    std::string complete(const Prompt& prompt, double temperature);

    RemoteOracleConfig config_;
};

}  // namespace logitext
