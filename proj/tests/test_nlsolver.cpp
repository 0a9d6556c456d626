#include <doctest.h>

#include <cstdio>

#include "logitext/nlsolver.hpp"

using namespace logitext;

namespace {

NLTC make_nltc(const std::string& id, const std::string& clause,
               std::vector<std::pair<std::string, std::string>> deps = {}) {
    NLTC n;
    n.id = id;
    n.out_var = id;
    n.clause = clause;
    n.deps = std::move(deps);
    return n;
}

std::vector<NLTC> two_constraints() {
    return {make_nltc("C1", "group clause", {{"messages", "M"}}),
            make_nltc("C4", "violence clause", {{"message", "M"}})};
}

OracleScript tiny_script() {
    OracleScript s;
    s.rules = {{"C1", {"group"}}, {"C4", {"violence"}}};
    return s;
}

// A stub backend whose verify always fails the first `failing_rounds` rounds.
class CountingBackend : public OracleBackend {
public:
    explicit CountingBackend(int failing_rounds) : failing_rounds_(failing_rounds) {}

    std::string propose(const OracleRequest& req) override {
        ++propose_calls;
        last_failed = req.failed;
        last_history = req.history;
        return "attempt " + std::to_string(propose_calls);
    }

    std::vector<VerifyJudgment> verify(const OracleRequest& req) override {
        ++verify_calls;
        bool ok = verify_calls > failing_rounds_;
        std::vector<VerifyJudgment> out;
        for (const auto& ct : req.constraints)
            out.push_back({ct.nltc.id, ct.nltc.clause, ct.target,
                           ok ? ct.target : !ct.target, "stub"});
        return out;
    }

    int propose_calls = 0;
    int verify_calls = 0;
    std::vector<VerifyJudgment> last_failed;
    std::vector<std::string> last_history;

private:
    int failing_rounds_;
};

}  // namespace

TEST_CASE("stable_hash is stable and collision-sensitive") {
    CHECK(stable_hash("abc") == stable_hash("abc"));
    CHECK(stable_hash("abc") != stable_hash("abd"));
    CHECK(stable_hash("").size() == 16);
}

TEST_CASE("cache keys canonicalize ordering") {
    auto constraints = two_constraints();
    CacheKey a = CacheKey::make("M", constraints, {{"C1", true}, {"C4", false}}, {});
    CacheKey b = CacheKey::make("M", {constraints[1], constraints[0]},
                                {{"C4", false}, {"C1", true}}, {});
    CHECK(a.canonical() == b.canonical());
    CHECK(CacheKey::from_json(a.to_json()).canonical() == a.canonical());

    CacheKey other = CacheKey::make("M", constraints, {{"C1", false}, {"C4", false}}, {});
    CHECK(a.canonical() != other.canonical());
}

TEST_CASE("cache store, lookup, and file persistence") {
    auto constraints = two_constraints();
    CacheKey key = CacheKey::make("M", constraints, {{"C1", true}, {"C4", false}}, {});

    std::string path = "lt_cache_test.jsonl";
    std::remove(path.c_str());
    {
        SolutionCache cache;
        cache.attach_file(path);
        CHECK(cache.lookup(key) == std::nullopt);
        cache.store(key, "first");
        cache.store(key, "second");  // last writer wins
        CHECK(cache.lookup(key) == "second");
    }
    {
        SolutionCache reloaded;
        reloaded.attach_file(path);
        CHECK(reloaded.lookup(key) == "second");
    }
    std::remove(path.c_str());
}

TEST_CASE("partial matching needs agreement and respects string context") {
    auto constraints = two_constraints();
    SolutionCache cache;
    cache.store(CacheKey::make("M", constraints, {{"C1", true}, {"C4", true}}, {}), "both");
    cache.store(CacheKey::make("M", constraints, {{"C1", true}, {"C4", false}}, {}), "one");

    // Exact-complement context: zero agreement, no seed.
    CHECK(cache.closest_partial_match(
              CacheKey::make("M", constraints, {{"C1", false}, {"C4", true}}, {})) == "both");
    CHECK(cache.closest_partial_match(
              CacheKey::make("M", constraints, {{"C1", false}, {"C4", false}}, {})) == "one");

    // Different constraint fingerprint never matches.
    auto other = std::vector<NLTC>{make_nltc("C9", "different", {{"m", "M"}})};
    CHECK(cache.closest_partial_match(
              CacheKey::make("M", other, {{"C9", true}}, {})) == std::nullopt);

    // Conflicting hash of another bound string variable disqualifies an entry.
    cache = SolutionCache{};
    cache.store(CacheKey::make("M", constraints, {{"C1", true}}, {{"U", "v1"}}), "ctx");
    SUBCASE("same string value matches") {
        auto key = CacheKey::make("M", constraints, {{"C1", true}, {"C4", true}}, {{"U", "v1"}});
        // Note: CacheKey::make hashes string values internally.
        CHECK(cache.closest_partial_match(key) == "ctx");
    }
    SUBCASE("different string value conflicts") {
        auto key = CacheKey::make("M", constraints, {{"C1", true}, {"C4", true}}, {{"U", "v2"}});
        CHECK(cache.closest_partial_match(key) == std::nullopt);
    }

    // Ties keep the earliest insertion.
    cache = SolutionCache{};
    cache.store(CacheKey::make("M", constraints, {{"C1", true}, {"C4", false}}, {}), "early");
    cache.store(CacheKey::make("M", constraints, {{"C1", false}, {"C4", true}}, {}), "late");
    CHECK(cache.closest_partial_match(
              CacheKey::make("M", constraints, {{"C1", true}, {"C4", true}}, {})) == "early");
}

TEST_CASE("nlsolve succeeds in one round with a cooperative oracle") {
    ScriptedOracle oracle(tiny_script());
    SolutionCache cache;
    SolverConfig config;
    Deadline deadline(100.0);
    Assignment context{{"C1", true}, {"C4", false}};

    auto r = nlsolve("M", two_constraints(), context, oracle, config, cache, {"M"}, deadline);
    REQUIRE(r.value.has_value());
    CHECK(*r.value == "group msg");
    CHECK(r.propose_calls == 1);
    CHECK(r.verify_calls == 1);
    CHECK(r.rounds == 1);
    CHECK_FALSE(r.cache_hit);
}

TEST_CASE("nlsolve exact cache hit issues no oracle calls") {
    ScriptedOracle oracle(tiny_script());
    SolutionCache cache;
    SolverConfig config;
    Deadline deadline(100.0);
    Assignment context{{"C1", true}, {"C4", false}};

    auto first = nlsolve("M", two_constraints(), context, oracle, config, cache, {"M"}, deadline);
    REQUIRE(first.value.has_value());
    TraceLog trace;
    auto second =
        nlsolve("M", two_constraints(), context, oracle, config, cache, {"M"}, deadline, &trace);
    CHECK(second.cache_hit);
    CHECK(second.value == first.value);
    CHECK(second.propose_calls == 0);
    CHECK(second.verify_calls == 0);
    CHECK(trace.count("nlsolve_cache_hit") == 1);
}

TEST_CASE("nlsolve refines with failure feedback and bounded rounds") {
    SolverConfig config;
    config.max_refinements = 3;
    SolutionCache cache;
    Deadline deadline(100.0);
    Assignment context{{"C1", true}, {"C4", false}};

    SUBCASE("success on the final round") {
        CountingBackend backend(2);
        auto r = nlsolve("M", two_constraints(), context, backend, config, cache, {"M"},
                         deadline);
        CHECK(r.value == "attempt 3");
        CHECK(backend.propose_calls == 3);
        CHECK(backend.verify_calls == 3);
        CHECK(backend.last_failed.size() == 2);    // refine saw the mismatches
        CHECK(backend.last_history.size() == 2);   // and both prior attempts
    }
    SUBCASE("exhaustion returns no value; final refine is skipped") {
        CountingBackend backend(99);
        auto r = nlsolve("M", two_constraints(), context, backend, config, cache, {"M"},
                         deadline);
        CHECK_FALSE(r.value.has_value());
        CHECK(backend.propose_calls == config.max_refinements);
        CHECK(backend.verify_calls == config.max_refinements);
        CHECK(r.history.size() == static_cast<std::size_t>(config.max_refinements));
    }
}

TEST_CASE("nlsolve stores candidates under the context the verifier predicted") {
    // The backend always predicts {C1:true, C4:true}; with target C4=false the
    // round fails, but the candidate is cached under the predicted context.
    class FixedBackend : public OracleBackend {
    public:
        std::string propose(const OracleRequest&) override { return "fixed text"; }
        std::vector<VerifyJudgment> verify(const OracleRequest& req) override {
            std::vector<VerifyJudgment> out;
            for (const auto& ct : req.constraints)
                out.push_back({ct.nltc.id, ct.nltc.clause, ct.target, true, "stub"});
            return out;
        }
    };

    FixedBackend backend;
    SolutionCache cache;
    SolverConfig config;
    config.max_refinements = 1;
    Deadline deadline(100.0);
    auto constraints = two_constraints();

    auto r = nlsolve("M", constraints, Assignment{{"C1", true}, {"C4", false}}, backend, config,
                     cache, {"M"}, deadline);
    CHECK_FALSE(r.value.has_value());
    CacheKey predicted = CacheKey::make("M", constraints, {{"C1", true}, {"C4", true}}, {});
    CHECK(cache.lookup(predicted) == "fixed text");

    // A later query for the predicted context is a pure cache hit.
    auto hit = nlsolve("M", constraints, Assignment{{"C1", true}, {"C4", true}}, backend, config,
                       cache, {"M"}, deadline);
    CHECK(hit.cache_hit);
    CHECK(hit.value == "fixed text");
}

TEST_CASE("nlsolve seeds from the closest partial match") {
    ScriptedOracle oracle(tiny_script());
    SolutionCache cache;
    auto constraints = two_constraints();
    // Pre-seed a solution for a context agreeing on C1.
    CacheKey seed_key = CacheKey::make("M", constraints, {{"C1", true}, {"C4", true}}, {});
    cache.store(seed_key, "group violence msg");

    SolverConfig config;
    Deadline deadline(100.0);
    // Target context {C1:true, C4:false}: seeded candidate fails (violence
    // present), then one propose call fixes it.
    auto r = nlsolve("M", constraints, Assignment{{"C1", true}, {"C4", false}}, oracle, config,
                     cache, {"M"}, deadline);
    REQUIRE(r.value.has_value());
    CHECK(*r.value == "group msg");
    CHECK(r.propose_calls == 1);  // seed replaced the initial propose
    CHECK(r.verify_calls == 2);
    CHECK(r.history.front().first == "group violence msg");
}

TEST_CASE("deadline interrupts the search") {
    CountingBackend backend(99);
    SolutionCache cache;
    SolverConfig config;
    Deadline expired(0.0);
    CHECK_THROWS_AS(nlsolve("M", two_constraints(), Assignment{{"C1", true}, {"C4", false}},
                            backend, config, cache, {"M"}, expired),
                    TimeoutReached);
}
