#include <doctest.h>

#include "logitext/document.hpp"

using namespace logitext;

TEST_CASE("assignment binds and rejects contradictions") {
    Assignment a;
    a.bind("C1", true);
    a.bind("M", std::string("hello"));
    CHECK(a.bool_at("C1"));
    CHECK(a.string_at("M") == "hello");
    CHECK_NOTHROW(a.bind("C1", true));  // idempotent rebind
    CHECK_THROWS_AS(a.bind("C1", false), ConflictError);
    CHECK_THROWS_AS(a.bool_at("missing"), UnboundVarError);
    CHECK_THROWS(a.bool_at("M"));
}

TEST_CASE("assignment merge") {
    Assignment a{{"C1", true}};
    Assignment b{{"C2", false}};
    Assignment m = merge_assignments(a, b);
    CHECK(m.size() == 2);
    CHECK(m.bool_at("C1"));
    CHECK_FALSE(m.bool_at("C2"));

    CHECK(merge_assignments(a, a) == a);
    Assignment conflicting{{"C1", false}};
    CHECK_THROWS_AS(merge_assignments(a, conflicting), ConflictError);

    // Commutative and associative on conflict-free inputs.
    Assignment c{{"C3", true}};
    CHECK(merge_assignments(a, b) == merge_assignments(b, a));
    CHECK(merge_assignments(merge_assignments(a, b), c) ==
          merge_assignments(a, merge_assignments(b, c)));
}

TEST_CASE("assignment JSON round-trip has sorted keys") {
    Assignment a;
    a.bind("z", true);
    a.bind("a", std::string("x"));
    a.bind("m", false);
    std::string s = canonical_json(a.to_json());
    CHECK(s == R"({"a":"x","m":false,"z":true})");
    CHECK(Assignment::from_json(a.to_json()) == a);
}

static FormulaPtr policy_formula() {
    // d = C1 and C2 and (C3 or C4 or C5)
    return Formula::iff(
        "d", Formula::conjunction(
                 {Formula::var("C1"), Formula::var("C2"),
                  Formula::disjunction(
                      {Formula::var("C3"), Formula::var("C4"), Formula::var("C5")})}));
}

TEST_CASE("eval_formula on the policy equivalence") {
    FormulaPtr f = policy_formula();
    Assignment a{{"d", true}, {"C1", true}, {"C2", true},
                 {"C3", true}, {"C4", false}, {"C5", false}};
    CHECK(eval_formula(f, a));

    Assignment b = a;
    b = Assignment{{"d", true}, {"C1", false}, {"C2", true},
                   {"C3", true}, {"C4", false}, {"C5", false}};
    CHECK_FALSE(eval_formula(f, b));

    FormulaPtr g = Formula::disjunction({Formula::var("C4"), Formula::var("C5")});
    CHECK_FALSE(eval_formula(g, Assignment{{"C4", false}, {"C5", false}}));

    CHECK_THROWS_AS(eval_formula(f, Assignment{{"d", true}}), UnboundVarError);
}

TEST_CASE("three-valued evaluation short-circuits") {
    FormulaPtr f = policy_formula();
    // C1 false decides the conjunction regardless of unbound vars.
    CHECK(eval_formula_partial(f, Assignment{{"d", false}, {"C1", false}}) == true);
    CHECK(eval_formula_partial(f, Assignment{{"d", true}, {"C1", false}}) == false);
    CHECK(eval_formula_partial(f, Assignment{{"d", true}}) == std::nullopt);

    FormulaPtr g = Formula::disjunction({Formula::var("a"), Formula::var("b")});
    CHECK(eval_formula_partial(g, Assignment{{"a", true}}) == true);
    CHECK(eval_formula_partial(g, Assignment{{"a", false}}) == std::nullopt);
    CHECK(eval_formula_partial(Formula::negation(Formula::var("a")), Assignment{}) ==
          std::nullopt);
    CHECK(eval_formula_partial(Formula::constant(true), Assignment{}) == true);
}

TEST_CASE("formula JSON round-trip") {
    FormulaPtr f = policy_formula();
    FormulaPtr g = Formula::from_json(f->to_json());
    CHECK(f->to_json() == g->to_json());
    CHECK(g->to_string() == "d = (C1 and C2 and (C3 or C4 or C5))");
}

TEST_CASE("single-child connectives collapse") {
    FormulaPtr f = Formula::conjunction({Formula::var("x")});
    CHECK(f->kind == Formula::Kind::Var);
    CHECK_THROWS(Formula::disjunction({}));
}

TEST_CASE("NLTC dependency helpers") {
    NLTC n;
    n.id = "C1";
    n.out_var = "C1";
    n.clause = "some clause";
    n.deps = {{"messages", "M"}, {"context", "M"}, {"flag", "C8"}};
    CHECK(n.reads("M"));
    CHECK(n.reads("C8"));
    CHECK_FALSE(n.reads("C1"));
    CHECK(n.string_deps({"M"}) == std::vector<std::string>{"M"});  // deduplicated
    CHECK(n.string_deps({}).empty());
}

TEST_CASE("solver config validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.max_refinements = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.timeout_seconds = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SolverConfig{};
    c.cover_limit = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("diagnostics serialization excludes wall clock by default") {
    Diagnostics d;
    d.propose_calls = 3;
    d.wall_seconds = 1.5;
    Json j = d.to_json();
    CHECK_FALSE(j.contains("wall_seconds"));
    CHECK(j["propose_calls"] == 3);
    CHECK(d.to_json(true).contains("wall_seconds"));
}
