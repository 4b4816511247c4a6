#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "privtrace/engine.hpp"

using namespace privtrace;

TEST_CASE("the hospital step yields the adversary's distribution") {
    const fixtures::HospitalRun run;
    const EngineContext ctx = run.context();
    const RunTree tree = run_script(ctx, run.script);

    REQUIRE(tree.states.size() == 5);  // root, three children, fail
    CHECK(tree.states[1].branch_prob == Rational(0));
    CHECK(tree.states[2].branch_prob == Rational(1, 3));
    CHECK(tree.states[3].branch_prob == Rational(2, 3));

    CHECK_FALSE(tree.states[1].report.violated);
    CHECK_FALSE(tree.states[2].report.violated);
    CHECK(tree.states[3].report.violated);  // the Physics branch, via the join
    REQUIRE(tree.states[3].report.witness.has_value());
    CHECK(tree.states[3].report.witness->schema_id == run.h.cat.schema_id("confirmed"));

    CHECK(tree.fail_reachable());
    CHECK(violation_probability(tree) == Rational(2, 3));
    CHECK(tree.states[static_cast<std::size_t>(tree.fail_id)].failed);
    CHECK(tree.states[static_cast<std::size_t>(tree.fail_id)].path_prob == Rational(2, 3));
}

TEST_CASE("oracle distances along the hospital run") {
    const fixtures::HospitalRun run;
    const RunTree tree = run_script(run.context(), run.script);
    const auto d = oracle_distances(tree);

    // Root knowledge (the board fact alone) is incomparable with the target.
    CHECK_FALSE(d.at(0).has_value());
    CHECK(d.at(1) == Rational(15, 10));
    CHECK(d.at(2) == Rational(6, 5));
    // The joined CoVid fact is closer than the hypothesis row itself.
    CHECK(d.at(3) == Rational(9, 10));
    CHECK(d.count(tree.fail_id) == 0);
}

TEST_CASE("oracle distances for children carrying bare published rows") {
    // No deduction rules: each child knows exactly one published row.
    fixtures::Hospital h;
    const std::map<std::string, Database> no_ext;
    const ResolvedRules no_rules = ResolvedRules::resolve(h.cat, {}, no_ext);
    const std::vector<PolicyAtom> policy;
    EngineContext ctx;
    ctx.cat = &h.cat;
    ctx.externals = &no_ext;
    ctx.rules = &no_rules;
    ctx.policy = &policy;
    ctx.target = {h.target()};

    const auto rows = h.published_rows();
    ScriptStep step;
    step.label = "men-rows";
    step.branches.push_back(ScriptBranch{Rational(0), {Fact{h.pubrec, rows[1]}}});
    step.branches.push_back(ScriptBranch{Rational(1, 3), {Fact{h.pubrec, rows[3]}}});
    step.branches.push_back(ScriptBranch{Rational(2, 3), {Fact{h.pubrec, rows[4]}}});

    const auto d = oracle_distances(run_script(ctx, {step}));
    CHECK(d.at(1) == Rational(15, 10));
    CHECK(d.at(2) == Rational(6, 5));
    CHECK(d.at(3) == Rational(11, 10));
    CHECK_FALSE(d.at(0).has_value());
}

TEST_CASE("a state that reaches the target reports distance zero") {
    fixtures::HospitalRun run;
    EngineContext ctx = run.context();
    ScriptStep step;
    step.label = "oracle-leak";
    step.branches.push_back(ScriptBranch{Rational(1), {run.h.target()}});
    const RunTree tree = run_script(ctx, {step});
    CHECK(tree.states[1].report.distance == Rational(0));
}

TEST_CASE("branch adding nothing keeps the parent verdict and knowledge") {
    fixtures::HospitalRun run;
    ScriptStep noop;
    noop.label = "noop";
    noop.branches.push_back(ScriptBranch{Rational(1), {}});
    const RunTree tree = run_script(run.context(), {noop});
    REQUIRE(tree.states.size() == 2);
    CHECK(tree.states[1].saturated == tree.states[0].saturated);
    CHECK(tree.states[1].report.violated == tree.states[0].report.violated);
}

TEST_CASE("expand validates its inputs") {
    const fixtures::HospitalRun run;
    const EngineContext ctx = run.context();
    const RunTree tree = run_script(ctx, run.script);

    ScriptStep bad;
    bad.label = "bad";
    bad.branches.push_back(ScriptBranch{Rational(1, 2), {}});
    bad.branches.push_back(ScriptBranch{Rational(2, 5), {}});
    CHECK_THROWS_AS(expand(ctx, tree.states[0], bad), std::invalid_argument);

    ScriptStep ok;
    ok.label = "ok";
    ok.branches.push_back(ScriptBranch{Rational(1), {}});
    // Neither the fail node nor a violated state may take a further step.
    CHECK_THROWS_AS(expand(ctx, tree.states[static_cast<std::size_t>(tree.fail_id)], ok),
                    std::invalid_argument);
    CHECK_THROWS_AS(expand(ctx, tree.states[3], ok), std::invalid_argument);
}

TEST_CASE("violated states take no further script steps") {
    const fixtures::HospitalRun run;
    std::vector<ScriptStep> script = run.script;
    ScriptStep extra;
    extra.label = "followup";
    extra.branches.push_back(ScriptBranch{Rational(1), {}});
    script.push_back(extra);

    const RunTree tree = run_script(run.context(), script);
    // Children of the two surviving states only: 1 root + 3 + 2 + fail.
    REQUIRE(tree.states.size() == 7);
    for (const RunState& s : tree.states)
        if (s.parent == 3) CHECK(false);  // the violated state must be a leaf
    CHECK(violation_probability(tree) == Rational(2, 3));
}

TEST_CASE("knowledge grows monotonically along every path") {
    const fixtures::HospitalRun run;
    std::vector<ScriptStep> script = run.script;
    ScriptStep extra;
    extra.label = "followup";
    extra.branches.push_back(ScriptBranch{Rational(1, 2), {}});
    extra.branches.push_back(
        ScriptBranch{Rational(1, 2), {Fact{run.h.pubrec, run.h.published_rows()[0]}}});
    script.push_back(extra);

    const RunTree tree = run_script(run.context(), script);
    for (const RunState& s : tree.states) {
        if (s.failed || s.parent < 0) continue;
        const RunState& parent = tree.states[static_cast<std::size_t>(s.parent)];
        for (const auto& [f, p] : parent.saturated) CHECK(s.tag.contains(f));
        for (const auto& [f, p] : s.tag) CHECK(s.saturated.contains(f));
    }
}

TEST_CASE("violation probability sums disjoint leaves") {
    // Two violating leaves at path mass 1/3 and 1/6.
    fixtures::Hospital h;
    const std::map<std::string, Database> no_ext;
    const ResolvedRules no_rules = ResolvedRules::resolve(h.cat, {}, no_ext);
    std::vector<PolicyAtom> policy{make_policy_atom(
        h.pubrec,
        Tuple{{Value::wildcard(), Value::wildcard(), Value::wildcard(),
               Value::tax_node("ailment", "CoVid")}},
        h.cat)};
    EngineContext ctx;
    ctx.cat = &h.cat;
    ctx.externals = &no_ext;
    ctx.rules = &no_rules;
    ctx.policy = &policy;

    const Fact covid{h.pubrec, Tuple{{Value::interval(40, 49), Value::atom("M"),
                                      Value::atom("Physics"),
                                      Value::tax_node("ailment", "CoVid")}}};
    const Fact flu{h.pubrec, Tuple{{Value::interval(40, 49), Value::atom("M"),
                                    Value::atom("Physics"),
                                    Value::tax_node("ailment", "Flu")}}};
    ScriptStep s1;
    s1.branches.push_back(ScriptBranch{Rational(1, 3), {covid}});  // violates at depth 1
    s1.branches.push_back(ScriptBranch{Rational(2, 3), {flu}});
    ScriptStep s2;
    s2.branches.push_back(ScriptBranch{Rational(1, 4), {covid}});  // 2/3 * 1/4 = 1/6
    s2.branches.push_back(ScriptBranch{Rational(3, 4), {}});

    const RunTree tree = run_script(ctx, {s1, s2});
    CHECK(violation_probability(tree) == Rational(1, 2));

    // No violating branch: probability 0 and no fail node.
    const RunTree clean = run_script(ctx, {ScriptStep{"only-flu", {{Rational(1), {flu}}}}});
    CHECK(violation_probability(clean) == Rational(0));
    CHECK_FALSE(clean.fail_reachable());
}

TEST_CASE("fail is reachable exactly when some state violates") {
    const fixtures::HospitalRun run;
    const RunTree tree = run_script(run.context(), run.script);
    bool any = false;
    for (const RunState& s : tree.states) any |= s.report.violated;
    CHECK(any == tree.fail_reachable());
    CHECK(any == (violation_probability(tree) > Rational(0)));
}

TEST_CASE("sampled violation probability approximates the exact tree") {
    const fixtures::HospitalRun run;
    const EngineContext ctx = run.context();
    const double estimate = sample_violation_probability(ctx, run.script, 2024, 20000);
    CHECK(std::abs(estimate - 2.0 / 3.0) < 0.02);
    // Deterministic for a fixed seed.
    CHECK(estimate == sample_violation_probability(ctx, run.script, 2024, 20000));
}
