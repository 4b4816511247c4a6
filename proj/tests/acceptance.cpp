// Acceptance suite: one line per criterion, checked at the stated tolerance.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "privtrace/commands.hpp"
#include "privtrace/compare.hpp"
#include "privtrace/engine.hpp"
#include "privtrace/mechanisms.hpp"
#include "privtrace/metrics.hpp"
#include "tree_gen.hpp"

using namespace privtrace;

namespace {

constexpr double kLnTol = 1e-12;

struct Harness {
    int failures = 0;
    std::string detail;

    void criterion(int n, const char* what, bool ok) {
        std::printf("%s  %d. %s%s%s\n", ok ? "PASS" : "FAIL", n, what,
                    ok || detail.empty() ? "" : " -- ", ok ? "" : detail.c_str());
        if (!ok) ++failures;
        detail.clear();
    }

    bool expect(bool cond, const std::string& msg) {
        if (!cond && detail.empty()) detail = msg;
        return cond;
    }
};

std::string scn_path(const char* name) {
    return std::string(PRIVTRACE_SCENARIO_DIR) + "/" + name;
}

// ---------------------------------------------------------------------------
// 1. Worked tuple distances from the published hospital record.
// ---------------------------------------------------------------------------

bool criterion_distances(Harness& h) {
    const Scenario scn = load_scenario(scn_path("hospital.scn"));
    const Database& pub = scn.published();
    const Fact target = scn.target("main").at(0);
    const Schema& pubrec = scn.catalog.schema(pub.schema_id());
    const Schema& record = scn.catalog.schema(target.schema_id);

    const auto d = [&](std::size_t row) {
        return distance_sum(pub.rows()[row], pubrec, target.tuple, record, scn.catalog);
    };
    bool ok = h.expect(d(1) == Rational(15, 10), "d(l2) != 15/10: " + d(1).to_string());
    ok &= h.expect(d(3) == Rational(6, 5), "d(l4) != 6/5: " + d(3).to_string());
    ok &= h.expect(d(4) == Rational(11, 10), "d(l5) != 11/10: " + d(4).to_string());
    ok &= h.expect(d(4) < d(3) && d(3) < d(1), "l5 is not the closest row");
    return ok;
}

// ---------------------------------------------------------------------------
// 2. Closed-endpoint audit of the three-row answering mechanism.
// ---------------------------------------------------------------------------

bool criterion_audit(Harness& h) {
    const Scenario scn = load_scenario(scn_path("record_audit.scn"));
    const FiniteMechanism& m = *scn.mechanism;

    const Database& l4 = *m.input_db(m.input_index("l4"));
    const Database& l5 = *m.input_db(m.input_index("l5"));
    const Rational rho = adjacency_eval(AdjacencyKind::Rho, l4, l5, scn.catalog);
    bool ok = h.expect(rho == Rational(39, 20), "rho(l4,l5) != 39/20: " + rho.to_string());

    const AuditOutcome arho = audit_dp(m, AdjacencyKind::Rho, scn.catalog);
    const AuditOutcome aham = audit_dp(m, AdjacencyKind::Hamming, scn.catalog);
    const double want_rho = (20.0 / 39.0) * std::log(1.5);
    const double want_ham = 0.5 * std::log(1.5);
    ok &= h.expect(!arho.infinite && std::abs(arho.epsilon() - want_rho) <= kLnTol,
                   "rho threshold off: " + std::to_string(arho.epsilon()));
    ok &= h.expect(!aham.infinite && std::abs(aham.epsilon() - want_ham) <= kLnTol,
                   "hamming threshold off: " + std::to_string(aham.epsilon()));
    ok &= h.expect(aham.epsilon() < arho.epsilon(),
                   "hamming threshold is not strictly below the rho threshold");
    return ok;
}

// ---------------------------------------------------------------------------
// 3. Randomized response audits and its probability pairs.
// ---------------------------------------------------------------------------

bool criterion_rr(Harness& h) {
    const Scenario scn = load_scenario(scn_path("randomized_response.scn"));
    const FiniteMechanism& rr = *scn.mechanism;
    const double ln3 = std::log(3.0);

    const AuditOutcome ldp = audit_ldp(rr);
    const AuditOutcome dp = audit_dp(rr, AdjacencyKind::Unit, scn.catalog);
    bool ok = h.expect(!ldp.infinite && std::abs(ldp.epsilon() - ln3) <= kLnTol,
                       "ldp epsilon != ln 3");
    ok &= h.expect(!dp.infinite && std::abs(dp.epsilon() - ln3) <= kLnTol,
                   "unit-adjacency dp epsilon != ln 3");

    std::set<std::pair<Rational, Rational>> pairs;
    for (int v = 0; v < 2; ++v)
        for (int a = 0; a < 2; ++a)
            for (int w = 0; w < 2; ++w)
                for (int b = 0; b < 2; ++b) pairs.emplace(rr.prob(v, a), rr.prob(w, b));
    const std::set<std::pair<Rational, Rational>> expected{{Rational(1, 4), Rational(1, 4)},
                                                           {Rational(1, 4), Rational(3, 4)},
                                                           {Rational(3, 4), Rational(1, 4)},
                                                           {Rational(3, 4), Rational(3, 4)}};
    ok &= h.expect(pairs == expected, "distinct probability pairs differ");
    return ok;
}

// ---------------------------------------------------------------------------
// 4. The hospital run: distribution, violating state, probability, exit code.
// ---------------------------------------------------------------------------

bool criterion_hospital_run(Harness& h) {
    const Scenario scn = load_scenario(scn_path("hospital.scn"));
    const Report rep = cmd_run(scn);

    bool ok = h.expect(rep.exit_code == 2, "exit code is not 2");
    ok &= h.expect(rep.machine["violation_probability"] == "2/3",
                   "violation probability is not exactly 2/3");
    const auto& states = rep.machine["states"];
    ok &= h.expect(states[1]["prob"] == "0" && states[2]["prob"] == "1/3" &&
                       states[3]["prob"] == "2/3",
                   "branch distribution is not (0, 1/3, 2/3)");
    ok &= h.expect(states[3]["verdict"] == "violated", "the 2/3 branch is not violated");
    ok &= h.expect(states[1]["verdict"] == "ok" && states[2]["verdict"] == "ok",
                   "a surviving branch is marked violated");
    // The violation must come from the board join, i.e. a fact of the joined
    // schema narrowing the ailment.
    const std::string witness = states[3]["witness"].get<std::string>();
    ok &= h.expect(witness.find("confirmed") == 0 && witness.find("CoVid") != std::string::npos,
                   "violation witness is not the joined fact: " + witness);
    return ok;
}

// ---------------------------------------------------------------------------
// 5. The bank run, with and without the public statement.
// ---------------------------------------------------------------------------

bool criterion_bank_run(Harness& h) {
    const Scenario scn = load_scenario(scn_path("bank.scn"));
    const EngineContext ctx = [&] {
        EngineContext c;
        c.cat = &scn.catalog;
        c.externals = &scn.externals;
        c.rules = &scn.resolved;
        c.policy = &scn.policy;
        c.target = scn.target("main");
        return c;
    }();
    const RunTree tree = run_script(ctx, scn.script);

    const Fact bound{scn.catalog.schema_id("clients"),
                     Tuple{{Value::atom("Jean"), Value::interval(420, 100000)}}};
    bool ok = h.expect(tree.states.size() >= 2, "run tree too small");
    const RunState& answered = tree.states[1];
    ok &= h.expect(answered.saturated.contains(bound),
                   "saturation did not derive (Jean, [420, 100000])");
    ok &= h.expect(answered.report.violated, "the derived bound does not violate the policy");
    ok &= h.expect(answered.report.witness && *answered.report.witness == bound,
                   "the witness is not the derived bound");
    ok &= h.expect(cmd_run(scn).exit_code == 2, "bank run exit code is not 2");

    const Scenario cut = scn.without_external("statement");
    const Report without = cmd_run(cut);
    ok &= h.expect(without.exit_code == 0, "run without the statement still violates");
    ok &= h.expect(without.machine["violation_probability"] == "0",
                   "violation probability without the statement is not 0");
    return ok;
}

// ---------------------------------------------------------------------------
// 6. The tree metric axioms: every rooted tree up to 12 nodes, all triples,
//    then 1000 random trees up to 200 nodes.
// ---------------------------------------------------------------------------

// Generates every level sequence of rooted trees on n nodes (each shape
// exactly once), in decreasing lexicographic order.
std::vector<std::vector<int>> all_level_sequences(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> level(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) level[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
        out.push_back(level);
        int p = -1;
        for (int i = n - 1; i >= 0; --i)
            if (level[static_cast<std::size_t>(i)] > 2) {
                p = i;
                break;
            }
        if (p < 0) break;
        int q = -1;
        for (int i = p - 1; i >= 0; --i)
            if (level[static_cast<std::size_t>(i)] == level[static_cast<std::size_t>(p)] - 1) {
                q = i;
                break;
            }
        for (int i = p; i < n; ++i)
            level[static_cast<std::size_t>(i)] = level[static_cast<std::size_t>(i - (p - q))];
    }
    return out;
}

Taxonomy tree_from_levels(const std::vector<int>& level) {
    Taxonomy t("t");
    t.add_root("n0");
    for (std::size_t i = 1; i < level.size(); ++i) {
        std::size_t parent = i - 1;
        while (level[parent] != level[i] - 1) --parent;
        t.add_node("n" + std::to_string(i), "n" + std::to_string(parent));
    }
    return t;
}

bool metric_axioms_hold(const Taxonomy& t, std::string& why) {
    const auto labels = t.labels();
    const std::size_t n = labels.size();
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) d[i][j] = d[j][i] = t.wp_distance(labels[i], labels[j]);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if ((d[i][j] == Rational(0)) != (i == j)) {
                why = "identity of indiscernibles fails";
                return false;
            }
            if (d[i][j] != d[j][i]) {
                why = "symmetry fails";
                return false;
            }
            if (d[i][j] < Rational(0) || d[i][j] >= Rational(1)) {
                why = "range [0,1) fails";
                return false;
            }
            for (std::size_t k = 0; k < n; ++k)
                if (d[i][k] > d[i][j] + d[j][k]) {
                    why = "triangle inequality fails";
                    return false;
                }
        }
    return true;
}

bool criterion_tree_metric(Harness& h) {
    // Rooted tree counts by node count, the oracle for the enumerator.
    const std::vector<std::size_t> expected_counts{1, 1, 2,   4,   9,   20,
                                                   48, 115, 286, 719, 1842, 4766};
    std::string why;
    for (int n = 1; n <= 12; ++n) {
        const auto seqs = all_level_sequences(n);
        if (!h.expect(seqs.size() == expected_counts[static_cast<std::size_t>(n - 1)],
                      "tree enumerator count wrong at n=" + std::to_string(n)))
            return false;
        for (const auto& seq : seqs)
            if (!metric_axioms_hold(tree_from_levels(seq), why))
                return h.expect(false, why + " on a tree with " + std::to_string(n) + " nodes");
    }

    std::mt19937_64 rng(20240711);
    for (int trial = 0; trial < 1000; ++trial) {
        std::uniform_int_distribution<int> size(1, 200);
        const Taxonomy t = fixtures::random_tree(rng, size(rng));
        const auto labels = t.labels();
        std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
        for (int i = 0; i < 120; ++i) {
            const auto& x = labels[pick(rng)];
            const auto& y = labels[pick(rng)];
            const auto& z = labels[pick(rng)];
            const Rational dxy = t.wp_distance(x, y);
            if (!h.expect(dxy == t.wp_distance(y, x), "symmetry fails on a random tree"))
                return false;
            if (!h.expect((dxy == Rational(0)) == (x == y),
                          "identity of indiscernibles fails on a random tree"))
                return false;
            if (!h.expect(t.wp_distance(x, z) <= dxy + t.wp_distance(y, z),
                          "triangle inequality fails on a random tree"))
                return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// 7. Row distances never exceed cell counts; rho-indistinguishability implies
//    Hamming-indistinguishability at the same epsilon.
// ---------------------------------------------------------------------------

struct MixedRows {
    fixtures::Hospital h;
    int sch;
    std::mt19937_64 rng{777};

    MixedRows() {
        sch = h.cat.add_schema(Schema(
            "mixed", {fixtures::nominal("Tag"), fixtures::numerval("Span", 200),
                      fixtures::numerical("Score", Rational(1000)),
                      fixtures::taxoral("Kind", "ailment")}));
    }

    Value random_cell(int col, bool allow_wildcard) {
        std::uniform_int_distribution<int> coin(0, 5);
        if (allow_wildcard && coin(rng) == 0) return Value::wildcard();
        static const std::vector<std::string> atoms{"a", "b", "c", "d"};
        static const std::vector<std::string> labels{"Ailment", "Heart-Disease", "Cancer",
                                                     "Viral-Infection", "Flu", "CoVid"};
        std::uniform_int_distribution<std::size_t> a4(0, 3), l6(0, 5);
        std::uniform_int_distribution<std::int64_t> lo(0, 80), len(0, 12), score(0, 100);
        switch (col) {
            case 0: {
                std::vector<std::string> set{atoms[a4(rng)]};
                if (coin(rng) < 2) set.push_back(atoms[a4(rng)]);
                return Value::nominal(std::move(set));
            }
            case 1: {
                const std::int64_t l = lo(rng);
                return Value::interval(l, l + len(rng));
            }
            case 2: return Value::number(Rational(score(rng)));
            default: return Value::tax_node("ailment", labels[l6(rng)]);
        }
    }

    Tuple random_row(bool allow_wildcard) {
        Tuple t;
        for (int c = 0; c < 4; ++c) t.cells.push_back(random_cell(c, allow_wildcard));
        return t;
    }
};

bool criterion_domination(Harness& h) {
    MixedRows gen;
    const Schema& s = gen.h.cat.schema(gen.sch);

    for (int trial = 0; trial < 1000; ++trial) {
        const Tuple a = gen.random_row(true);
        const Tuple b = gen.random_row(true);
        const Rational d = distance_sum(a, s, b, s, gen.h.cat);
        if (!h.expect(d <= Rational(hamming_cells(a, b)),
                      "row distance " + d.to_string() + " exceeds the differing-cell count"))
            return false;
    }

    int informative = 0;
    for (int trial = 0; trial < 200; ++trial) {
        // Two distinct wildcard-free rows as the candidate worlds.
        Tuple ra = gen.random_row(false);
        Tuple rb = gen.random_row(false);
        if (ra == rb) rb.cells[0] = Value::nominal({"zz"});
        Database da(gen.sch), db(gen.sch);
        da.append(ra, gen.h.cat);
        db.append(rb, gen.h.cat);

        // Strictly positive rows: support mismatches would make the rho
        // audit infinite and the implication vacuous.
        std::uniform_int_distribution<int> nout(2, 4), weight(1, 5);
        const int k = nout(gen.rng);
        std::vector<std::string> outs;
        for (int j = 0; j < k; ++j) outs.push_back("o" + std::to_string(j));
        std::vector<std::vector<Rational>> rows;
        for (int v = 0; v < 2; ++v) {
            std::vector<std::int64_t> w(static_cast<std::size_t>(k));
            std::int64_t total = 0;
            for (auto& x : w) total += (x = weight(gen.rng));
            std::vector<Rational> row;
            for (const auto x : w) row.emplace_back(x, total);
            rows.push_back(std::move(row));
        }
        FiniteMechanism m({"A", "B"}, outs, std::move(rows));
        m.bind_input("A", std::move(da));
        m.bind_input("B", std::move(db));

        const AuditOutcome arho = audit_dp(m, AdjacencyKind::Rho, gen.h.cat);
        if (arho.infinite) continue;  // the implication is vacuous
        ++informative;
        const double eps = arho.epsilon();

        // epsilon_rho-indistinguishable at eps must imply Hamming
        // indistinguishability at the same eps.
        const Rational dh = adjacency_eval(AdjacencyKind::Hamming, *m.input_db(0), *m.input_db(1),
                                           gen.h.cat);
        for (int j = 0; j < k; ++j) {
            const Rational p = m.prob(0, j), q = m.prob(1, j);
            if (p.is_zero() || q.is_zero()) continue;
            const Rational ratio = p > q ? p / q : q / p;
            if (!h.expect(std::log(ratio.to_double()) <=
                              eps * dh.to_double() + kLnTol,
                          "rho-indistinguishability does not imply the Hamming bound"))
                return false;
        }
        const AuditOutcome aham = audit_dp(m, AdjacencyKind::Hamming, gen.h.cat);
        if (!h.expect(!aham.infinite && aham.epsilon() <= eps + kLnTol,
                      "Hamming audit exceeds the rho audit"))
            return false;
    }
    return h.expect(informative >= 150,
                    "too few informative mechanism pairs: " + std::to_string(informative));
}

// ---------------------------------------------------------------------------
// 8. Random small scenarios: violation probability, fail reachability and
//    policy matching coincide; saturation is idempotent and order-free.
// ---------------------------------------------------------------------------

struct SmallScenario {
    Catalog cat;
    int sch = -1;
    std::map<std::string, Database> externals;
    std::vector<DeductionRule> rules;
    ResolvedRules resolved;
    std::vector<PolicyAtom> policy;
    std::vector<ScriptStep> script;
};

SmallScenario random_scenario(std::mt19937_64& rng, int index) {
    SmallScenario s;
    std::uniform_int_distribution<int> coin(0, 1), d3(0, 2), d4(0, 3);
    static const std::vector<std::string> atoms{"A", "B", "C"};

    std::vector<Header> headers{fixtures::nominal("N0"), fixtures::numerval("N1", 10)};
    if (coin(rng)) headers.push_back(fixtures::nominal("N2"));
    const int arity = static_cast<int>(headers.size());
    s.sch = s.cat.add_schema(Schema("s", std::move(headers)));

    const auto random_cell = [&](int col, bool allow_wild) -> Value {
        if (allow_wild && d4(rng) == 0) return Value::wildcard();
        if (col == 1) {
            std::uniform_int_distribution<std::int64_t> lo(0, 4), len(0, 3);
            const std::int64_t l = lo(rng);
            return Value::interval(l, l + len(rng));
        }
        return Value::atom(atoms[static_cast<std::size_t>(d3(rng))]);
    };
    const auto random_tuple = [&](bool allow_wild) {
        Tuple t;
        for (int c = 0; c < arity; ++c) t.cells.push_back(random_cell(c, allow_wild));
        return t;
    };

    // Policy: a pattern with at least one constrained cell.
    Tuple pattern = random_tuple(true);
    if (std::all_of(pattern.cells.begin(), pattern.cells.end(),
                    [](const Value& v) { return v.is_wildcard(); }))
        pattern.cells[0] = Value::atom(atoms[static_cast<std::size_t>(d3(rng))]);
    s.policy.push_back(make_policy_atom(s.sch, pattern, s.cat));

    if (coin(rng)) {
        Database ext(s.sch);
        const int rows = 1 + d3(rng);
        for (int r = 0; r < rows; ++r) {
            Tuple t = random_tuple(false);
            if (!ext.contains(t)) ext.append(std::move(t), s.cat);
        }
        s.externals.emplace("e", std::move(ext));
    }

    const int nrules = d3(rng);  // 0..2
    for (int r = 0; r < nrules; ++r) {
        const std::string name = "r" + std::to_string(index) + "_" + std::to_string(r);
        const SourceRef tag_src{SourceRef::Kind::TagSchema, "s"};
        const SourceRef ext_src{SourceRef::Kind::External, "e"};
        const bool have_ext = !s.externals.empty();
        switch (d3(rng)) {
            case 0:
                s.rules.push_back(SelectRule{
                    name,
                    have_ext && coin(rng) ? ext_src : tag_src,
                    {Predicate{"N1", coin(rng) ? Predicate::Cmp::Ge : Predicate::Cmp::Le,
                               Value::number(Rational(d3(rng) + 1))}}});
                break;
            case 1:
                s.rules.push_back(ProjectRule{name, tag_src, {"N0"}});
                break;
            default:
                if (have_ext)
                    s.rules.push_back(JoinRule{name, tag_src, ext_src, {}});
                else
                    s.rules.push_back(SelectRule{
                        name, tag_src,
                        {Predicate{"N0", Predicate::Cmp::Eq,
                                   Value::atom(atoms[static_cast<std::size_t>(d3(rng))])}}});
        }
    }
    s.resolved = ResolvedRules::resolve(s.cat, s.rules, s.externals);

    const int steps = 1 + coin(rng);
    for (int st = 0; st < steps; ++st) {
        ScriptStep step;
        const int branches = 1 + d3(rng);
        std::vector<std::int64_t> w(static_cast<std::size_t>(branches));
        std::int64_t total = 0;
        for (auto& x : w) total += (x = 1 + d3(rng));  // strictly positive masses
        for (int b = 0; b < branches; ++b) {
            ScriptBranch branch;
            branch.prob = Rational(w[static_cast<std::size_t>(b)], total);
            const int adds = d3(rng);
            for (int a = 0; a < adds; ++a)
                branch.adds.push_back(Fact{s.sch, random_tuple(coin(rng) == 0)});
            step.branches.push_back(std::move(branch));
        }
        s.script.push_back(std::move(step));
    }
    return s;
}

bool criterion_random_scenarios(Harness& h) {
    std::mt19937_64 rng(4242);
    int violated_count = 0;
    for (int trial = 0; trial < 500; ++trial) {
        SmallScenario s = random_scenario(rng, trial);
        EngineContext ctx;
        ctx.cat = &s.cat;
        ctx.externals = &s.externals;
        ctx.rules = &s.resolved;
        ctx.policy = &s.policy;

        const RunTree tree = run_script(ctx, s.script);
        bool any_violated = false;
        for (const RunState& st : tree.states) any_violated |= st.report.violated;
        if (any_violated) ++violated_count;

        const Rational vp = violation_probability(tree);
        if (!h.expect((vp > Rational(0)) == any_violated,
                      "violation probability does not match the verdicts"))
            return false;
        if (!h.expect(tree.fail_reachable() == any_violated,
                      "fail reachability does not match the verdicts"))
            return false;

        // Saturation idempotence and rule-order independence per state.
        std::vector<DeductionRule> shuffled = s.rules;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const ResolvedRules reshuffled = ResolvedRules::resolve(s.cat, shuffled, s.externals);
        for (const RunState& st : tree.states) {
            if (st.failed) continue;
            if (!h.expect(saturate(st.saturated, s.externals, s.resolved, s.cat) == st.saturated,
                          "saturation is not idempotent"))
                return false;
            if (!h.expect(saturate(st.tag, s.externals, reshuffled, s.cat) == st.saturated,
                          "saturation depends on rule order"))
                return false;
        }
    }
    return h.expect(violated_count > 20 && violated_count < 480,
                    "degenerate scenario mix: " + std::to_string(violated_count) +
                        " violated of 500");
}

// ---------------------------------------------------------------------------
// 9. The comparison procedure on the worked configuration.
// ---------------------------------------------------------------------------

bool criterion_compare(Harness& h) {
    const Scenario scn = load_scenario(scn_path("hospital.scn"));
    const Report rep = cmd_compare(scn);
    bool ok = h.expect(rep.machine["verdict"] == "continue-with-config-1",
                       "worked configuration does not continue");
    // Successor 2 carries the Physics row (the closest, at p = 2/3).
    ok &= h.expect(rep.machine["chosen_successor"] == 2, "did not select the Physics successor");

    // Condition (a) failure: the first configuration is strictly farther.
    const Database& pub = scn.published();
    const auto tagged = [&](std::size_t row, const Rational& p) {
        CompareConfig::Successor s;
        s.prob = p;
        s.tag.insert(Fact{pub.schema_id(), pub.rows()[row]}, Provenance::Answered);
        return s;
    };
    CompareConfig near, far;
    near.successors.push_back(tagged(3, Rational(1, 3)));
    near.successors.push_back(tagged(4, Rational(2, 3)));
    far.successors.push_back(tagged(1, Rational(1)));
    const auto r1 = compare_configs(far, near, scn.target("main"), scn.catalog);
    ok &= h.expect(r1.verdict == CompareVerdict::Return, "farther configuration did not return");

    // Condition (b) failure: the only minimal successor outweighs the parent.
    CompareConfig heavy = near;
    heavy.parent_prob = Rational(1, 2);
    const auto r2 = compare_configs(heavy, near, scn.target("main"), scn.catalog);
    ok &= h.expect(r2.verdict == CompareVerdict::Return,
                   "overweight minimal successor did not return");
    return ok;
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    Harness h;

    const auto guarded = [&](int n, const char* what, bool (*fn)(Harness&)) {
        bool ok = false;
        try {
            ok = fn(h);
        } catch (const std::exception& e) {
            h.detail = std::string("exception: ") + e.what();
        }
        h.criterion(n, what, ok);
    };

    guarded(1, "published-record tuple distances are 15/10, 6/5, 11/10", criterion_distances);
    guarded(2, "closed-endpoint audit: 39/20, (20/39)ln(3/2), (1/2)ln(3/2)", criterion_audit);
    guarded(3, "randomized response is ln(3)-private with the four probability pairs",
            criterion_rr);
    guarded(4, "hospital run: (0,1/3,2/3), join-based violation, probability 2/3, exit 2",
            criterion_hospital_run);
    guarded(5, "bank run derives (Jean, [420, 100000]); consistent without the statement",
            criterion_bank_run);
    guarded(6, "tree metric axioms: all trees to 12 nodes, 1000 random trees to 200",
            criterion_tree_metric);
    guarded(7, "row distance domination and rho-to-Hamming indistinguishability",
            criterion_domination);
    guarded(8, "500 random scenarios: probability/verdict/fail agree; saturation stable",
            criterion_random_scenarios);
    guarded(9, "comparison procedure continues on the worked configuration",
            criterion_compare);

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::printf("%d of 9 criteria passed in %lld ms\n", 9 - h.failures,
                static_cast<long long>(ms));
    return h.failures;
}
