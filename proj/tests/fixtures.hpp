#pragma once

// Shared builders for the hospital-record fixture used across test files.

#include <map>
#include <string>
#include <vector>

#include "privtrace/engine.hpp"
#include "privtrace/model.hpp"
#include "privtrace/saturation.hpp"

namespace fixtures {

using namespace privtrace;

inline Taxonomy ailment_taxonomy() {
    Taxonomy t("ailment");
    t.add_root("Ailment");
    t.add_node("Heart-Disease", "Ailment");
    t.add_node("Cancer", "Ailment");
    t.add_node("Viral-Infection", "Ailment");
    t.add_node("Flu", "Viral-Infection");
    t.add_node("CoVid", "Viral-Infection");
    return t;
}

inline Header nominal(std::string name, AttributeGroup g = AttributeGroup::QuasiIdentifier) {
    return Header{std::move(name), HeaderClass::Nominal, g, {}, {}, {}};
}
inline Header numerval(std::string name, std::int64_t ceiling = 100000,
                       AttributeGroup g = AttributeGroup::QuasiIdentifier) {
    return Header{std::move(name), HeaderClass::Numerval, g, {}, {}, ceiling};
}
inline Header numerical(std::string name, Rational d,
                        AttributeGroup g = AttributeGroup::QuasiIdentifier) {
    return Header{std::move(name), HeaderClass::Numerical, g, {}, d, {}};
}
inline Header taxoral(std::string name, std::string taxonomy,
                      AttributeGroup g = AttributeGroup::Sensitive) {
    return Header{std::move(name), HeaderClass::Taxoral, g, std::move(taxonomy), {}, {}};
}

/// Catalog with the ailment taxonomy and three schemas:
///   record: Name, Age, Gender, Dept, Ailment
///   pubrec: Age, Gender, Dept, Ailment
///   notice: Dept, Gender, Ailment, Cases
struct Hospital {
    Catalog cat;
    int record, pubrec, notice;

    Hospital() {
        cat.add_taxonomy(ailment_taxonomy());
        record = cat.add_schema(Schema(
            "record", {nominal("Name", AttributeGroup::Identifier), numerval("Age", 200),
                       nominal("Gender"), nominal("Dept"), taxoral("Ailment", "ailment")}));
        pubrec = cat.add_schema(Schema("pubrec", {numerval("Age", 200), nominal("Gender"),
                                                  nominal("Dept"), taxoral("Ailment", "ailment")}));
        notice = cat.add_schema(Schema("notice", {nominal("Dept"), nominal("Gender"),
                                                  taxoral("Ailment", "ailment"),
                                                  numerval("Cases", 1000)}));
    }

    Tuple pub_row(std::int64_t age_lo, std::int64_t age_hi, const std::string& gender,
                  const std::string& dept, const std::string& ailment) const {
        return Tuple{{Value::interval(age_lo, age_hi), Value::atom(gender), Value::atom(dept),
                      Value::tax_node("ailment", ailment)}};
    }

    /// The published rows l1..l5 under the half-open reading of the ages.
    std::vector<Tuple> published_rows() const {
        return {pub_row(20, 29, "F", "Chemistry", "Heart-Disease"),
                pub_row(40, 49, "M", "Chemistry", "Cancer"),
                pub_row(20, 29, "F", "Physics", "Viral-Infection"),
                pub_row(50, 59, "M", "Maths", "Viral-Infection"),
                pub_row(40, 49, "M", "Physics", "Viral-Infection")};
    }

    /// The target tuple (John, 46, M, #, CoVid) over the record schema.
    Fact target() const {
        return Fact{record, Tuple{{Value::atom("John"), Value::interval(46, 46),
                                   Value::atom("M"), Value::wildcard(),
                                   Value::tax_node("ailment", "CoVid")}}};
    }
};

/// The whole hospital run, in memory: the board external, the select+join
/// rules, the policy protecting John's ailment, and the three-branch script
/// attributing one published row to John per branch.
struct HospitalRun {
    Hospital h;
    std::map<std::string, Database> externals;
    std::vector<DeductionRule> rules;
    ResolvedRules resolved;
    std::vector<PolicyAtom> policy;
    std::vector<Fact> target;
    std::vector<ScriptStep> script;

    HospitalRun() {
        Database board(h.notice);
        board.append(Tuple{{Value::atom("Physics"), Value::atom("F"),
                            Value::tax_node("ailment", "CoVid"), Value::interval(0, 0)}},
                     h.cat);
        board.append(Tuple{{Value::atom("Physics"), Value::atom("M"),
                            Value::tax_node("ailment", "CoVid"), Value::interval(1, 1)}},
                     h.cat);
        externals.emplace("board", std::move(board));

        rules.push_back(
            SelectRule{"active",
                       SourceRef{SourceRef::Kind::External, "board"},
                       {Predicate{"Cases", Predicate::Cmp::Ge, Value::number(Rational(1))}}});
        rules.push_back(JoinRule{"confirmed",
                                 SourceRef{SourceRef::Kind::TagSchema, "record"},
                                 SourceRef{SourceRef::Kind::Rule, "active"},
                                 {"Dept", "Gender", "Ailment"}});
        resolved = ResolvedRules::resolve(h.cat, rules, externals);

        policy.push_back(make_policy_atom(
            h.record,
            Tuple{{Value::atom("John"), Value::wildcard(), Value::atom("M"), Value::wildcard(),
                   Value::tax_node("ailment", "CoVid")}},
            h.cat));
        target.push_back(h.target());

        const auto hypothesis = [&](const Tuple& row) {
            Tuple t;
            t.cells.push_back(Value::atom("John"));
            for (const Value& v : row.cells) t.cells.push_back(v);
            return Fact{h.record, std::move(t)};
        };
        const auto rows = h.published_rows();
        ScriptStep step;
        step.label = "men-rows";
        step.branches.push_back(ScriptBranch{Rational(0), {hypothesis(rows[1])}});
        step.branches.push_back(ScriptBranch{Rational(1, 3), {hypothesis(rows[3])}});
        step.branches.push_back(ScriptBranch{Rational(2, 3), {hypothesis(rows[4])}});
        script.push_back(std::move(step));
    }

    EngineContext context() const {
        EngineContext ctx;
        ctx.cat = &h.cat;
        ctx.externals = &externals;
        ctx.rules = &resolved;
        ctx.policy = &policy;
        ctx.target = target;
        return ctx;
    }
};

}  // namespace fixtures
