#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "privtrace/mechanisms.hpp"
#include "privtrace/model.hpp"

namespace privtrace {

enum class Provenance { Answered, Deduced };

/// The adversary's knowledge: a finite set of ground facts, each remembering
/// whether it arrived as a query answer or was deduced. Set semantics ignore
/// provenance; the first insertion wins.
class Knowledge {
public:
    bool insert(Fact f, Provenance p) { return facts_.emplace(std::move(f), p).second; }
    bool contains(const Fact& f) const { return facts_.count(f) != 0; }
    std::size_t size() const { return facts_.size(); }
    bool empty() const { return facts_.empty(); }

    std::vector<Fact> facts() const {
        std::vector<Fact> out;
        out.reserve(facts_.size());
        for (const auto& [f, p] : facts_) out.push_back(f);
        return out;
    }
    std::vector<Fact> facts_of_schema(int schema_id) const {
        std::vector<Fact> out;
        for (const auto& [f, p] : facts_)
            if (f.schema_id == schema_id) out.push_back(f);
        return out;
    }
    Provenance provenance(const Fact& f) const { return facts_.at(f); }

    friend bool operator==(const Knowledge& a, const Knowledge& b) {
        if (a.facts_.size() != b.facts_.size()) return false;
        auto it = b.facts_.begin();
        for (const auto& [f, p] : a.facts_) {
            if (!(f == it->first)) return false;
            ++it;
        }
        return true;
    }

    auto begin() const { return facts_.begin(); }
    auto end() const { return facts_.end(); }

private:
    std::map<Fact, Provenance> facts_;
};

/// Where a rule draws its rows from: the current knowledge restricted to one
/// schema, a named external database, or the output of an earlier rule.
struct SourceRef {
    enum class Kind { TagSchema, External, Rule };
    Kind kind = Kind::TagSchema;
    std::string name;
};

struct Predicate {
    enum class Cmp { Eq, Ne, Le, Ge, Lt, Gt };
    std::string header;
    Cmp cmp = Cmp::Eq;
    Value constant = Value::wildcard();
};

std::string to_string(Predicate::Cmp);

/// Certain-truth evaluation: the predicate holds only if every ground element
/// the cell may denote satisfies the comparison. Unknown cells never do.
bool predicate_holds(const Predicate& p, const Value& cell, const Header& h,
                     const Catalog& cat);

struct SelectRule {
    std::string name;
    SourceRef src;
    std::vector<Predicate> where;
};
struct ProjectRule {
    std::string name;
    SourceRef src;
    std::vector<std::string> headers;
};
/// Natural join: every shared header is unified by denotation intersection,
/// so a coarse cell (an interval, an inner taxonomy node) joins with and is
/// refined by a finer one. `expect_on` names headers the author believes are
/// shared; it is validated, not used for evaluation.
struct JoinRule {
    std::string name;
    SourceRef left, right;
    std::vector<std::string> expect_on;
};
struct UnionRule {
    std::string name;
    SourceRef left, right;
};
/// Set difference. The right side must be an external table: subtracting a
/// set that grows during saturation would let new knowledge retract old
/// deductions.
struct DiffRule {
    std::string name;
    SourceRef left, right;
};
/// COUNT/SUM over a source column, optionally filtered. The result is an
/// exact rational interval, named for use by bound rules.
struct AggregateRule {
    enum class Op { Count, Sum };
    std::string name;
    Op op = Op::Count;
    std::string header;  // ignored for Count
    SourceRef src;
    std::vector<Predicate> where;
};
/// A numeric term in a bound rule: a named aggregate or a constant.
using Term = std::variant<std::string, Rational>;

/// Emits the fact "<anchors..., target >= lhs.lo - rhs.hi>" over the target
/// schema, with every unanchored column unknown. The derived lower bound is
/// encoded as the interval [ceil(bound), ceiling-of-the-target-header].
struct BoundRule {
    std::string name;
    std::string schema;  // target schema name
    std::vector<std::pair<std::string, Value>> anchors;
    std::string target_header;
    Term lhs, rhs;
    // Optional guard: the named aggregate must equal the term exactly.
    std::optional<std::pair<std::string, Term>> guard;
};

using DeductionRule =
    std::variant<SelectRule, ProjectRule, JoinRule, UnionRule, DiffRule, AggregateRule, BoundRule>;

const std::string& rule_name(const DeductionRule& r);

/// Rules with sources resolved and output schemas minted. Project and join
/// outputs get derived schemas named after the rule; resolving mutates the
/// catalog, so do it once at load time.
class ResolvedRules {
public:
    static ResolvedRules resolve(Catalog& cat, const std::vector<DeductionRule>& rules,
                                 const std::map<std::string, Database>& externals);

    const std::vector<DeductionRule>& rules() const { return rules_; }
    int output_schema(const std::string& rule) const { return output_schema_.at(rule); }
    bool empty() const { return rules_.empty(); }

private:
    std::vector<DeductionRule> rules_;
    std::map<std::string, int> output_schema_;  // select/project/join/union/diff only
};

struct SaturationLimits {
    int max_rounds = 32;
    std::size_t max_facts = 10000;
};

/// Raised when a rule set blows past the configured fact ceiling or round
/// cap, i.e. it violates the bounded inputs/outputs assumption.
class SaturationOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least fixpoint of the rule set over knowledge plus externals. Each round
/// evaluates every rule against the round-start snapshot, so the result does
/// not depend on rule order. Monotone and idempotent.
Knowledge saturate(const Knowledge& tag, const std::map<std::string, Database>& externals,
                   const ResolvedRules& rules, const Catalog& cat,
                   const SaturationLimits& limits = {});

struct ConsistencyResult {
    bool violated = false;
    std::optional<Fact> witness;
    int atom_index = -1;
};

/// Violated iff some fact entails some policy pattern. Facts that are not
/// type-compatible with a pattern simply cannot entail it.
ConsistencyResult check_consistency(const Knowledge& tag, const std::vector<PolicyAtom>& policy,
                                    const Catalog& cat);

/// Saturation with answer identification: after the fixpoint, facts equal to
/// mechanism outputs that are eps-indistinguishable (as a transitively closed
/// relation) collapse onto one representative per class, the tuple of the
/// first output label in the class. Without a mechanism or bound outputs this
/// is plain saturation.
Knowledge epsilon_saturate(const Knowledge& tag, const std::map<std::string, Database>& externals,
                           const ResolvedRules& rules, const Catalog& cat,
                           const FiniteMechanism* mech, double eps,
                           const SaturationLimits& limits = {});

}  // namespace privtrace
