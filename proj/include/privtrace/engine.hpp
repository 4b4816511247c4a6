#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "privtrace/saturation.hpp"

namespace privtrace {

/// One likely answer to a query: the facts it would add, with the probability
/// the adversary assigns to it. Probabilities across a step's branches must
/// sum to exactly 1.
struct ScriptBranch {
    Rational prob;
    std::vector<Fact> adds;
};

struct ScriptStep {
    std::string label;  // used as the action name in traces; defaults to "q<k>"
    std::vector<ScriptBranch> branches;
};

struct StateReport {
    bool violated = false;
    std::optional<Rational> distance;  // min distance of knowledge to the target set
    std::optional<Fact> witness;       // fact entailing the policy, when violated
};

/// A node of the materialized run tree. The fail node (if reachable) is the
/// single absorbing sink every violated state transitions into.
struct RunState {
    int id = -1;
    int parent = -1;
    std::string action;   // step label that produced this state
    Rational branch_prob{1};  // this state's probability in its generating distribution
    Rational path_prob{1};    // product of branch probabilities from the root
    Knowledge tag;            // fresh knowledge: parent's saturated tag plus the answer
    Knowledge saturated;      // tag closed under the deduction rules
    StateReport report;
    bool failed = false;      // true only for the fail node
    int depth = 0;
};

struct RunTree {
    std::vector<RunState> states;  // index == id; fail node last when present
    int fail_id = -1;

    bool fail_reachable() const { return fail_id >= 0; }
};

/// Everything a run needs besides the script itself.
struct EngineContext {
    const Catalog* cat = nullptr;
    const std::map<std::string, Database>* externals = nullptr;
    const ResolvedRules* rules = nullptr;
    const std::vector<PolicyAtom>* policy = nullptr;
    std::vector<Fact> target;                  // may be empty: no distance reporting
    const FiniteMechanism* mech = nullptr;     // answer identification, with epsilon
    std::optional<double> epsilon;
    SaturationLimits limits;
};

/// Expands one state by one script step: each branch yields a child whose tag
/// is the parent's saturated knowledge plus the branch facts, saturated and
/// judged against the policy. Ids are left unassigned. Throws when branch
/// probabilities do not sum to 1, or when stepping from the fail node or from
/// a violated state (whose only transition is into fail).
std::vector<RunState> expand(const EngineContext& ctx, const RunState& current,
                             const ScriptStep& step);

/// Runs the whole script breadth-first, materializing every state. Violated
/// states take no further steps; if any exist, a fail node carrying their
/// total path probability is appended.
RunTree run_script(const EngineContext& ctx, const std::vector<ScriptStep>& script);

/// Total probability mass of root-to-fail paths; positive iff fail is
/// reachable iff some state's knowledge violates the policy.
Rational violation_probability(const RunTree& tree);

/// Knowledge-to-target distance per non-fail state (absent where no
/// comparable pair exists, e.g. the root before any answer).
std::map<int, std::optional<Rational>> oracle_distances(const RunTree& tree);

/// Monte-Carlo estimate of the violation probability: walks `samples` random
/// root-to-leaf paths with the given seed. For trees too large to
/// materialize; deterministic for a fixed seed.
double sample_violation_probability(const EngineContext& ctx,
                                    const std::vector<ScriptStep>& script,
                                    std::uint64_t seed, int samples);

}  // namespace privtrace
