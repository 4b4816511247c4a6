#include "privtrace/engine.hpp"

#include <random>
#include <stdexcept>

namespace privtrace {

namespace {

Knowledge close_tag(const EngineContext& ctx, const Knowledge& tag) {
    if (ctx.epsilon)
        return epsilon_saturate(tag, *ctx.externals, *ctx.rules, *ctx.cat, ctx.mech,
                                *ctx.epsilon, ctx.limits);
    return saturate(tag, *ctx.externals, *ctx.rules, *ctx.cat, ctx.limits);
}

StateReport judge(const EngineContext& ctx, const Knowledge& saturated) {
    StateReport report;
    const ConsistencyResult c = check_consistency(saturated, *ctx.policy, *ctx.cat);
    report.violated = c.violated;
    report.witness = c.witness;
    if (!ctx.target.empty())
        report.distance = set_distance_lenient(saturated.facts(), ctx.target, *ctx.cat);
    return report;
}

}  // namespace

std::vector<RunState> expand(const EngineContext& ctx, const RunState& current,
                             const ScriptStep& step) {
    if (current.failed)
        throw std::invalid_argument("no transition leaves the fail state");
    if (current.report.violated)
        throw std::invalid_argument("a violated state transitions only into fail");
    if (step.branches.empty())
        throw std::invalid_argument("step '" + step.label + "' has no branches");

    Rational sum;
    for (const ScriptBranch& b : step.branches) sum += b.prob;
    if (sum != Rational(1))
        throw std::invalid_argument("step '" + step.label + "': branch probabilities sum to " +
                                    sum.to_string() + ", expected 1");

    std::vector<RunState> children;
    for (const ScriptBranch& b : step.branches) {
        RunState child;
        child.parent = current.id;
        child.action = step.label;
        child.branch_prob = b.prob;
        child.path_prob = current.path_prob * b.prob;
        child.depth = current.depth + 1;
        child.tag = current.saturated;
        for (const Fact& f : b.adds) child.tag.insert(f, Provenance::Answered);
        child.saturated = close_tag(ctx, child.tag);
        child.report = judge(ctx, child.saturated);
        children.push_back(std::move(child));
    }
    return children;
}

RunTree run_script(const EngineContext& ctx, const std::vector<ScriptStep>& script) {
    RunTree tree;

    RunState root;
    root.id = 0;
    root.action = "-";
    root.saturated = close_tag(ctx, root.tag);
    root.report = judge(ctx, root.saturated);
    tree.states.push_back(std::move(root));

    std::vector<int> frontier;
    if (!tree.states[0].report.violated) frontier.push_back(0);

    for (std::size_t k = 0; k < script.size(); ++k) {
        ScriptStep step = script[k];
        if (step.label.empty()) step.label = "q" + std::to_string(k + 1);

        std::vector<int> next;
        for (int id : frontier) {
            for (RunState& child : expand(ctx, tree.states[static_cast<std::size_t>(id)], step)) {
                child.id = static_cast<int>(tree.states.size());
                const bool continues = !child.report.violated;
                tree.states.push_back(std::move(child));
                if (continues) next.push_back(tree.states.back().id);
            }
        }
        frontier = std::move(next);
    }

    Rational mass;
    bool any_violated = false;
    for (const RunState& s : tree.states)
        if (s.report.violated) {
            any_violated = true;
            mass += s.path_prob;
        }
    if (any_violated) {
        RunState fail;
        fail.id = static_cast<int>(tree.states.size());
        fail.action = "violation";
        fail.failed = true;
        fail.branch_prob = Rational(1);
        fail.path_prob = mass;
        tree.fail_id = fail.id;
        tree.states.push_back(std::move(fail));
    }
    return tree;
}

Rational violation_probability(const RunTree& tree) {
    Rational total;
    for (const RunState& s : tree.states)
        if (s.report.violated) total += s.path_prob;
    return total;
}

std::map<int, std::optional<Rational>> oracle_distances(const RunTree& tree) {
    std::map<int, std::optional<Rational>> out;
    for (const RunState& s : tree.states)
        if (!s.failed) out[s.id] = s.report.distance;
    return out;
}

double sample_violation_probability(const EngineContext& ctx,
                                    const std::vector<ScriptStep>& script, std::uint64_t seed,
                                    int samples) {
    if (samples <= 0) throw std::invalid_argument("sample count must be positive");
    std::mt19937_64 rng(seed);
    const auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    int violations = 0;
    for (int run = 0; run < samples; ++run) {
        RunState cur;
        cur.id = 0;
        cur.saturated = close_tag(ctx, cur.tag);
        cur.report = judge(ctx, cur.saturated);

        for (std::size_t k = 0; k < script.size() && !cur.report.violated; ++k) {
            ScriptStep step = script[k];
            if (step.label.empty()) step.label = "q" + std::to_string(k + 1);

            // Draw one branch instead of materializing them all.
            const double u = uniform();
            double acc = 0.0;
            std::size_t pick = step.branches.size() - 1;
            for (std::size_t i = 0; i < step.branches.size(); ++i) {
                acc += step.branches[i].prob.to_double();
                if (u < acc) {
                    pick = i;
                    break;
                }
            }

            RunState child;
            child.id = cur.id + 1;
            child.tag = cur.saturated;
            for (const Fact& f : step.branches[pick].adds)
                child.tag.insert(f, Provenance::Answered);
            child.saturated = close_tag(ctx, child.tag);
            child.report = judge(ctx, child.saturated);
            cur = std::move(child);
        }
        if (cur.report.violated) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(samples);
}

}  // namespace privtrace
