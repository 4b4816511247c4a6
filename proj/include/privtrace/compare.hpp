#pragma once

#include <vector>

#include "privtrace/saturation.hpp"

namespace privtrace {

/// A state under comparison: its saturated knowledge and probability, plus
/// the successors of the one transition leaving it (each successor's tag
/// already carries the transition's contribution).
struct CompareConfig {
    Knowledge parent_tag;  // may be empty when the parent is the initial state
    Rational parent_prob{1};

    struct Successor {
        Knowledge tag;
        Rational prob;
    };
    std::vector<Successor> successors;
};

enum class CompareVerdict { ContinueWithConfig1, Return };

struct CompareOutcome {
    CompareVerdict verdict = CompareVerdict::Return;
    int chosen_successor = -1;  // index into c1.successors when continuing
    std::optional<Rational> d_min_1, d_min_2;
};

/// Decides whether to continue under the first configuration: its best
/// successor-to-target distance must not exceed the second's, and some
/// successor attaining it must have probability at most the parent's and at
/// least that of every second-side successor attaining the second minimum.
/// Ties among qualifying successors break toward the largest probability,
/// then the lowest index. Successor probabilities must sum to 1; the target
/// must not already be reached (distance 0) from either parent.
CompareOutcome compare_configs(const CompareConfig& c1, const CompareConfig& c2,
                               const std::vector<Fact>& target, const Catalog& cat);

}  // namespace privtrace
