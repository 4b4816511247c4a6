#include "privtrace/compare.hpp"

#include <stdexcept>

#include "privtrace/metrics.hpp"

namespace privtrace {

namespace {

void validate_config(const CompareConfig& c, const std::vector<Fact>& target,
                     const Catalog& cat, const char* which) {
    if (c.successors.empty())
        throw std::invalid_argument(std::string(which) + " has no successors");
    Rational sum;
    for (const auto& s : c.successors) sum += s.prob;
    if (sum != Rational(1))
        throw std::invalid_argument(std::string(which) + ": successor probabilities sum to " +
                                    sum.to_string() + ", expected 1");
    if (!c.parent_tag.empty()) {
        const auto d = set_distance_lenient(c.parent_tag.facts(), target, cat);
        if (d && d->is_zero())
            throw std::invalid_argument(std::string(which) +
                                        ": parent already reaches the target");
    }
}

std::vector<Rational> successor_distances(const CompareConfig& c,
                                          const std::vector<Fact>& target, const Catalog& cat) {
    std::vector<Rational> out;
    for (const auto& s : c.successors) {
        if (s.tag.empty()) throw std::invalid_argument("successor with empty knowledge");
        out.push_back(set_distance(s.tag.facts(), target, cat));
    }
    return out;
}

}  // namespace

CompareOutcome compare_configs(const CompareConfig& c1, const CompareConfig& c2,
                               const std::vector<Fact>& target, const Catalog& cat) {
    if (target.empty()) throw std::invalid_argument("comparison needs a nonempty target");
    validate_config(c1, target, cat, "config 1");
    validate_config(c2, target, cat, "config 2");

    const std::vector<Rational> d1 = successor_distances(c1, target, cat);
    const std::vector<Rational> d2 = successor_distances(c2, target, cat);

    Rational dmin1 = d1[0], dmin2 = d2[0];
    for (const Rational& d : d1) dmin1 = std::min(dmin1, d);
    for (const Rational& d : d2) dmin2 = std::min(dmin2, d);

    CompareOutcome out;
    out.d_min_1 = dmin1;
    out.d_min_2 = dmin2;
    if (dmin1 > dmin2) return out;

    // Largest probability among the second side's minimum-distance successors.
    Rational bar(0);
    for (std::size_t j = 0; j < d2.size(); ++j)
        if (d2[j] == dmin2) bar = std::max(bar, c2.successors[j].prob);

    int chosen = -1;
    for (std::size_t i = 0; i < d1.size(); ++i) {
        if (d1[i] != dmin1) continue;
        const Rational& p = c1.successors[i].prob;
        if (p > c1.parent_prob || p < bar) continue;
        if (chosen < 0 || p > c1.successors[static_cast<std::size_t>(chosen)].prob)
            chosen = static_cast<int>(i);
    }
    if (chosen < 0) return out;

    out.verdict = CompareVerdict::ContinueWithConfig1;
    out.chosen_successor = chosen;
    return out;
}

}  // namespace privtrace
