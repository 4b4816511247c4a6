#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privtrace/model.hpp"

namespace privtrace {

/// Per-header distances between two compared tuples, each entry in [0, 1].
struct DistanceVector {
    std::vector<std::pair<std::string, Rational>> entries;

    Rational sum() const {
        Rational s;
        for (const auto& [name, d] : entries) s += d;
        return s;
    }
};

/// Jaccard distance |A Δ B| / |A ∪ B| between two nominal sets; a wildcard
/// on either side contributes 0. Values must be nominal sets (or wildcards).
Rational nominal_distance(const Value& v, const Value& w);

/// Jaccard distance between the integer sets denoted by two interval values.
/// Plain numbers coerce to singleton sets; wildcards contribute 0.
Rational numerval_distance(const Value& v, const Value& w);

/// |x - y| / normalizer for plain numbers; wildcards contribute 0.
/// The normalizer must exceed every |x - y| seen, keeping the range in [0, 1].
Rational numeric_distance(const Value& v, const Value& w, const Rational& normalizer);

/// Column-wise distances between two type-compatible tuples, projected onto
/// their shared headers. The metric per column follows the header class:
/// nominal -> Jaccard on sets, interval -> Jaccard on integer sets,
/// numerical -> normalized euclidean, taxonomy -> the Wu-Palmer tree metric.
/// Throws if the schemas are uncomparable.
DistanceVector tuple_distances(const Tuple& a, const Schema& sa, const Tuple& b,
                               const Schema& sb, const Catalog& cat);

/// Sum of the column-wise distances (the single-number tuple distance).
Rational distance_sum(const Tuple& a, const Schema& sa, const Tuple& b, const Schema& sb,
                      const Catalog& cat);

/// Minimum tuple distance over all cross pairs of two nonempty fact sets.
/// Throws if either set is empty or any cross pair is uncomparable.
Rational set_distance(std::span<const Fact> s, std::span<const Fact> t, const Catalog& cat);

/// As set_distance, but skips uncomparable cross pairs; nullopt when no pair
/// is comparable or either side is empty. This is the reading the run-trace
/// reporter uses over heterogeneous knowledge sets.
std::optional<Rational> set_distance_lenient(std::span<const Fact> s, std::span<const Fact> t,
                                             const Catalog& cat);

/// Number of row positions at which two same-shape databases differ.
int hamming_rows(const Database& a, const Database& b);

/// Number of cells at which two tuples over the same schema differ.
int hamming_cells(const Tuple& a, const Tuple& b);

/// Row-pairwise cell count: the sum of hamming_cells over positionally paired
/// rows. For single-row databases this is the record-wise distance used when
/// auditing mechanisms whose inputs are rows.
int hamming_cellwise(const Database& a, const Database& b);

}  // namespace privtrace
