#include "privtrace/metrics.hpp"

#include <algorithm>

namespace privtrace {

namespace {

Rational jaccard_distance(std::int64_t intersection, std::int64_t union_size) {
    // union_size == 0 only when both sets are empty, which value invariants
    // rule out; equal singletons etc. land here with union > 0.
    return Rational(union_size - intersection, union_size);
}

// Interval view of an interval-or-number value; numbers must be integral to
// denote a singleton integer set, otherwise they denote a set disjoint from
// every integer interval.
std::optional<Value::IntInterval> as_int_set(const Value& v) {
    if (v.kind() == Value::Kind::IntInterval) return v.as_interval();
    const Rational& x = v.as_number();
    if (!x.is_integer()) return std::nullopt;
    return Value::IntInterval{x.num(), x.num()};
}

}  // namespace

Rational nominal_distance(const Value& v, const Value& w) {
    if (v.is_wildcard() || w.is_wildcard()) return Rational(0);
    const auto& a = v.as_nominal().atoms;
    const auto& b = w.as_nominal().atoms;
    std::vector<std::string> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    const auto inter = static_cast<std::int64_t>(common.size());
    const auto uni = static_cast<std::int64_t>(a.size() + b.size()) - inter;
    return jaccard_distance(inter, uni);
}

Rational numerval_distance(const Value& v, const Value& w) {
    if (v.is_wildcard() || w.is_wildcard()) return Rational(0);
    if (v.kind() == Value::Kind::Number && w.kind() == Value::Kind::Number)
        return v.as_number() == w.as_number() ? Rational(0) : Rational(1);
    const auto a = as_int_set(v);
    const auto b = as_int_set(w);
    if (!a || !b) return Rational(1);  // a non-integral number shares nothing
    const std::int64_t lo = std::max(a->lo, b->lo);
    const std::int64_t hi = std::min(a->hi, b->hi);
    const std::int64_t inter = lo <= hi ? hi - lo + 1 : 0;
    const std::int64_t uni = a->count() + b->count() - inter;
    return jaccard_distance(inter, uni);
}

Rational numeric_distance(const Value& v, const Value& w, const Rational& normalizer) {
    if (v.is_wildcard() || w.is_wildcard()) return Rational(0);
    const Rational gap = abs(v.as_number() - w.as_number());
    if (!(normalizer > gap))
        throw std::invalid_argument("normalizer " + normalizer.to_string() +
                                    " does not exceed observed gap " + gap.to_string());
    return gap / normalizer;
}

DistanceVector tuple_distances(const Tuple& a, const Schema& sa, const Tuple& b,
                               const Schema& sb, const Catalog& cat) {
    const auto pairing = type_compatible(sa, sb);
    if (!pairing)
        throw std::invalid_argument("tuples over '" + sa.name() + "' and '" + sb.name() +
                                    "' are uncomparable");
    DistanceVector out;
    for (const auto& [ia, ib] : pairing->columns) {
        const Header& ha = sa.header(static_cast<std::size_t>(ia));
        const Header& hb = sb.header(static_cast<std::size_t>(ib));
        const Value& va = a.cells.at(static_cast<std::size_t>(ia));
        const Value& vb = b.cells.at(static_cast<std::size_t>(ib));

        Rational d;
        if (ha.cls == HeaderClass::Taxoral) {
            if (va.is_wildcard() || vb.is_wildcard())
                d = Rational(0);
            else
                d = cat.taxonomy(*ha.taxonomy)
                        .wp_distance(va.as_tax_node().label, vb.as_tax_node().label);
        } else if (ha.cls == HeaderClass::Nominal) {
            d = nominal_distance(va, vb);
        } else if (ha.cls == HeaderClass::Numerical && hb.cls == HeaderClass::Numerical) {
            d = numeric_distance(va, vb, *ha.normalizer);
        } else {
            // Interval-valued columns, including number-vs-interval pairings.
            d = numerval_distance(va, vb);
        }
        out.entries.emplace_back(ha.name, d);
    }
    return out;
}

Rational distance_sum(const Tuple& a, const Schema& sa, const Tuple& b, const Schema& sb,
                      const Catalog& cat) {
    return tuple_distances(a, sa, b, sb, cat).sum();
}

Rational set_distance(std::span<const Fact> s, std::span<const Fact> t, const Catalog& cat) {
    if (s.empty() || t.empty())
        throw std::invalid_argument("set distance requires nonempty sets");
    std::optional<Rational> best;
    for (const Fact& f : s)
        for (const Fact& g : t) {
            const Rational d = distance_sum(f.tuple, cat.schema(f.schema_id), g.tuple,
                                            cat.schema(g.schema_id), cat);
            if (!best || d < *best) best = d;
        }
    return *best;
}

std::optional<Rational> set_distance_lenient(std::span<const Fact> s, std::span<const Fact> t,
                                             const Catalog& cat) {
    std::optional<Rational> best;
    for (const Fact& f : s)
        for (const Fact& g : t) {
            if (!type_compatible(cat.schema(f.schema_id), cat.schema(g.schema_id))) continue;
            const Rational d = distance_sum(f.tuple, cat.schema(f.schema_id), g.tuple,
                                            cat.schema(g.schema_id), cat);
            if (!best || d < *best) best = d;
        }
    return best;
}

int hamming_rows(const Database& a, const Database& b) {
    if (a.schema_id() != b.schema_id() || a.size() != b.size())
        throw std::invalid_argument("row-wise distance requires same schema and row count");
    int differing = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.rows()[i] != b.rows()[i]) ++differing;
    return differing;
}

int hamming_cells(const Tuple& a, const Tuple& b) {
    if (a.cells.size() != b.cells.size())
        throw std::invalid_argument("cell-wise distance requires equal arity");
    int differing = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        if (a.cells[i] != b.cells[i]) ++differing;
    return differing;
}

int hamming_cellwise(const Database& a, const Database& b) {
    if (a.schema_id() != b.schema_id() || a.size() != b.size())
        throw std::invalid_argument("cell-wise distance requires same schema and row count");
    int total = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        total += hamming_cells(a.rows()[i], b.rows()[i]);
    return total;
}

}  // namespace privtrace
