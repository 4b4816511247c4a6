#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "privtrace/rational.hpp"

namespace privtrace {

/// One cell of data. A value denotes a finite set of ground constants:
/// a set of atoms, a set of integers, a single number, a taxonomy node
/// (standing for itself and everything below it), or the unknown marker.
class Value {
public:
    enum class Kind { Wildcard, NominalSet, IntInterval, Number, TaxNode };

    struct Wildcard {
        auto operator<=>(const Wildcard&) const = default;
    };
    struct NominalSet {
        std::vector<std::string> atoms;  // sorted, unique, nonempty
        auto operator<=>(const NominalSet&) const = default;
    };
    struct IntInterval {
        std::int64_t lo, hi;  // closed on both ends, lo <= hi
        auto operator<=>(const IntInterval&) const = default;
        std::int64_t count() const { return hi - lo + 1; }
    };
    struct TaxNode {
        std::string taxonomy, label;
        auto operator<=>(const TaxNode&) const = default;
    };

    static Value wildcard() { return Value(Wildcard{}); }

    static Value nominal(std::vector<std::string> atoms) {
        if (atoms.empty()) throw std::invalid_argument("nominal set must be nonempty");
        std::sort(atoms.begin(), atoms.end());
        atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
        return Value(NominalSet{std::move(atoms)});
    }
    static Value atom(std::string a) { return nominal({std::move(a)}); }

    /// Closed integer interval [lo, hi].
    static Value interval(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("interval denotes the empty set");
        return Value(IntInterval{lo, hi});
    }
    /// Interval with explicit endpoint closure; normalized to closed form, so
    /// two spellings of the same integer set compare equal.
    static Value interval(std::int64_t lo, bool lo_closed, std::int64_t hi, bool hi_closed) {
        if (!lo_closed) ++lo;
        if (!hi_closed) --hi;
        return interval(lo, hi);
    }

    static Value number(Rational x) { return Value(std::move(x)); }

    static Value tax_node(std::string taxonomy, std::string label) {
        return Value(TaxNode{std::move(taxonomy), std::move(label)});
    }

    Kind kind() const { return static_cast<Kind>(v_.index()); }
    bool is_wildcard() const { return kind() == Kind::Wildcard; }

    const NominalSet& as_nominal() const { return get<NominalSet>("nominal set"); }
    const IntInterval& as_interval() const { return get<IntInterval>("interval"); }
    const Rational& as_number() const { return get<Rational>("number"); }
    const TaxNode& as_tax_node() const { return get<TaxNode>("taxonomy node"); }

    friend bool operator==(const Value&, const Value&) = default;
    friend std::strong_ordering operator<=>(const Value& a, const Value& b) {
        if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
        return std::visit(
            [&](const auto& x) {
                return x <=> std::get<std::decay_t<decltype(x)>>(b.v_);
            },
            a.v_);
    }

    std::string to_string() const;

private:
    using Storage = std::variant<Wildcard, NominalSet, IntInterval, Rational, TaxNode>;

    explicit Value(Storage v) : v_(std::move(v)) {}

    template <class T>
    const T& get(const char* what) const {
        if (const T* p = std::get_if<T>(&v_)) return *p;
        throw std::logic_error(std::string("value is not a ") + what);
    }

    Storage v_;
};

inline std::string Value::to_string() const {
    switch (kind()) {
        case Kind::Wildcard:
            return "*";
        case Kind::NominalSet: {
            const auto& s = as_nominal();
            if (s.atoms.size() == 1) return s.atoms.front();
            std::string out = "{";
            for (std::size_t i = 0; i < s.atoms.size(); ++i) {
                if (i) out += ",";
                out += s.atoms[i];
            }
            return out + "}";
        }
        case Kind::IntInterval: {
            const auto& iv = as_interval();
            if (iv.lo == iv.hi) return std::to_string(iv.lo);
            return "[" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) + "]";
        }
        case Kind::Number:
            return as_number().to_string();
        case Kind::TaxNode:
            return as_tax_node().label;
    }
    return "?";
}

}  // namespace privtrace
