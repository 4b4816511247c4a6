#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "privtrace/taxonomy.hpp"
#include "privtrace/value.hpp"

namespace privtrace {

enum class HeaderClass { Nominal, Numerval, Numerical, Taxoral };
enum class AttributeGroup { Identifier, QuasiIdentifier, Sensitive };

std::string to_string(HeaderClass c);
std::string to_string(AttributeGroup g);

struct Header {
    std::string name;
    HeaderClass cls = HeaderClass::Nominal;
    AttributeGroup group = AttributeGroup::QuasiIdentifier;
    std::optional<std::string> taxonomy;   // required for Taxoral
    std::optional<Rational> normalizer;    // D > 0, required for Numerical
    std::optional<std::int64_t> ceiling;   // upper bound for derived ">= c" facts
};

/// Ordered, uniquely named headers. Invariants are checked on construction.
class Schema {
public:
    Schema(std::string name, std::vector<Header> headers);

    const std::string& name() const { return name_; }
    const std::vector<Header>& headers() const { return headers_; }
    std::size_t arity() const { return headers_.size(); }
    const Header& header(std::size_t i) const { return headers_.at(i); }

    /// Index of the named header, or -1.
    int index_of(const std::string& header_name) const;
    const Header& require(const std::string& header_name) const;

private:
    std::string name_;
    std::vector<Header> headers_;
    std::map<std::string, int> index_;
};

struct Tuple {
    std::vector<Value> cells;
    auto operator<=>(const Tuple&) const = default;
    std::string to_string() const;
};

/// Schemas plus taxonomies; the shared, immutable context every structural
/// operation needs. Schemas are referenced by dense integer ids.
class Catalog {
public:
    int add_schema(Schema s);
    int schema_id(const std::string& name) const;  // -1 if absent
    const Schema& schema(int id) const { return schemas_.at(static_cast<std::size_t>(id)); }
    const Schema& schema(const std::string& name) const;
    std::size_t schema_count() const { return schemas_.size(); }

    void add_taxonomy(Taxonomy t);
    bool has_taxonomy(const std::string& name) const { return taxonomies_.count(name) != 0; }
    const Taxonomy& taxonomy(const std::string& name) const;

private:
    std::vector<Schema> schemas_;
    std::map<std::string, int> schema_ids_;
    std::map<std::string, Taxonomy> taxonomies_;
};

/// Throws std::invalid_argument if the value's variant is illegal for the
/// header class (wildcards are legal everywhere) or if a taxonomy label is
/// unknown.
void validate_cell(const Value& v, const Header& h, const Catalog& cat);
void validate_tuple(const Tuple& t, const Schema& s, const Catalog& cat);

/// A table: a schema plus duplicate-free rows. Row order is preserved (it
/// matters for positional pairing and for display).
class Database {
public:
    explicit Database(int schema_id) : schema_(schema_id) {}

    int schema_id() const { return schema_; }
    const std::vector<Tuple>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    void append(Tuple t, const Catalog& cat);
    bool contains(const Tuple& t) const;

private:
    int schema_;
    std::vector<Tuple> rows_;
};

/// A ground tuple tagged with the schema it conforms to.
struct Fact {
    int schema_id;
    Tuple tuple;
    auto operator<=>(const Fact&) const = default;
};

/// A negated tuple pattern: knowledge entailing it violates the policy.
struct PolicyAtom {
    int schema_id;
    Tuple pattern;  // cells may be wildcards; at least one must not be
};

PolicyAtom make_policy_atom(int schema_id, Tuple pattern, const Catalog& cat);

/// Pairing of columns between two schemas, covering every header of the
/// shorter side. `columns[k] = {ia, ib}` pairs header ia of `a` with header
/// ib of `b`.
struct ColumnPairing {
    std::vector<std::pair<int, int>> columns;
    bool b_is_shorter = false;  // which side the pairing was projected onto
};

/// Matches headers by name and class ('Numerval' and 'Numerical' headers
/// inter-match; taxonomy headers must reference the same tree). If arities
/// differ, the pairing covers the shorter schema provided every one of its
/// headers matches; otherwise there is no pairing and the tuples over these
/// schemas are uncomparable.
std::optional<ColumnPairing> type_compatible(const Schema& a, const Schema& b);

/// Entailment test of a ground tuple against a policy pattern: per paired
/// column, a pattern wildcard accepts anything, otherwise the set denoted by
/// the tuple cell must be contained in the set denoted by the pattern cell.
/// Pattern columns the tuple lacks must be wildcards.
/// Throws if the schemas are uncomparable.
bool matches(const Tuple& t, const Schema& ts, const PolicyAtom& p, const Catalog& cat);

/// Containment of cell denotations (used by `matches` and the rule engine).
bool cell_subset(const Value& inner, const Value& outer, const Catalog& cat);

/// Intersection of cell denotations, or nullopt when empty. Used for
/// unification in joins; the result is always representable (sets stay sets,
/// integer intervals stay intervals, taxonomy nodes meet at the deeper node).
std::optional<Value> cell_intersect(const Value& a, const Value& b, const Catalog& cat);

}  // namespace privtrace
