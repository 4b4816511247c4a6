#include "privtrace/model.hpp"

#include <algorithm>

namespace privtrace {

std::string to_string(HeaderClass c) {
    switch (c) {
        case HeaderClass::Nominal: return "nominal";
        case HeaderClass::Numerval: return "numerval";
        case HeaderClass::Numerical: return "numerical";
        case HeaderClass::Taxoral: return "taxoral";
    }
    return "?";
}

std::string to_string(AttributeGroup g) {
    switch (g) {
        case AttributeGroup::Identifier: return "identifier";
        case AttributeGroup::QuasiIdentifier: return "qi";
        case AttributeGroup::Sensitive: return "sensitive";
    }
    return "?";
}

Schema::Schema(std::string name, std::vector<Header> headers)
    : name_(std::move(name)), headers_(std::move(headers)) {
    for (std::size_t i = 0; i < headers_.size(); ++i) {
        const Header& h = headers_[i];
        if (!index_.emplace(h.name, static_cast<int>(i)).second)
            throw std::invalid_argument("schema '" + name_ + "': duplicate header '" +
                                        h.name + "'");
        if (h.cls == HeaderClass::Taxoral && !h.taxonomy)
            throw std::invalid_argument("schema '" + name_ + "': taxoral header '" +
                                        h.name + "' needs a taxonomy reference");
        if (h.cls == HeaderClass::Numerical) {
            if (!h.normalizer || !(*h.normalizer > Rational(0)))
                throw std::invalid_argument("schema '" + name_ + "': numerical header '" +
                                            h.name + "' needs a normalizer D > 0");
        }
    }
}

int Schema::index_of(const std::string& header_name) const {
    const auto it = index_.find(header_name);
    return it == index_.end() ? -1 : it->second;
}

const Header& Schema::require(const std::string& header_name) const {
    const int i = index_of(header_name);
    if (i < 0)
        throw std::invalid_argument("schema '" + name_ + "' has no header '" +
                                    header_name + "'");
    return headers_[static_cast<std::size_t>(i)];
}

std::string Tuple::to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ", ";
        out += cells[i].to_string();
    }
    return out + ")";
}

int Catalog::add_schema(Schema s) {
    if (schema_ids_.count(s.name()))
        throw std::invalid_argument("duplicate schema name '" + s.name() + "'");
    const int id = static_cast<int>(schemas_.size());
    schema_ids_.emplace(s.name(), id);
    schemas_.push_back(std::move(s));
    return id;
}

int Catalog::schema_id(const std::string& name) const {
    const auto it = schema_ids_.find(name);
    return it == schema_ids_.end() ? -1 : it->second;
}

const Schema& Catalog::schema(const std::string& name) const {
    const int id = schema_id(name);
    if (id < 0) throw std::invalid_argument("unknown schema '" + name + "'");
    return schemas_[static_cast<std::size_t>(id)];
}

void Catalog::add_taxonomy(Taxonomy t) {
    const std::string name = t.name();
    if (!taxonomies_.emplace(name, std::move(t)).second)
        throw std::invalid_argument("duplicate taxonomy name '" + name + "'");
}

const Taxonomy& Catalog::taxonomy(const std::string& name) const {
    const auto it = taxonomies_.find(name);
    if (it == taxonomies_.end())
        throw std::invalid_argument("unknown taxonomy '" + name + "'");
    return it->second;
}

void validate_cell(const Value& v, const Header& h, const Catalog& cat) {
    if (v.is_wildcard()) return;
    const auto fail = [&](const char* got) {
        throw std::invalid_argument("header '" + h.name + "' (" + to_string(h.cls) +
                                    ") cannot hold a " + got);
    };
    switch (h.cls) {
        case HeaderClass::Nominal:
            if (v.kind() != Value::Kind::NominalSet) fail("non-nominal value");
            break;
        case HeaderClass::Numerval:
            if (v.kind() != Value::Kind::IntInterval) fail("non-interval value");
            break;
        case HeaderClass::Numerical:
            if (v.kind() != Value::Kind::Number) fail("non-numeric value");
            break;
        case HeaderClass::Taxoral: {
            if (v.kind() != Value::Kind::TaxNode) fail("non-taxonomy value");
            const auto& tn = v.as_tax_node();
            if (tn.taxonomy != *h.taxonomy)
                throw std::invalid_argument("header '" + h.name + "' expects taxonomy '" +
                                            *h.taxonomy + "', got '" + tn.taxonomy + "'");
            if (!cat.taxonomy(tn.taxonomy).contains(tn.label))
                throw std::invalid_argument("label '" + tn.label +
                                            "' not found in taxonomy '" + tn.taxonomy + "'");
            break;
        }
    }
}

void validate_tuple(const Tuple& t, const Schema& s, const Catalog& cat) {
    if (t.cells.size() != s.arity())
        throw std::invalid_argument("tuple arity " + std::to_string(t.cells.size()) +
                                    " does not match schema '" + s.name() + "' arity " +
                                    std::to_string(s.arity()));
    for (std::size_t i = 0; i < t.cells.size(); ++i) validate_cell(t.cells[i], s.header(i), cat);
}

void Database::append(Tuple t, const Catalog& cat) {
    validate_tuple(t, cat.schema(schema_), cat);
    if (contains(t))
        throw std::invalid_argument("duplicate row " + t.to_string() + " in database over '" +
                                    cat.schema(schema_).name() + "'");
    rows_.push_back(std::move(t));
}

bool Database::contains(const Tuple& t) const {
    return std::find(rows_.begin(), rows_.end(), t) != rows_.end();
}

PolicyAtom make_policy_atom(int schema_id, Tuple pattern, const Catalog& cat) {
    validate_tuple(pattern, cat.schema(schema_id), cat);
    const bool all_wild = std::all_of(pattern.cells.begin(), pattern.cells.end(),
                                      [](const Value& v) { return v.is_wildcard(); });
    if (all_wild)
        throw std::invalid_argument("policy pattern must constrain at least one column");
    return PolicyAtom{schema_id, std::move(pattern)};
}

namespace {

bool headers_match(const Header& a, const Header& b) {
    if (a.name != b.name) return false;
    if (a.cls == b.cls) {
        if (a.cls == HeaderClass::Taxoral) return a.taxonomy == b.taxonomy;
        return true;
    }
    // Numbers compare against interval-valued columns via the set reading.
    const auto numeric = [](HeaderClass c) {
        return c == HeaderClass::Numerval || c == HeaderClass::Numerical;
    };
    return numeric(a.cls) && numeric(b.cls);
}

}  // namespace

std::optional<ColumnPairing> type_compatible(const Schema& a, const Schema& b) {
    const bool b_shorter = b.arity() < a.arity();
    const Schema& shorter = b_shorter ? b : a;
    const Schema& longer = b_shorter ? a : b;

    ColumnPairing out;
    out.b_is_shorter = b_shorter;
    for (std::size_t i = 0; i < shorter.arity(); ++i) {
        const int j = longer.index_of(shorter.header(i).name);
        if (j < 0 || !headers_match(shorter.header(i), longer.header(static_cast<std::size_t>(j))))
            return std::nullopt;
        if (b_shorter)
            out.columns.emplace_back(j, static_cast<int>(i));
        else
            out.columns.emplace_back(static_cast<int>(i), j);
    }
    return out;
}

bool cell_subset(const Value& inner, const Value& outer, const Catalog& cat) {
    if (outer.is_wildcard()) return true;
    if (inner.is_wildcard()) return false;  // unknown is never contained in a proper set

    using K = Value::Kind;
    if (inner.kind() == K::NominalSet && outer.kind() == K::NominalSet) {
        const auto& in = inner.as_nominal().atoms;
        const auto& out = outer.as_nominal().atoms;
        return std::includes(out.begin(), out.end(), in.begin(), in.end());
    }
    if (inner.kind() == K::IntInterval && outer.kind() == K::IntInterval) {
        const auto& in = inner.as_interval();
        const auto& out = outer.as_interval();
        return in.lo >= out.lo && in.hi <= out.hi;
    }
    if (inner.kind() == K::Number && outer.kind() == K::Number)
        return inner.as_number() == outer.as_number();
    if (inner.kind() == K::Number && outer.kind() == K::IntInterval) {
        const Rational& x = inner.as_number();
        const auto& out = outer.as_interval();
        return x.is_integer() && x.num() >= out.lo && x.num() <= out.hi;
    }
    if (inner.kind() == K::IntInterval && outer.kind() == K::Number) {
        const auto& in = inner.as_interval();
        const Rational& x = outer.as_number();
        return in.lo == in.hi && x == Rational(in.lo);
    }
    if (inner.kind() == K::TaxNode && outer.kind() == K::TaxNode) {
        const auto& in = inner.as_tax_node();
        const auto& out = outer.as_tax_node();
        if (in.taxonomy != out.taxonomy) return false;
        return cat.taxonomy(in.taxonomy).is_ancestor_or_equal(out.label, in.label);
    }
    return false;
}

std::optional<Value> cell_intersect(const Value& a, const Value& b, const Catalog& cat) {
    if (a.is_wildcard()) return b;
    if (b.is_wildcard()) return a;

    using K = Value::Kind;
    if (a.kind() == K::NominalSet && b.kind() == K::NominalSet) {
        const auto& xs = a.as_nominal().atoms;
        const auto& ys = b.as_nominal().atoms;
        std::vector<std::string> common;
        std::set_intersection(xs.begin(), xs.end(), ys.begin(), ys.end(),
                              std::back_inserter(common));
        if (common.empty()) return std::nullopt;
        return Value::nominal(std::move(common));
    }
    if (a.kind() == K::IntInterval && b.kind() == K::IntInterval) {
        const auto& x = a.as_interval();
        const auto& y = b.as_interval();
        const std::int64_t lo = std::max(x.lo, y.lo);
        const std::int64_t hi = std::min(x.hi, y.hi);
        if (lo > hi) return std::nullopt;
        return Value::interval(lo, hi);
    }
    if (a.kind() == K::Number && b.kind() == K::Number)
        return a.as_number() == b.as_number() ? std::optional<Value>(a) : std::nullopt;
    if (a.kind() == K::TaxNode && b.kind() == K::TaxNode) {
        const auto& x = a.as_tax_node();
        const auto& y = b.as_tax_node();
        if (x.taxonomy != y.taxonomy) return std::nullopt;
        const Taxonomy& tax = cat.taxonomy(x.taxonomy);
        if (tax.is_ancestor_or_equal(x.label, y.label)) return b;  // b is deeper
        if (tax.is_ancestor_or_equal(y.label, x.label)) return a;
        return std::nullopt;
    }
    // Mixed number/interval meets.
    if (a.kind() == K::Number && b.kind() == K::IntInterval)
        return cell_subset(a, b, cat) ? std::optional<Value>(a) : std::nullopt;
    if (a.kind() == K::IntInterval && b.kind() == K::Number)
        return cell_subset(b, a, cat) ? std::optional<Value>(b) : std::nullopt;
    return std::nullopt;
}

bool matches(const Tuple& t, const Schema& ts, const PolicyAtom& p, const Catalog& cat) {
    const Schema& ps = cat.schema(p.schema_id);
    const auto pairing = type_compatible(ts, ps);
    if (!pairing)
        throw std::invalid_argument("tuple over '" + ts.name() +
                                    "' is uncomparable with pattern over '" + ps.name() + "'");

    std::vector<bool> pattern_col_seen(ps.arity(), false);
    for (const auto& [ti, pi] : pairing->columns) {
        pattern_col_seen[static_cast<std::size_t>(pi)] = true;
        if (!cell_subset(t.cells[static_cast<std::size_t>(ti)],
                         p.pattern.cells[static_cast<std::size_t>(pi)], cat))
            return false;
    }
    // Constraints on columns the tuple does not carry cannot be entailed.
    for (std::size_t pi = 0; pi < ps.arity(); ++pi)
        if (!pattern_col_seen[pi] && !p.pattern.cells[pi].is_wildcard()) return false;
    return true;
}

}  // namespace privtrace
