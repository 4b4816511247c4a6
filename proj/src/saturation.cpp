#include "privtrace/saturation.hpp"

#include <algorithm>
#include <set>

namespace privtrace {

std::string to_string(Predicate::Cmp c) {
    switch (c) {
        case Predicate::Cmp::Eq: return "=";
        case Predicate::Cmp::Ne: return "!=";
        case Predicate::Cmp::Le: return "<=";
        case Predicate::Cmp::Ge: return ">=";
        case Predicate::Cmp::Lt: return "<";
        case Predicate::Cmp::Gt: return ">";
    }
    return "?";
}

namespace {

// Numeric reading of a constant used in an order comparison.
Rational order_constant(const Value& v) {
    if (v.kind() == Value::Kind::Number) return v.as_number();
    const auto& iv = v.as_interval();
    if (iv.lo != iv.hi)
        throw std::invalid_argument("order comparison needs a single numeric constant");
    return Rational(iv.lo);
}

bool disjoint(const Value& a, const Value& b, const Catalog& cat) {
    return !cell_intersect(a, b, cat).has_value();
}

}  // namespace

bool predicate_holds(const Predicate& p, const Value& cell, const Header& h,
                     const Catalog& cat) {
    if (cell.is_wildcard()) return false;  // nothing is certain about an unknown cell
    switch (p.cmp) {
        case Predicate::Cmp::Eq:
            return cell_subset(cell, p.constant, cat);
        case Predicate::Cmp::Ne:
            return disjoint(cell, p.constant, cat);
        default:
            break;
    }
    const Rational c = order_constant(p.constant);
    Rational lo, hi;
    if (cell.kind() == Value::Kind::Number) {
        lo = hi = cell.as_number();
    } else if (cell.kind() == Value::Kind::IntInterval) {
        lo = Rational(cell.as_interval().lo);
        hi = Rational(cell.as_interval().hi);
    } else {
        throw std::invalid_argument("order comparison on non-numeric header '" + h.name + "'");
    }
    switch (p.cmp) {
        case Predicate::Cmp::Le: return hi <= c;
        case Predicate::Cmp::Ge: return lo >= c;
        case Predicate::Cmp::Lt: return hi < c;
        case Predicate::Cmp::Gt: return lo > c;
        default: return false;
    }
}

const std::string& rule_name(const DeductionRule& r) {
    return std::visit([](const auto& x) -> const std::string& { return x.name; }, r);
}

namespace {

struct SharedColumn {
    int left, right;  // header indices
};

std::vector<SharedColumn> shared_columns(const Schema& l, const Schema& r) {
    std::vector<SharedColumn> out;
    for (std::size_t i = 0; i < l.arity(); ++i) {
        const int j = r.index_of(l.header(i).name);
        if (j >= 0) out.push_back(SharedColumn{static_cast<int>(i), j});
    }
    return out;
}

void validate_predicate(const Predicate& p, const Schema& s, const std::string& rule) {
    const Header& h = s.require(p.header);
    const bool ordered = p.cmp != Predicate::Cmp::Eq && p.cmp != Predicate::Cmp::Ne;
    if (ordered && h.cls != HeaderClass::Numerval && h.cls != HeaderClass::Numerical)
        throw std::invalid_argument("rule '" + rule + "': order comparison on header '" +
                                    p.header + "' of class " + to_string(h.cls));
    if (ordered) order_constant(p.constant);
}

bool same_header(const Header& a, const Header& b) {
    return a.name == b.name && a.cls == b.cls && a.group == b.group &&
           a.taxonomy == b.taxonomy && a.normalizer == b.normalizer && a.ceiling == b.ceiling;
}

// Derived schemas are named after their rule. Resolving twice (e.g. after
// dropping an external) reuses the schema already minted.
int mint_or_reuse(Catalog& cat, const std::string& name, std::vector<Header> hs) {
    const int existing = cat.schema_id(name);
    if (existing >= 0) {
        const Schema& s = cat.schema(existing);
        bool ok = s.arity() == hs.size();
        for (std::size_t i = 0; ok && i < hs.size(); ++i) ok = same_header(s.header(i), hs[i]);
        if (!ok)
            throw std::invalid_argument("rule '" + name +
                                        "' collides with an existing schema of another shape");
        return existing;
    }
    return cat.add_schema(Schema(name, std::move(hs)));
}

}  // namespace

ResolvedRules ResolvedRules::resolve(Catalog& cat, const std::vector<DeductionRule>& rules,
                                     const std::map<std::string, Database>& externals) {
    ResolvedRules out;
    std::set<std::string> names;
    std::set<std::string> aggregates;

    const auto source_schema = [&](const SourceRef& src, const std::string& rule) -> int {
        switch (src.kind) {
            case SourceRef::Kind::TagSchema: {
                const int id = cat.schema_id(src.name);
                if (id < 0)
                    throw std::invalid_argument("rule '" + rule + "': unknown schema '" +
                                                src.name + "'");
                return id;
            }
            case SourceRef::Kind::External: {
                const auto it = externals.find(src.name);
                if (it == externals.end())
                    throw std::invalid_argument("rule '" + rule + "': unknown external '" +
                                                src.name + "'");
                return it->second.schema_id();
            }
            case SourceRef::Kind::Rule: {
                const auto it = out.output_schema_.find(src.name);
                if (it == out.output_schema_.end())
                    throw std::invalid_argument("rule '" + rule +
                                                "': source rule '" + src.name +
                                                "' is not defined earlier");
                return it->second;
            }
        }
        throw std::logic_error("bad source kind");
    };

    const auto check_term = [&](const Term& t, const std::string& rule) {
        if (const auto* agg = std::get_if<std::string>(&t))
            if (!aggregates.count(*agg))
                throw std::invalid_argument("rule '" + rule + "': unknown aggregate '" + *agg +
                                            "'");
    };

    for (const DeductionRule& r : rules) {
        const std::string& name = rule_name(r);
        if (name.empty() || !names.insert(name).second)
            throw std::invalid_argument("duplicate or empty rule name '" + name + "'");

        if (const auto* sel = std::get_if<SelectRule>(&r)) {
            const int sid = source_schema(sel->src, name);
            for (const Predicate& p : sel->where) validate_predicate(p, cat.schema(sid), name);
            out.output_schema_[name] = sid;
        } else if (const auto* prj = std::get_if<ProjectRule>(&r)) {
            const int sid = source_schema(prj->src, name);
            if (prj->headers.empty())
                throw std::invalid_argument("rule '" + name + "': empty projection");
            std::vector<Header> hs;
            for (const std::string& h : prj->headers) hs.push_back(cat.schema(sid).require(h));
            out.output_schema_[name] = mint_or_reuse(cat, name, std::move(hs));
        } else if (const auto* jn = std::get_if<JoinRule>(&r)) {
            const int lid = source_schema(jn->left, name);
            const int rid = source_schema(jn->right, name);
            const Schema& ls = cat.schema(lid);
            const Schema& rs = cat.schema(rid);
            const auto shared = shared_columns(ls, rs);
            if (shared.empty())
                throw std::invalid_argument("rule '" + name + "': sources share no header");
            std::set<std::string> shared_names;
            for (const auto& sc : shared)
                shared_names.insert(ls.header(static_cast<std::size_t>(sc.left)).name);
            if (!jn->expect_on.empty() &&
                std::set<std::string>(jn->expect_on.begin(), jn->expect_on.end()) != shared_names)
                throw std::invalid_argument("rule '" + name +
                                            "': 'on' list does not match the shared headers");
            std::vector<Header> hs;
            for (const Header& h : ls.headers()) hs.push_back(h);
            for (const Header& h : rs.headers())
                if (ls.index_of(h.name) < 0) hs.push_back(h);
            out.output_schema_[name] = mint_or_reuse(cat, name, std::move(hs));
        } else if (const auto* un = std::get_if<UnionRule>(&r)) {
            const int lid = source_schema(un->left, name);
            const int rid = source_schema(un->right, name);
            if (lid != rid)
                throw std::invalid_argument("rule '" + name + "': union of distinct schemas");
            out.output_schema_[name] = lid;
        } else if (const auto* df = std::get_if<DiffRule>(&r)) {
            const int lid = source_schema(df->left, name);
            const int rid = source_schema(df->right, name);
            if (lid != rid)
                throw std::invalid_argument("rule '" + name + "': difference of distinct schemas");
            // Subtracting a growing set would make deduction non-monotone;
            // only fixed external tables may be subtracted.
            if (df->right.kind != SourceRef::Kind::External)
                throw std::invalid_argument("rule '" + name +
                                            "': only an external table can be subtracted");
            out.output_schema_[name] = lid;
        } else if (const auto* agg = std::get_if<AggregateRule>(&r)) {
            const int sid = source_schema(agg->src, name);
            const Schema& s = cat.schema(sid);
            if (agg->op == AggregateRule::Op::Sum) {
                const Header& h = s.require(agg->header);
                if (h.cls != HeaderClass::Numerval && h.cls != HeaderClass::Numerical)
                    throw std::invalid_argument("rule '" + name + "': SUM over header '" +
                                                agg->header + "' of class " + to_string(h.cls));
            }
            for (const Predicate& p : agg->where) validate_predicate(p, s, name);
            aggregates.insert(name);
        } else if (const auto* bd = std::get_if<BoundRule>(&r)) {
            const int sid = cat.schema_id(bd->schema);
            if (sid < 0)
                throw std::invalid_argument("rule '" + name + "': unknown schema '" + bd->schema +
                                            "'");
            const Schema& s = cat.schema(sid);
            for (const auto& [h, v] : bd->anchors) validate_cell(v, s.require(h), cat);
            const Header& target = s.require(bd->target_header);
            if (target.cls != HeaderClass::Numerval)
                throw std::invalid_argument("rule '" + name + "': bound target '" +
                                            bd->target_header + "' must be interval-valued");
            if (!target.ceiling)
                throw std::invalid_argument("rule '" + name + "': header '" + bd->target_header +
                                            "' has no ceiling for derived bounds");
            check_term(bd->lhs, name);
            check_term(bd->rhs, name);
            if (bd->guard) check_term(bd->guard->second, name);
        }
        out.rules_.push_back(r);
    }
    return out;
}

namespace {

// Exact interval of possible values for an aggregate result.
struct Bounds {
    Rational lo, hi;
    bool operator==(const Bounds&) const = default;
};

struct RoundContext {
    const Knowledge* snapshot;
    const std::map<std::string, Database>* externals;
    const ResolvedRules* rules;
    const Catalog* cat;
    std::map<std::string, std::vector<Tuple>> rule_memo;
    std::map<std::string, Bounds> aggregate_env;
};

struct SourceRows {
    int schema_id;
    std::vector<Tuple> rows;
};

std::vector<Tuple> eval_set_rule(const DeductionRule& r, RoundContext& ctx);

SourceRows materialize(const SourceRef& src, RoundContext& ctx) {
    switch (src.kind) {
        case SourceRef::Kind::TagSchema: {
            const int sid = ctx.cat->schema_id(src.name);
            std::vector<Tuple> rows;
            for (const Fact& f : ctx.snapshot->facts_of_schema(sid)) rows.push_back(f.tuple);
            return SourceRows{sid, std::move(rows)};
        }
        case SourceRef::Kind::External: {
            const Database& db = ctx.externals->at(src.name);
            return SourceRows{db.schema_id(), db.rows()};
        }
        case SourceRef::Kind::Rule: {
            const auto memo = ctx.rule_memo.find(src.name);
            if (memo == ctx.rule_memo.end()) {
                for (const DeductionRule& r : ctx.rules->rules())
                    if (rule_name(r) == src.name) {
                        ctx.rule_memo[src.name] = eval_set_rule(r, ctx);
                        break;
                    }
            }
            return SourceRows{ctx.rules->output_schema(src.name), ctx.rule_memo.at(src.name)};
        }
    }
    throw std::logic_error("bad source kind");
}

bool row_passes(const Tuple& t, const Schema& s, const std::vector<Predicate>& where,
                const Catalog& cat) {
    for (const Predicate& p : where) {
        const int i = s.index_of(p.header);
        if (!predicate_holds(p, t.cells[static_cast<std::size_t>(i)], s.header(static_cast<std::size_t>(i)), cat))
            return false;
    }
    return true;
}

void push_unique(std::vector<Tuple>& rows, Tuple t) {
    if (std::find(rows.begin(), rows.end(), t) == rows.end()) rows.push_back(std::move(t));
}

// An integral number meeting an interval-classed column becomes a singleton
// interval so the joined tuple stays legal for its schema.
Value coerce_for_header(Value v, const Header& h) {
    if (h.cls == HeaderClass::Numerval && v.kind() == Value::Kind::Number &&
        v.as_number().is_integer())
        return Value::interval(v.as_number().num(), v.as_number().num());
    return v;
}

std::vector<Tuple> eval_set_rule(const DeductionRule& r, RoundContext& ctx) {
    const Catalog& cat = *ctx.cat;
    std::vector<Tuple> out;

    if (const auto* sel = std::get_if<SelectRule>(&r)) {
        const SourceRows src = materialize(sel->src, ctx);
        const Schema& s = cat.schema(src.schema_id);
        for (const Tuple& t : src.rows)
            if (row_passes(t, s, sel->where, cat)) push_unique(out, t);
    } else if (const auto* prj = std::get_if<ProjectRule>(&r)) {
        const SourceRows src = materialize(prj->src, ctx);
        const Schema& s = cat.schema(src.schema_id);
        std::vector<int> idx;
        for (const std::string& h : prj->headers) idx.push_back(s.index_of(h));
        for (const Tuple& t : src.rows) {
            Tuple sub;
            for (int i : idx) sub.cells.push_back(t.cells[static_cast<std::size_t>(i)]);
            push_unique(out, std::move(sub));
        }
    } else if (const auto* jn = std::get_if<JoinRule>(&r)) {
        const SourceRows left = materialize(jn->left, ctx);
        const SourceRows right = materialize(jn->right, ctx);
        const Schema& ls = cat.schema(left.schema_id);
        const Schema& rs = cat.schema(right.schema_id);
        const Schema& os = cat.schema(ctx.rules->output_schema(jn->name));
        const auto shared = shared_columns(ls, rs);
        for (const Tuple& lt : left.rows)
            for (const Tuple& rt : right.rows) {
                Tuple joined = lt;
                bool ok = true;
                for (const auto& sc : shared) {
                    const auto met = cell_intersect(lt.cells[static_cast<std::size_t>(sc.left)],
                                                    rt.cells[static_cast<std::size_t>(sc.right)], cat);
                    if (!met) {
                        ok = false;
                        break;
                    }
                    joined.cells[static_cast<std::size_t>(sc.left)] =
                        coerce_for_header(*met, ls.header(static_cast<std::size_t>(sc.left)));
                }
                if (!ok) continue;
                for (std::size_t j = 0; j < rs.arity(); ++j)
                    if (ls.index_of(rs.header(j).name) < 0) joined.cells.push_back(rt.cells[j]);
                validate_tuple(joined, os, cat);
                push_unique(out, std::move(joined));
            }
    } else if (const auto* un = std::get_if<UnionRule>(&r)) {
        for (const Tuple& t : materialize(un->left, ctx).rows) push_unique(out, t);
        for (const Tuple& t : materialize(un->right, ctx).rows) push_unique(out, t);
    } else if (const auto* df = std::get_if<DiffRule>(&r)) {
        const SourceRows left = materialize(df->left, ctx);
        const SourceRows right = materialize(df->right, ctx);
        for (const Tuple& t : left.rows)
            if (std::find(right.rows.begin(), right.rows.end(), t) == right.rows.end())
                push_unique(out, t);
    } else {
        throw std::logic_error("not a set rule");
    }
    return out;
}

Bounds eval_aggregate(const AggregateRule& agg, RoundContext& ctx) {
    const SourceRows src = materialize(agg.src, ctx);
    const Schema& s = ctx.cat->schema(src.schema_id);

    if (agg.op == AggregateRule::Op::Count) {
        std::int64_t n = 0;
        for (const Tuple& t : src.rows)
            if (row_passes(t, s, agg.where, *ctx.cat)) ++n;
        return Bounds{Rational(n), Rational(n)};
    }

    const int col = s.index_of(agg.header);
    Bounds b{Rational(0), Rational(0)};
    for (const Tuple& t : src.rows) {
        if (!row_passes(t, s, agg.where, *ctx.cat)) continue;
        const Value& v = t.cells[static_cast<std::size_t>(col)];
        if (v.is_wildcard())
            throw std::invalid_argument("rule '" + agg.name +
                                        "': cannot sum an unknown cell; filter it out");
        if (v.kind() == Value::Kind::IntInterval) {
            b.lo += Rational(v.as_interval().lo);
            b.hi += Rational(v.as_interval().hi);
        } else {
            b.lo += v.as_number();
            b.hi += v.as_number();
        }
    }
    return b;
}

Bounds eval_term(const Term& t, const RoundContext& ctx) {
    if (const auto* agg = std::get_if<std::string>(&t)) return ctx.aggregate_env.at(*agg);
    const Rational c = std::get<Rational>(t);
    return Bounds{c, c};
}

std::optional<Fact> eval_bound(const BoundRule& bd, RoundContext& ctx) {
    if (bd.guard && !(eval_term(Term(bd.guard->first), ctx) == eval_term(bd.guard->second, ctx)))
        return std::nullopt;
    const Bounds lhs = eval_term(bd.lhs, ctx);
    const Bounds rhs = eval_term(bd.rhs, ctx);
    const Rational lower = lhs.lo - rhs.hi;

    const int sid = ctx.cat->schema_id(bd.schema);
    const Schema& s = ctx.cat->schema(sid);
    const Header& target = s.require(bd.target_header);
    const std::int64_t lo = lower.ceil();
    if (lo > *target.ceiling) return std::nullopt;  // bound exceeds the value domain

    Tuple t;
    t.cells.assign(s.arity(), Value::wildcard());
    for (const auto& [h, v] : bd.anchors)
        t.cells[static_cast<std::size_t>(s.index_of(h))] = v;
    t.cells[static_cast<std::size_t>(s.index_of(bd.target_header))] =
        Value::interval(lo, *target.ceiling);
    return Fact{sid, std::move(t)};
}

}  // namespace

Knowledge saturate(const Knowledge& tag, const std::map<std::string, Database>& externals,
                   const ResolvedRules& rules, const Catalog& cat,
                   const SaturationLimits& limits) {
    Knowledge cur = tag;
    for (int round = 0; round <= limits.max_rounds; ++round) {
        const Knowledge snapshot = cur;
        RoundContext ctx{&snapshot, &externals, &rules, &cat, {}, {}};

        std::vector<Fact> fresh;
        for (const DeductionRule& r : rules.rules()) {
            if (const auto* agg = std::get_if<AggregateRule>(&r)) {
                ctx.aggregate_env[agg->name] = eval_aggregate(*agg, ctx);
            } else if (const auto* bd = std::get_if<BoundRule>(&r)) {
                if (auto f = eval_bound(*bd, ctx)) fresh.push_back(std::move(*f));
            } else {
                const int out_schema = rules.output_schema(rule_name(r));
                if (!ctx.rule_memo.count(rule_name(r)))
                    ctx.rule_memo[rule_name(r)] = eval_set_rule(r, ctx);
                for (const Tuple& t : ctx.rule_memo.at(rule_name(r)))
                    fresh.push_back(Fact{out_schema, t});
            }
        }

        bool grew = false;
        for (Fact& f : fresh) grew |= cur.insert(std::move(f), Provenance::Deduced);
        if (cur.size() > limits.max_facts)
            throw SaturationOverflow("saturation exceeded the fact ceiling of " +
                                     std::to_string(limits.max_facts));
        if (!grew) return cur;
    }
    throw SaturationOverflow("saturation did not reach a fixpoint within " +
                             std::to_string(limits.max_rounds) + " rounds");
}

ConsistencyResult check_consistency(const Knowledge& tag, const std::vector<PolicyAtom>& policy,
                                    const Catalog& cat) {
    for (const auto& [fact, prov] : tag) {
        const Schema& fs = cat.schema(fact.schema_id);
        for (std::size_t i = 0; i < policy.size(); ++i) {
            const PolicyAtom& atom = policy[i];
            if (!type_compatible(fs, cat.schema(atom.schema_id))) continue;
            if (matches(fact.tuple, fs, atom, cat))
                return ConsistencyResult{true, fact, static_cast<int>(i)};
        }
    }
    return ConsistencyResult{};
}

Knowledge epsilon_saturate(const Knowledge& tag, const std::map<std::string, Database>& externals,
                           const ResolvedRules& rules, const Catalog& cat,
                           const FiniteMechanism* mech, double eps,
                           const SaturationLimits& limits) {
    Knowledge saturated = saturate(tag, externals, rules, cat, limits);
    if (!mech) return saturated;

    const int k = static_cast<int>(mech->outputs().size());
    std::vector<int> bound_outputs;
    for (int a = 0; a < k; ++a)
        if (mech->output_fact(a)) bound_outputs.push_back(a);
    if (bound_outputs.empty()) return saturated;

    // Transitive closure of pairwise indistinguishability via union-find.
    std::vector<int> parent(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) parent[static_cast<std::size_t>(a)] = a;
    const auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
        return a;
    };
    for (std::size_t i = 0; i < bound_outputs.size(); ++i)
        for (std::size_t j = i + 1; j < bound_outputs.size(); ++j) {
            const int a = bound_outputs[i], b = bound_outputs[j];
            if (check_output_indist(*mech, mech->outputs()[static_cast<std::size_t>(a)],
                                    mech->outputs()[static_cast<std::size_t>(b)], eps)) {
                const int ra = find(a), rb = find(b);
                parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
            }
        }

    Knowledge collapsed;
    for (const auto& [fact, prov] : saturated) {
        std::optional<Fact> rep;
        for (int a : bound_outputs)
            if (*mech->output_fact(a) == fact) {
                rep = *mech->output_fact(find(a));
                break;
            }
        collapsed.insert(rep ? std::move(*rep) : fact, prov);
    }
    return collapsed;
}

}  // namespace privtrace
