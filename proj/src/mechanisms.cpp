#include "privtrace/mechanisms.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace privtrace {

FiniteMechanism::FiniteMechanism(std::vector<std::string> inputs,
                                 std::vector<std::string> outputs,
                                 std::vector<std::vector<Rational>> rows)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), rows_(std::move(rows)) {
    if (inputs_.empty() || outputs_.empty())
        throw std::invalid_argument("mechanism needs at least one input and one output");
    if (rows_.size() != inputs_.size())
        throw std::invalid_argument("mechanism needs one row per input");
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
        if (!in_index_.emplace(inputs_[i], static_cast<int>(i)).second)
            throw std::invalid_argument("duplicate mechanism input '" + inputs_[i] + "'");
        const auto& row = rows_[i];
        if (row.size() != outputs_.size())
            throw std::invalid_argument("row '" + inputs_[i] + "' has wrong width");
        Rational sum;
        for (const Rational& p : row) {
            if (p < Rational(0) || p > Rational(1))
                throw std::invalid_argument("probability out of [0,1] in row '" + inputs_[i] + "'");
            sum += p;
        }
        if (sum != Rational(1))
            throw std::invalid_argument("row '" + inputs_[i] + "' sums to " + sum.to_string() +
                                        ", expected 1");
    }
    for (std::size_t j = 0; j < outputs_.size(); ++j)
        if (!out_index_.emplace(outputs_[j], static_cast<int>(j)).second)
            throw std::invalid_argument("duplicate mechanism output '" + outputs_[j] + "'");
    input_dbs_.resize(inputs_.size());
    output_facts_.resize(outputs_.size());
}

int FiniteMechanism::input_index(const std::string& v) const {
    const auto it = in_index_.find(v);
    if (it == in_index_.end())
        throw std::invalid_argument("unknown mechanism input '" + v + "'");
    return it->second;
}

int FiniteMechanism::output_index(const std::string& alpha) const {
    const auto it = out_index_.find(alpha);
    if (it == out_index_.end())
        throw std::invalid_argument("unknown mechanism output '" + alpha + "'");
    return it->second;
}

void FiniteMechanism::bind_input(const std::string& v, Database db) {
    input_dbs_[static_cast<std::size_t>(input_index(v))] = std::move(db);
}

void FiniteMechanism::bind_output(const std::string& alpha, Fact f) {
    output_facts_[static_cast<std::size_t>(output_index(alpha))] = std::move(f);
}

bool FiniteMechanism::inputs_bound() const {
    for (const auto& db : input_dbs_)
        if (!db) return false;
    return true;
}

bool FiniteMechanism::outputs_bound() const {
    for (const auto& f : output_facts_)
        if (!f) return false;
    return true;
}

FiniteMechanism randomized_response() {
    const Rational q(1, 4), p(3, 4);
    return FiniteMechanism({"True", "False"}, {"True", "False"}, {{p, q}, {q, p}});
}

FiniteMechanism randomized_response_coins() {
    std::vector<std::string> inputs;
    std::vector<std::vector<Rational>> rows;
    for (const std::string x : {"True", "False"})
        for (const std::string f1 : {"H", "T"})
            for (const std::string f2 : {"H", "T"}) {
                inputs.push_back(x + "_" + f1 + f2);
                // Output X when the first coin is heads; else the second coin
                // decides between True and False.
                const std::string out = f1 == "H" ? x : (f2 == "H" ? "True" : "False");
                rows.push_back(out == "True" ? std::vector<Rational>{1, 0}
                                             : std::vector<Rational>{0, 1});
            }
    return FiniteMechanism(std::move(inputs), {"True", "False"}, std::move(rows));
}

FiniteMechanism marginalize_inputs(const FiniteMechanism& m,
                                   const std::map<std::string, std::string>& group_of) {
    std::vector<std::string> groups;
    std::map<std::string, std::vector<int>> members;
    for (std::size_t i = 0; i < m.inputs().size(); ++i) {
        const auto it = group_of.find(m.inputs()[i]);
        if (it == group_of.end())
            throw std::invalid_argument("input '" + m.inputs()[i] + "' has no group");
        if (!members.count(it->second)) groups.push_back(it->second);
        members[it->second].push_back(static_cast<int>(i));
    }
    std::vector<std::vector<Rational>> rows;
    for (const std::string& g : groups) {
        std::vector<Rational> row(m.outputs().size(), Rational(0));
        const auto& idx = members[g];
        for (int v : idx)
            for (std::size_t j = 0; j < m.outputs().size(); ++j)
                row[j] += m.prob(v, static_cast<int>(j));
        for (auto& p : row) p /= Rational(static_cast<std::int64_t>(idx.size()));
        rows.push_back(std::move(row));
    }
    return FiniteMechanism(std::move(groups), m.outputs(), std::move(rows));
}

namespace {

// Both-sided ratio check on a single probability pair.
bool pair_within(const Rational& p, const Rational& q, double eps, double tol) {
    if (p.is_zero() && q.is_zero()) return true;
    if (p.is_zero() || q.is_zero()) return false;
    const Rational ratio = p > q ? p / q : q / p;
    return std::log(ratio.to_double()) <= eps + tol;
}

}  // namespace

bool check_local_indist(const FiniteMechanism& m, const std::string& v, const std::string& w,
                        const std::string& alpha, double eps, double tol) {
    const int a = m.output_index(alpha);
    return pair_within(m.prob(m.input_index(v), a), m.prob(m.input_index(w), a), eps, tol);
}

bool check_output_indist(const FiniteMechanism& m, const std::string& alpha,
                         const std::string& beta, double eps, double tol) {
    const int a = m.output_index(alpha);
    const int b = m.output_index(beta);
    const int n = static_cast<int>(m.inputs().size());
    for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w)
            if (!pair_within(m.prob(v, a), m.prob(w, b), eps, tol)) return false;
    return true;
}

std::string to_string(AdjacencyKind k) {
    switch (k) {
        case AdjacencyKind::Unit: return "unit";
        case AdjacencyKind::Hamming: return "hamming";
        case AdjacencyKind::Rho: return "rho";
    }
    return "?";
}

Rational adjacency_eval(AdjacencyKind kind, const Database& a, const Database& b,
                        const Catalog& cat) {
    switch (kind) {
        case AdjacencyKind::Unit:
            return (a.schema_id() == b.schema_id() && a.rows() == b.rows()) ? Rational(0)
                                                                            : Rational(1);
        case AdjacencyKind::Hamming:
            return Rational(hamming_cellwise(a, b));
        case AdjacencyKind::Rho: {
            std::vector<Fact> fa, fb;
            for (const Tuple& t : a.rows()) fa.push_back(Fact{a.schema_id(), t});
            for (const Tuple& t : b.rows()) fb.push_back(Fact{b.schema_id(), t});
            return set_distance(fa, fb, cat);
        }
    }
    throw std::logic_error("bad adjacency kind");
}

double AuditOutcome::epsilon() const {
    if (infinite) return std::numeric_limits<double>::infinity();
    return std::log(max_ratio.to_double()) / adjacency.to_double();
}

std::string AuditOutcome::to_string() const {
    if (infinite) return "inf";
    if (max_ratio == Rational(1)) return "0";
    std::string out = "ln(" + max_ratio.to_string() + ")";
    if (adjacency != Rational(1)) out += "/(" + adjacency.to_string() + ")";
    return out;
}

namespace {

struct MaxTracker {
    AuditOutcome out;

    void infinite(std::string witness) {
        out.infinite = true;
        out.witness = std::move(witness);
    }

    // Candidate bound eps >= ln(ratio)/adjacency.
    void consider(const Rational& ratio, const Rational& adjacency, std::string witness) {
        if (out.infinite || ratio == Rational(1)) return;
        const double cand = std::log(ratio.to_double()) / adjacency.to_double();
        const double cur = out.max_ratio == Rational(1)
                               ? -1.0
                               : std::log(out.max_ratio.to_double()) / out.adjacency.to_double();
        if (cand > cur) {
            out.max_ratio = ratio;
            out.adjacency = adjacency;
            out.witness = std::move(witness);
        }
    }
};

}  // namespace

AuditOutcome audit_ldp(const FiniteMechanism& m) {
    MaxTracker best;
    const int n = static_cast<int>(m.inputs().size());
    const int k = static_cast<int>(m.outputs().size());
    for (int v = 0; v < n && !best.out.infinite; ++v)
        for (int w = v + 1; w < n && !best.out.infinite; ++w)
            for (int a = 0; a < k; ++a) {
                const Rational& p = m.prob(v, a);
                const Rational& q = m.prob(w, a);
                const std::string witness =
                    m.inputs()[static_cast<std::size_t>(v)] + " vs " +
                    m.inputs()[static_cast<std::size_t>(w)] + " @ " +
                    m.outputs()[static_cast<std::size_t>(a)];
                if (p.is_zero() != q.is_zero()) {
                    best.infinite(witness);
                    break;
                }
                if (p.is_zero()) continue;
                best.consider(p > q ? p / q : q / p, Rational(1), witness);
            }
    return best.out;
}

AuditOutcome audit_dp(const FiniteMechanism& m, AdjacencyKind kind, const Catalog& cat) {
    const int n = static_cast<int>(m.inputs().size());
    const int k = static_cast<int>(m.outputs().size());
    if (kind != AdjacencyKind::Unit && !m.inputs_bound())
        throw std::invalid_argument("adjacency '" + to_string(kind) +
                                    "' needs every mechanism input bound to a database");

    MaxTracker best;
    for (int v = 0; v < n && !best.out.infinite; ++v)
        for (int w = v + 1; w < n && !best.out.infinite; ++w) {
            const std::string pair_name = m.inputs()[static_cast<std::size_t>(v)] + " vs " +
                                          m.inputs()[static_cast<std::size_t>(w)];
            const Rational adj =
                kind == AdjacencyKind::Unit
                    ? Rational(1)
                    : adjacency_eval(kind, *m.input_db(v), *m.input_db(w), cat);
            for (int a = 0; a < k; ++a) {
                const Rational& p = m.prob(v, a);
                const Rational& q = m.prob(w, a);
                const std::string witness =
                    pair_name + " @ " + m.outputs()[static_cast<std::size_t>(a)];
                if (p.is_zero() && q.is_zero()) continue;
                if (p.is_zero() || q.is_zero()) {
                    best.infinite(witness);
                    break;
                }
                const Rational ratio = p > q ? p / q : q / p;
                if (ratio == Rational(1)) continue;
                if (adj.is_zero()) {
                    // Indistinguishable inputs must answer identically.
                    best.infinite(witness + " (adjacency 0)");
                    break;
                }
                best.consider(ratio, adj, witness);
            }
        }
    return best.out;
}

namespace {

// Sequential seeds correlate badly through mt19937 initialization; scramble
// them first (splitmix64).
std::uint64_t scramble_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw_noise(NoiseKind kind, double scale, std::mt19937_64& rng) {
    switch (kind) {
        case NoiseKind::Laplace: {
            const double u = uniform01(rng) - 0.5;
            const double mag = -scale * std::log(1.0 - 2.0 * std::abs(u));
            return u < 0 ? -mag : mag;
        }
        case NoiseKind::Gauss: {
            double u1 = uniform01(rng);
            while (u1 <= 0.0) u1 = uniform01(rng);
            const double u2 = uniform01(rng);
            return scale * std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * 3.14159265358979323846 * u2);
        }
        case NoiseKind::Exponential: {
            double u = uniform01(rng);
            while (u <= 0.0) u = uniform01(rng);
            return -scale * std::log(u);
        }
    }
    throw std::logic_error("bad noise kind");
}

}  // namespace

Rational bounded_noise(const Rational& value, NoiseKind kind, double scale,
                       const Value::IntInterval& domain, std::uint64_t seed, BoundMode mode) {
    if (!(scale > 0.0)) throw std::invalid_argument("noise scale must be positive");
    std::mt19937_64 rng(scramble_seed(seed));
    const double center = value.to_double();
    const auto clamp_to_domain = [&](double x) {
        std::int64_t r = std::llround(x);
        if (r < domain.lo) r = domain.lo;
        if (r > domain.hi) r = domain.hi;
        return Rational(r);
    };

    double x = center;
    const int attempts = mode == BoundMode::Clamp ? 1 : 1000;
    for (int i = 0; i < attempts; ++i) {
        x = center + draw_noise(kind, scale, rng);
        const std::int64_t r = std::llround(x);
        if (mode == BoundMode::Resample && r >= domain.lo && r <= domain.hi) return Rational(r);
    }
    return clamp_to_domain(x);
}

}  // namespace privtrace
