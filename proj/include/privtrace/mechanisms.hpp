#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "privtrace/metrics.hpp"
#include "privtrace/model.hpp"

namespace privtrace {

/// A randomized answering mechanism with finite input and output sets,
/// given by its exact stochastic table P[v][alpha] = Prob[M(v) = alpha].
/// Inputs may be bound to databases (for adjacency-scaled audits) and
/// outputs to facts (for identification during epsilon-relaxed deduction).
class FiniteMechanism {
public:
    FiniteMechanism(std::vector<std::string> inputs, std::vector<std::string> outputs,
                    std::vector<std::vector<Rational>> rows);

    const std::vector<std::string>& inputs() const { return inputs_; }
    const std::vector<std::string>& outputs() const { return outputs_; }

    int input_index(const std::string& v) const;
    int output_index(const std::string& alpha) const;

    const Rational& prob(int v, int alpha) const {
        return rows_.at(static_cast<std::size_t>(v)).at(static_cast<std::size_t>(alpha));
    }
    const Rational& prob(const std::string& v, const std::string& alpha) const {
        return prob(input_index(v), output_index(alpha));
    }

    void bind_input(const std::string& v, Database db);
    void bind_output(const std::string& alpha, Fact f);
    const std::optional<Database>& input_db(int v) const {
        return input_dbs_.at(static_cast<std::size_t>(v));
    }
    const std::optional<Fact>& output_fact(int alpha) const {
        return output_facts_.at(static_cast<std::size_t>(alpha));
    }
    bool inputs_bound() const;
    bool outputs_bound() const;

private:
    std::vector<std::string> inputs_, outputs_;
    std::vector<std::vector<Rational>> rows_;
    std::map<std::string, int> in_index_, out_index_;
    std::vector<std::optional<Database>> input_dbs_;
    std::vector<std::optional<Fact>> output_facts_;
};

/// The two-input randomized-response mechanism with the coin randomness
/// folded into the rows: P[x][x] = 3/4, P[x][not x] = 1/4.
FiniteMechanism randomized_response();

/// Randomized response with the two coin flips spelled out as part of the
/// input (eight deterministic instances, labels like "True_HT").
FiniteMechanism randomized_response_coins();

/// Collapses inputs into groups, averaging their rows uniformly. Group order
/// follows first appearance in the original input list. Folding the coin
/// inputs of randomized_response_coins() recovers randomized_response().
FiniteMechanism marginalize_inputs(const FiniteMechanism& m,
                                   const std::map<std::string, std::string>& group_of);

/// Both-sided probability-ratio test for one output: Prob[M(v)=a] and
/// Prob[M(v')=a] within a factor e^eps of each other. A 0/0 pairing passes,
/// x/0 with x > 0 fails for every finite eps.
bool check_local_indist(const FiniteMechanism& m, const std::string& v, const std::string& w,
                        const std::string& alpha, double eps, double tol = 1e-12);

/// Both-sided ratio test between two outputs, over every ordered input pair
/// (including a pair of equal inputs).
bool check_output_indist(const FiniteMechanism& m, const std::string& alpha,
                         const std::string& beta, double eps, double tol = 1e-12);

enum class AdjacencyKind { Unit, Hamming, Rho };

std::string to_string(AdjacencyKind k);

/// Distance between two databases under the chosen adjacency: constant 1 for
/// distinct pairs (Unit), row-pairwise differing-cell count (Hamming), or the
/// minimum tuple distance over cross pairs (Rho).
Rational adjacency_eval(AdjacencyKind kind, const Database& a, const Database& b,
                        const Catalog& cat);

/// Result of a minimal-epsilon audit: the witnessing probability ratio and
/// adjacency are kept exact; epsilon itself is their log-space quotient.
struct AuditOutcome {
    bool infinite = false;
    Rational max_ratio{1};   // probability ratio at the binding pair
    Rational adjacency{1};   // adjacency at the binding pair (1 for local audits)
    std::string witness;     // "v vs v' @ alpha" at the binding pair

    double epsilon() const;
    std::string to_string() const;
};

/// Minimal eps such that every input pair is locally indistinguishable on
/// every output: max |ln(P[v][a] / P[w][a])|. Infinite when some output
/// separates two inputs with a positive-vs-zero probability.
AuditOutcome audit_ldp(const FiniteMechanism& m);

/// Minimal eps such that for all input pairs and output singletons
/// |ln(P[v][a] / P[w][a])| <= eps * adjacency(v, w). Inputs must be bound to
/// databases unless kind == Unit. Pairs at adjacency 0 must have identical
/// rows, otherwise the audit is infinite.
AuditOutcome audit_dp(const FiniteMechanism& m, AdjacencyKind kind, const Catalog& cat);

enum class NoiseKind { Laplace, Gauss, Exponential };
enum class BoundMode { Resample, Clamp };

/// Adds seeded noise to a numeric value and returns the nearest integer
/// inside the prescribed domain. Out-of-domain samples are redrawn (falling
/// back to clamping after too many rejections) or clamped directly.
/// Deterministic for a fixed seed.
Rational bounded_noise(const Rational& value, NoiseKind kind, double scale,
                       const Value::IntInterval& domain, std::uint64_t seed,
                       BoundMode mode = BoundMode::Resample);

}  // namespace privtrace
