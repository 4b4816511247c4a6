#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "privtrace/compare.hpp"
#include "privtrace/engine.hpp"
#include "privtrace/mechanisms.hpp"
#include "privtrace/saturation.hpp"

namespace privtrace {

/// Parse or validation failure, carrying "file:line[:col]" in what().
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioOptions {
    std::int64_t default_ceiling = 100000;  // for ">= c" cells on headers without dmax=
    bool closed_upper = false;              // reading of dash-style "[a-b[" interval tokens
    SaturationLimits limits;
};

/// A fully validated analysis scenario: schemas and taxonomies, the secret
/// and published tables, externally available tables, the privacy policy,
/// deduction rules, the query script, and optional mechanism/targets.
struct Scenario {
    std::string name;
    Catalog catalog;
    std::map<std::string, Database> databases;          // secret and published tables
    std::map<std::string, std::string> database_roles;  // "secret" | "published"
    std::map<std::string, Database> externals;
    std::vector<PolicyAtom> policy;
    std::map<std::string, std::vector<Fact>> targets;  // default target is "main"
    std::vector<DeductionRule> rules;
    ResolvedRules resolved;
    std::vector<ScriptStep> script;
    std::optional<FiniteMechanism> mechanism;
    std::optional<std::pair<CompareConfig, CompareConfig>> compare;
    ScenarioOptions options;

    const std::vector<Fact>& target(const std::string& name) const;
    bool has_target(const std::string& name) const { return targets.count(name) != 0; }

    /// The published database when there is exactly one, otherwise by name.
    const Database& published(const std::string& name = "") const;
    std::string published_name(const std::string& name = "") const;

    /// Copy of this scenario with one external table removed, along with
    /// every rule that (transitively) draws on it.
    Scenario without_external(const std::string& name) const;
};

/// Settings that must be known before cells are parsed.
struct LoadOverrides {
    std::optional<bool> closed_upper;
};

Scenario load_scenario(const std::string& path, const LoadOverrides& overrides = {});

/// Parses scenario text; `origin` names the source in errors, `base_dir`
/// anchors relative csv paths.
Scenario parse_scenario(std::string_view text, const std::string& origin,
                        const LoadOverrides& overrides = {},
                        const std::string& base_dir = ".");

}  // namespace privtrace
