#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "privtrace/scenario.hpp"

namespace privtrace {

/// Exit codes: 0 = clean, 1 = usage/parse error (set by the CLI wrapper),
/// 2 = the run reached a policy violation.
struct Report {
    int exit_code = 0;
    std::string text;
    nlohmann::json machine;
};

struct RunArgs {
    std::string target = "main";       // distance reporting; ignored if undeclared
    std::optional<double> epsilon;     // answer identification via the mechanism
    std::optional<int> samples;        // Monte-Carlo mode instead of materializing
    std::uint64_t seed = 0;
};

struct DistanceArgs {
    std::string target = "main";
    std::string database;  // defaults to the published table
};

struct AuditArgs {
    std::vector<AdjacencyKind> kinds;  // empty: unit, plus rho/hamming when bindable
};

Report cmd_run(const Scenario& scn, const RunArgs& args = {});
Report cmd_distance(const Scenario& scn, const DistanceArgs& args = {});
Report cmd_compare(const Scenario& scn, const std::string& target = "main");
Report cmd_audit(const Scenario& scn, const AuditArgs& args = {});

}  // namespace privtrace
