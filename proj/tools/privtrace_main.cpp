#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "privtrace/commands.hpp"

namespace {

struct GlobalFlags {
    std::string scenario_path;
    std::string format = "text";
    std::string interval_closure;
    std::string drop_external;
};

void add_common(CLI::App* cmd, GlobalFlags& g) {
    cmd->add_option("scenario", g.scenario_path, "scenario file (.scn)")->required();
    cmd->add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"text", "machine"}));
    cmd->add_option("--interval-closure", g.interval_closure,
                    "reading of dash-style interval tokens")
        ->check(CLI::IsMember({"half-open", "closed"}));
    cmd->add_option("--drop-external", g.drop_external,
                    "remove an external table (and the rules drawing on it)");
}

privtrace::Scenario load(const GlobalFlags& g) {
    privtrace::LoadOverrides overrides;
    if (!g.interval_closure.empty()) overrides.closed_upper = g.interval_closure == "closed";
    privtrace::Scenario scn = privtrace::load_scenario(g.scenario_path, overrides);
    if (!g.drop_external.empty()) scn = scn.without_external(g.drop_external);
    return scn;
}

int emit(const privtrace::Report& rep, const GlobalFlags& g) {
    if (g.format == "machine")
        std::cout << rep.machine.dump(2) << "\n";
    else
        std::cout << rep.text;
    return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"privtrace: query-sequence privacy analysis on finite tables"};
    app.require_subcommand(1);

    GlobalFlags g;

    auto* run = app.add_subcommand("run", "execute the query script and trace the run tree");
    add_common(run, g);
    privtrace::RunArgs run_args;
    double run_epsilon = -1.0;
    int run_samples = 0;
    run->add_option("--target", run_args.target, "target set for distance reporting");
    run->add_option("--epsilon", run_epsilon, "identify answers up to this epsilon");
    run->add_option("--sample", run_samples, "Monte-Carlo sample count instead of full tree");
    run->add_option("--seed", run_args.seed, "seed for --sample");

    auto* distance = app.add_subcommand("distance", "distances from table rows to the target");
    add_common(distance, g);
    privtrace::DistanceArgs dist_args;
    distance->add_option("--target", dist_args.target, "target set name");
    distance->add_option("--database", dist_args.database, "table to measure (default: published)");

    auto* compare = app.add_subcommand("compare", "decide between the two configurations");
    add_common(compare, g);
    std::string compare_target = "main";
    compare->add_option("--target", compare_target, "target set name");

    auto* audit = app.add_subcommand("audit", "minimal epsilon per adjacency kind");
    add_common(audit, g);
    std::vector<std::string> adjacency_names;
    audit->add_option("--adjacency", adjacency_names, "unit, hamming or rho (repeatable)")
        ->check(CLI::IsMember({"unit", "hamming", "rho"}));

    CLI11_PARSE(app, argc, argv);

    try {
        const privtrace::Scenario scn = load(g);
        if (run->parsed()) {
            if (run_epsilon >= 0.0) run_args.epsilon = run_epsilon;
            if (run_samples > 0) run_args.samples = run_samples;
            return emit(privtrace::cmd_run(scn, run_args), g);
        }
        if (distance->parsed()) return emit(privtrace::cmd_distance(scn, dist_args), g);
        if (compare->parsed()) return emit(privtrace::cmd_compare(scn, compare_target), g);

        privtrace::AuditArgs audit_args;
        for (const std::string& name : adjacency_names) {
            if (name == "unit") audit_args.kinds.push_back(privtrace::AdjacencyKind::Unit);
            if (name == "hamming") audit_args.kinds.push_back(privtrace::AdjacencyKind::Hamming);
            if (name == "rho") audit_args.kinds.push_back(privtrace::AdjacencyKind::Rho);
        }
        return emit(privtrace::cmd_audit(scn, audit_args), g);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
