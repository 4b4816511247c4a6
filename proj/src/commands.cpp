#include "privtrace/commands.hpp"

#include <cstdio>

#include "privtrace/compare.hpp"
#include "privtrace/engine.hpp"
#include "privtrace/metrics.hpp"

namespace privtrace {

namespace {

using nlohmann::json;

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fact_str(const Fact& f, const Catalog& cat) {
    return cat.schema(f.schema_id).name() + f.tuple.to_string();
}

/// Pads columns to their widest entry; two spaces between columns.
std::string format_table(const std::vector<std::vector<std::string>>& rows,
                         const std::string& indent) {
    std::vector<std::size_t> width;
    for (const auto& row : rows) {
        if (width.size() < row.size()) width.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i)
            width[i] = std::max(width[i], row[i].size());
    }
    std::string out;
    for (const auto& row : rows) {
        out += indent;
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += row[i];
            if (i + 1 < row.size())
                out += std::string(width[i] - row[i].size() + 2, ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += "\n";
    }
    return out;
}

EngineContext make_context(const Scenario& scn, const std::string& target,
                           std::optional<double> epsilon) {
    EngineContext ctx;
    ctx.cat = &scn.catalog;
    ctx.externals = &scn.externals;
    ctx.rules = &scn.resolved;
    ctx.policy = &scn.policy;
    // Running without the default target only skips distance reporting, but
    // naming a target that does not exist is an error.
    if (scn.has_target(target))
        ctx.target = scn.target(target);
    else if (target != "main")
        throw std::invalid_argument("scenario declares no target '" + target + "'");
    ctx.mech = scn.mechanism ? &*scn.mechanism : nullptr;
    ctx.epsilon = epsilon;
    ctx.limits = scn.options.limits;
    return ctx;
}

json audit_json(const AuditOutcome& a) {
    json j;
    j["infinite"] = a.infinite;
    if (!a.infinite) {
        j["epsilon"] = a.epsilon();
        j["ratio"] = a.max_ratio.to_string();
        j["adjacency"] = a.adjacency.to_string();
    }
    j["witness"] = a.witness;
    return j;
}

std::string audit_line(const AuditOutcome& a) {
    if (a.infinite) return "epsilon = inf  (" + a.witness + ")";
    return "epsilon = " + fmt_double(a.epsilon()) + "  [" + a.to_string() + "]";
}

}  // namespace

Report cmd_run(const Scenario& scn, const RunArgs& args) {
    Report rep;
    rep.machine["command"] = "run";
    rep.machine["scenario"] = scn.name;

    const EngineContext ctx = make_context(scn, args.target, args.epsilon);

    if (args.samples) {
        const double estimate =
            sample_violation_probability(ctx, scn.script, args.seed, *args.samples);
        rep.text = "scenario: " + scn.name + "\n" +
                   "violation probability (sampled, n=" + std::to_string(*args.samples) +
                   ", seed=" + std::to_string(args.seed) + "): " + fmt_double(estimate) + "\n";
        rep.machine["samples"] = *args.samples;
        rep.machine["seed"] = args.seed;
        rep.machine["violation_probability_estimate"] = estimate;
        rep.exit_code = estimate > 0.0 ? 2 : 0;
        return rep;
    }

    const RunTree tree = run_script(ctx, scn.script);
    const Rational vp = violation_probability(tree);

    std::vector<std::vector<std::string>> table;
    table.push_back({"state", "action", "prob", "path-prob", "verdict", "distance", "new-facts"});
    json jstates = json::array();
    for (const RunState& s : tree.states) {
        std::vector<std::string> row;
        json js;
        const std::string id = s.failed ? "fail" : "s" + std::to_string(s.id);
        js["id"] = s.id;
        js["name"] = id;
        js["action"] = s.action;
        js["parent"] = s.parent < 0 ? json() : json(s.parent);
        row.push_back(id);
        row.push_back(s.action);
        if (s.failed) {
            row.push_back("-");
            js["prob"] = json();
        } else {
            row.push_back(s.branch_prob.to_string());
            js["prob"] = s.branch_prob.to_string();
        }
        row.push_back(s.path_prob.to_string());
        js["path_prob"] = s.path_prob.to_string();
        if (s.failed) {
            row.push_back("-");
            js["verdict"] = json();
        } else {
            row.push_back(s.report.violated ? "violated" : "ok");
            js["verdict"] = s.report.violated ? "violated" : "ok";
        }
        if (!s.failed && s.report.distance) {
            row.push_back(s.report.distance->to_string());
            js["distance"] = s.report.distance->to_string();
        } else {
            row.push_back("-");
            js["distance"] = json();
        }

        // Fresh knowledge relative to the parent's saturated tag.
        std::string delta;
        json jdelta = json::array();
        if (!s.failed) {
            const Knowledge* parent_sat =
                s.parent >= 0 ? &tree.states[static_cast<std::size_t>(s.parent)].saturated
                              : nullptr;
            for (const auto& [f, prov] : s.saturated) {
                if (parent_sat && parent_sat->contains(f)) continue;
                if (!delta.empty()) delta += " ; ";
                delta += fact_str(f, scn.catalog);
                jdelta.push_back(fact_str(f, scn.catalog));
            }
        }
        row.push_back(delta.empty() ? "-" : delta);
        js["new_facts"] = jdelta;
        if (!s.failed && s.report.witness)
            js["witness"] = fact_str(*s.report.witness, scn.catalog);
        table.push_back(std::move(row));
        jstates.push_back(std::move(js));
    }

    rep.machine["states"] = std::move(jstates);
    rep.machine["fail_reachable"] = tree.fail_reachable();
    rep.machine["violation_probability"] = vp.to_string();
    rep.exit_code = vp > Rational(0) ? 2 : 0;
    rep.machine["exit_code"] = rep.exit_code;

    rep.text = "scenario: " + scn.name + "\n";
    if (args.epsilon) rep.text += "epsilon: " + fmt_double(*args.epsilon) + "\n";
    rep.text += "trace:\n" + format_table(table, "  ");
    rep.text += "violation probability: " + vp.to_string() + "\n";
    rep.text += std::string("verdict: ") + (rep.exit_code == 2 ? "violated" : "no violation") + "\n";
    return rep;
}

Report cmd_distance(const Scenario& scn, const DistanceArgs& args) {
    Report rep;
    const std::vector<Fact>& target = scn.target(args.target);
    const std::string db_name = scn.published_name(args.database);
    const Database& db = scn.databases.at(db_name);
    const Schema& s = scn.catalog.schema(db.schema_id());

    std::vector<std::vector<std::string>> table;
    table.push_back({"row", "tuple", "distance"});
    json jrows = json::array();
    std::vector<Fact> all;
    for (std::size_t i = 0; i < db.rows().size(); ++i) {
        const Fact f{db.schema_id(), db.rows()[i]};
        all.push_back(f);
        const Rational d = set_distance(std::vector<Fact>{f}, target, scn.catalog);
        table.push_back({std::to_string(i + 1), f.tuple.to_string(), d.to_string()});
        json jr;
        jr["row"] = i + 1;
        jr["tuple"] = f.tuple.to_string();
        jr["distance"] = d.to_string();
        jrows.push_back(std::move(jr));
    }
    const Rational rho = set_distance(all, target, scn.catalog);

    rep.machine["command"] = "distance";
    rep.machine["scenario"] = scn.name;
    rep.machine["target"] = args.target;
    rep.machine["database"] = db_name;
    rep.machine["schema"] = s.name();
    rep.machine["rows"] = std::move(jrows);
    rep.machine["set_distance"] = rho.to_string();

    rep.text = "scenario: " + scn.name + "\n" + "target: " + args.target + "\n" +
               "database: " + db_name + " (schema " + s.name() + ")\n" +
               format_table(table, "  ") + "set distance: " + rho.to_string() + "\n";
    return rep;
}

Report cmd_compare(const Scenario& scn, const std::string& target) {
    if (!scn.compare)
        throw std::invalid_argument("scenario '" + scn.name + "' has no compare section");
    const CompareOutcome out =
        compare_configs(scn.compare->first, scn.compare->second, scn.target(target), scn.catalog);

    Report rep;
    rep.machine["command"] = "compare";
    rep.machine["scenario"] = scn.name;
    rep.machine["target"] = target;
    rep.machine["d_min_1"] = out.d_min_1 ? json(out.d_min_1->to_string()) : json();
    rep.machine["d_min_2"] = out.d_min_2 ? json(out.d_min_2->to_string()) : json();
    const bool cont = out.verdict == CompareVerdict::ContinueWithConfig1;
    rep.machine["verdict"] = cont ? "continue-with-config-1" : "return";

    rep.text = "scenario: " + scn.name + "\n" + "target: " + target + "\n" +
               "d_min config 1: " + out.d_min_1->to_string() + "\n" +
               "d_min config 2: " + out.d_min_2->to_string() + "\n" +
               "verdict: " + (cont ? "continue-with-config-1" : "return") + "\n";
    if (cont) {
        const auto& chosen =
            scn.compare->first.successors[static_cast<std::size_t>(out.chosen_successor)];
        rep.machine["chosen_successor"] = out.chosen_successor + 1;
        rep.machine["chosen_probability"] = chosen.prob.to_string();
        rep.text += "chosen successor: " + std::to_string(out.chosen_successor + 1) +
                    " (p=" + chosen.prob.to_string() + ")\n";
    } else {
        rep.machine["chosen_successor"] = json();
    }
    return rep;
}

Report cmd_audit(const Scenario& scn, const AuditArgs& args) {
    if (!scn.mechanism)
        throw std::invalid_argument("scenario '" + scn.name + "' has no mechanism");
    const FiniteMechanism& m = *scn.mechanism;

    std::vector<AdjacencyKind> kinds = args.kinds;
    if (kinds.empty()) {
        kinds.push_back(AdjacencyKind::Unit);
        if (m.inputs_bound()) {
            kinds.push_back(AdjacencyKind::Hamming);
            kinds.push_back(AdjacencyKind::Rho);
        }
    }

    Report rep;
    rep.machine["command"] = "audit";
    rep.machine["scenario"] = scn.name;
    rep.machine["inputs"] = m.inputs().size();
    rep.machine["outputs"] = m.outputs().size();

    rep.text = "scenario: " + scn.name + "\n" + "mechanism: " +
               std::to_string(m.inputs().size()) + " inputs, " +
               std::to_string(m.outputs().size()) + " outputs\n";

    const AuditOutcome ldp = audit_ldp(m);
    rep.machine["ldp"] = audit_json(ldp);
    rep.text += "ldp: " + audit_line(ldp) + "\n";

    json jdp;
    for (const AdjacencyKind kind : kinds) {
        const AuditOutcome a = audit_dp(m, kind, scn.catalog);
        jdp[to_string(kind)] = audit_json(a);
        rep.text += "dp[" + to_string(kind) + "]: " + audit_line(a) + "\n";
    }
    rep.machine["dp"] = std::move(jdp);
    return rep;
}

}  // namespace privtrace
