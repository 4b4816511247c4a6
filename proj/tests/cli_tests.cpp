// End-to-end checks of the command-line binary: exit codes and byte-exact
// output against golden files. Regenerate goldens with
// PRIVTRACE_REGEN_GOLDEN=1 after an intentional format change.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_cli, g_scenarios, g_golden, g_scratch;
int g_failures = 0;
bool g_regen = false;

void report(const std::string& name, bool ok, const std::string& why = "") {
    std::printf("%s  %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), why.empty() ? "" : ": ",
                why.c_str());
    if (!ok) ++g_failures;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Result {
    int exit_code;
    std::string out;
};

Result run_cli(const std::string& name, const std::string& args) {
    const std::string out_path = g_scratch + "/" + name + ".out";
    const std::string cmd = g_cli + " " + args + " > " + out_path + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return Result{code, read_file(out_path)};
}

void golden_case(const std::string& name, const std::string& args, int want_exit) {
    const Result r = run_cli(name, args);
    if (r.exit_code != want_exit) {
        report(name, false,
               "exit code " + std::to_string(r.exit_code) + ", want " + std::to_string(want_exit));
        return;
    }
    const std::string golden_path = g_golden + "/" + name + ".golden";
    if (g_regen) {
        std::ofstream(golden_path, std::ios::binary) << r.out;
        report(name, true, "regenerated");
        return;
    }
    const std::string want = read_file(golden_path);
    if (want.empty()) {
        report(name, false, "missing golden file " + golden_path);
        return;
    }
    report(name, r.out == want, r.out == want ? "" : "output differs from " + golden_path);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 5) {
        std::fprintf(stderr, "usage: cli_tests <cli> <scenario-dir> <golden-dir> <scratch-dir>\n");
        return 2;
    }
    g_cli = argv[1];
    g_scenarios = argv[2];
    g_golden = argv[3];
    g_scratch = argv[4];
    g_regen = std::getenv("PRIVTRACE_REGEN_GOLDEN") != nullptr;
    if (std::system(("mkdir -p " + g_scratch).c_str()) != 0) return 2;

    const std::string hospital = g_scenarios + "/hospital.scn";
    const std::string bank = g_scenarios + "/bank.scn";
    const std::string audit = g_scenarios + "/record_audit.scn";
    const std::string rr = g_scenarios + "/randomized_response.scn";

    golden_case("run_hospital", "run " + hospital, 2);
    golden_case("run_hospital_machine", "run " + hospital + " --format machine", 2);
    golden_case("run_bank", "run " + bank, 2);
    golden_case("run_bank_cut", "run " + bank + " --drop-external statement", 0);
    golden_case("distance_hospital", "distance " + hospital, 0);
    golden_case("compare_hospital", "compare " + hospital, 0);
    golden_case("audit_record", "audit " + audit + " --adjacency rho --adjacency hamming", 0);
    golden_case("audit_record_machine",
                "audit " + audit + " --adjacency rho --adjacency hamming --format machine", 0);
    golden_case("audit_rr", "audit " + rr, 0);
    golden_case("run_hospital_sampled", "run " + hospital + " --sample 2000 --seed 7", 2);

    // Identical invocations must be byte-identical.
    {
        const Result a = run_cli("repeat_a", "run " + hospital);
        const Result b = run_cli("repeat_b", "run " + hospital);
        report("byte_identical_repeat", a.out == b.out && a.exit_code == b.exit_code);
    }

    // The closure override changes the parsed intervals, hence the distances.
    {
        const Result half = run_cli("closure_half", "distance " + hospital);
        const Result closed =
            run_cli("closure_closed", "distance " + hospital + " --interval-closure closed");
        report("closure_override", half.exit_code == 0 && closed.exit_code == 0 &&
                                       half.out != closed.out);
    }

    // Usage and parse failures exit 1.
    {
        const Result bad = run_cli("bad_file", "run /nonexistent.scn");
        report("missing_file_exits_1", bad.exit_code == 1);
        const std::string broken = g_scratch + "/broken.scn";
        std::ofstream(broken) << "[schema s]\ncolumn Name nominal identifier\n[script]\nstep\nbranch p=1/2\n";
        const Result parse = run_cli("bad_parse", "run " + broken);
        report("parse_error_exits_1", parse.exit_code == 1);
        const Result usage = run_cli("bad_usage", "frobnicate " + hospital);
        report("bad_subcommand_rejected", usage.exit_code != 0);
    }

    std::printf("%s\n", g_failures == 0 ? "cli_tests: all passed" : "cli_tests: FAILURES");
    return g_failures;
}
