#include <iostream>

#include "CLI11.hpp"
#include "xsched/cli.hpp"

int main(int argc, char** argv) {
    using namespace xsched::cli;
    CLI::App app{"Intersection scheduling simulator"};
    app.require_subcommand(1);

    RunOptions run;
    std::uint64_t run_seed = 0;
    auto* r = app.add_subcommand("run", "Simulate one scenario and write a summary CSV");
    r->add_option("config", run.config_path, "Scenario config file (defaults if omitted)");
    auto* seed_opt = r->add_option("--seed", run_seed, "Override the config seed");
    r->add_option("--policy", run.policy, "two_stage or baseline");
    r->add_option("-o,--out", run.out_path, "Summary CSV path, - for stdout");
    r->add_option("--trajectories", run.trajectories_path, "Write trajectory pieces to this CSV");

    SweepOptions sweep;
    std::string A, W, lc, ln;
    auto* s = app.add_subcommand("sweep", "Run a parameter grid with replications");
    s->add_option("--config", sweep.config_path, "Base scenario config");
    auto* oA = s->add_option("--A", A, "Comma-separated long-horizon ranges");
    auto* oW = s->add_option("--W", W, "Comma-separated window sizes");
    auto* oc = s->add_option("--lambda-coop", lc, "Comma-separated cooperative rates");
    auto* on = s->add_option("--lambda-noncoop", ln, "Comma-separated non-cooperative rates");
    s->add_option("--policy", sweep.policy, "Comma-separated policies");
    s->add_option("--replications", sweep.replications, "Seeds per grid point");
    s->add_option("--seed", sweep.seed, "Base seed; replication r uses seed + r");
    s->add_option("-o,--out", sweep.out_path, "CSV path, - for stdout");
    s->add_option("-j,--jobs", sweep.jobs, "Worker threads (0: all cores)");

    std::string suite;
    std::uint64_t vseed = 1;
    std::size_t n = 100;
    auto* v = app.add_subcommand("verify", "Run a property suite");
    v->add_option("suite", suite, "lemma1, thm1, thm2, thm3 or oracles")->required();
    v->add_option("--seed", vseed, "Suite seed");
    v->add_option("-n", n, "Number of random instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : usage;
    }

    if (r->parsed()) {
        if (*seed_opt) run.seed = run_seed;
        return cmd_run(run, std::cout, std::cerr);
    }
    if (s->parsed()) {
        if (*oA) sweep.A = A;
        if (*oW) sweep.W = W;
        if (*oc) sweep.lambda_coop = lc;
        if (*on) sweep.lambda_noncoop = ln;
        return cmd_sweep(sweep, std::cout, std::cerr);
    }
    return cmd_verify(suite, vseed, n, std::cout, std::cerr);
}
