#include "xsched/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "xsched/metrics.hpp"
#include "xsched/verify.hpp"

namespace xsched::cli {

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

ScenarioConfig load(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    return parse_config(in);
}

// Writes to a file, or to `out` when the path is "-" or empty.
bool emit(const std::string& path, const std::string& text, std::ostream& out, std::ostream& err) {
    if (path.empty() || path == "-") {
        out << text;
        return true;
    }
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) {
        err << "error: cannot write '" << path << "'\n";
        return false;
    }
    return true;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> axis(const std::optional<std::string>& list, double fallback) {
    if (!list) return {fallback};
    std::vector<double> out;
    for (const std::string& s : split(*list)) {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw ConfigError("bad axis value '" + s + "'");
        out.push_back(v);
    }
    return out;
}

void warn_all(const ScenarioConfig& c, std::ostream& err) {
    for (const std::string& w : validate(c)) err << "warning: " << w << "\n";
}

std::string dump_trajectories(const SimResult& res) {
    std::ostringstream o;
    o << "id,road,cooperative,t0,p0,v0,a,duration\n";
    for (const VehicleLog& v : res.vehicles)
        for (const Piece& p : v.trajectory.pieces())
            o << v.vehicle.id << ',' << v.vehicle.road << ',' << (v.vehicle.cooperative() ? 1 : 0)
              << ',' << num(p.t0) << ',' << num(p.p0) << ',' << num(p.v0) << ',' << num(p.a) << ','
              << num(p.duration) << '\n';
    return o.str();
}

struct Job {
    ScenarioConfig config;
    Policy policy;
};

struct Outcome {
    std::string row;
    std::vector<double> values;  // numeric summary fields from A onwards
};

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
    unsigned workers = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) body(k);
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
}

}  // namespace

std::string csv_header() {
    return "scenario_id,seed,policy,A,B,W,lambda_coop,lambda_noncoop,n_coop,n_noncoop,mean_cost_m,"
           "throughput_per_s,violations\n";
}

std::string csv_row(const SimResult& res) {
    std::size_t coop = 0, noncoop = 0;
    for (const VehicleLog& v : res.vehicles) (v.vehicle.cooperative() ? coop : noncoop)++;
    FleetStats st = fleet_stats(res);
    const ScenarioConfig& c = res.config;
    std::ostringstream o;
    o << c.scenario_id << ',' << c.seed << ',' << policy_name(res.policy) << ',' << num(c.range_A)
      << ',' << num(c.range_B) << ',' << c.window << ',' << num(c.lambda_coop) << ','
      << num(c.lambda_noncoop) << ',' << coop << ',' << noncoop << ','
      << num(st.count ? st.mean_cost : std::nan("")) << ',' << num(st.throughput) << ','
      << res.cooperative_violations() << '\n';
    return o.str();
}

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    ScenarioConfig c;
    Policy policy;
    try {
        c = load(opt.config_path);
        if (opt.seed) c.seed = *opt.seed;
        policy = parse_policy(opt.policy);
        warn_all(c, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    }
    Scenario sc = generate_scenario(c);
    std::string text = csv_header();
    std::size_t violations = 0;
    if (!sc.vehicles.empty()) {
        SimResult res = simulate(sc, policy);
        violations = res.cooperative_violations();
        text += csv_row(res);
        if (!opt.trajectories_path.empty() &&
            !emit(opt.trajectories_path, dump_trajectories(res), out, err))
            return usage;
        if (res.truncated) err << "warning: time cap reached with cooperative vehicles still inside\n";
    }
    if (!emit(opt.out_path, text, out, err)) return usage;
    return violations ? unsafe : ok;
}

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    std::vector<Job> jobs;
    std::size_t points = 0;
    try {
        ScenarioConfig base = load(opt.config_path);
        std::vector<double> As = axis(opt.A, base.range_A);
        std::vector<double> Ws = axis(opt.W, base.window);
        std::vector<double> lcs = axis(opt.lambda_coop, base.lambda_coop);
        std::vector<double> lns = axis(opt.lambda_noncoop, base.lambda_noncoop);
        std::vector<Policy> pols;
        for (const std::string& p : split(opt.policy)) pols.push_back(parse_policy(p));
        points = As.size() * Ws.size() * lcs.size() * lns.size() * pols.size();
        if (points == 0 || opt.replications == 0) {
            err << "error: empty sweep grid\n";
            return usage;
        }
        for (double A : As)
            for (double W : Ws)
                for (double lc : lcs)
                    for (double ln : lns)
                        for (Policy p : pols)
                            for (std::size_t r = 0; r < opt.replications; ++r) {
                                ScenarioConfig c = base;
                                c.range_A = A;
                                c.window = static_cast<int>(W);
                                if (c.window != W) throw ConfigError("W must be an integer");
                                c.lambda_coop = lc;
                                c.lambda_noncoop = ln;
                                c.seed = opt.seed + r;
                                validate(c);
                                jobs.push_back({c, p});
                            }
        warn_all(base, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return usage;
    }

    std::vector<Outcome> results(jobs.size());
    parallel_for(jobs.size(), opt.jobs, [&](std::size_t k) {
        Scenario sc = generate_scenario(jobs[k].config);
        SimResult res = simulate(sc, jobs[k].policy, EngineOptions{{}, true, false});
        Outcome& o = results[k];
        o.row = csv_row(res);
        FleetStats st = fleet_stats(res);
        std::size_t coop = 0;
        for (const VehicleLog& v : res.vehicles) coop += v.vehicle.cooperative();
        o.values = {static_cast<double>(coop), static_cast<double>(res.vehicles.size() - coop),
                    st.count ? st.mean_cost : std::nan(""), st.throughput,
                    static_cast<double>(res.cooperative_violations())};
    });

    std::ostringstream o;
    o << "row," << csv_header();
    std::size_t violations = 0;
    for (std::size_t g = 0; g < points; ++g) {
        const std::size_t first = g * opt.replications;
        for (std::size_t r = 0; r < opt.replications; ++r) {
            o << "run," << results[first + r].row;
            violations += static_cast<std::size_t>(results[first + r].values[4]);
        }
        std::vector<MeanSE> agg;
        for (std::size_t f = 0; f < 5; ++f) {
            std::vector<double> xs;
            for (std::size_t r = 0; r < opt.replications; ++r) {
                double x = results[first + r].values[f];
                if (!std::isnan(x)) xs.push_back(x);
            }
            agg.push_back(xs.empty() ? MeanSE{std::nan(""), std::nan("")} : mean_se(xs));
        }
        const Job& j = jobs[first];
        const ScenarioConfig& c = j.config;
        for (int which = 0; which < 2; ++which) {
            o << (which ? "se," : "mean,") << c.scenario_id << ",," << policy_name(j.policy) << ','
              << num(c.range_A) << ',' << num(c.range_B) << ',' << c.window << ','
              << num(c.lambda_coop) << ',' << num(c.lambda_noncoop);
            for (const MeanSE& m : agg) o << ',' << num(which ? m.se : m.mean);
            o << '\n';
        }
    }
    if (!emit(opt.out_path, o.str(), out, err)) return usage;
    return violations ? unsafe : ok;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, std::size_t n, std::ostream& out,
               std::ostream& err) {
    using namespace verify;
    std::vector<SuiteReport> reports;
    if (suite == "lemma1") reports.push_back(lemma1_suite(seed, n));
    else if (suite == "thm1") reports.push_back(convergence_suite(seed, n));
    else if (suite == "thm2") reports.push_back(safety_suite(seed, n));
    else if (suite == "thm3") reports.push_back(no_slowdown_suite(seed, n));
    else if (suite == "oracles") {
        reports.push_back(follow_oracle_suite(seed, n));
        reports.push_back(conflict_oracle_suite(seed, n));
        reports.push_back(integration_oracle_suite(seed, n));
    } else {
        err << "error: unknown suite '" << suite << "' (lemma1, thm1, thm2, thm3, oracles)\n";
        return usage;
    }
    bool all = true;
    for (const SuiteReport& r : reports) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: %zu instances, %zu failures, %.2f s: %s\n", r.suite.c_str(),
                      r.instances, r.failures, r.seconds, r.passed() ? "PASS" : "FAIL");
        out << buf;
        for (const std::string& c : r.counterexamples) out << "counterexample:\n" << c << "\n";
        all = all && r.passed();
    }
    return all ? ok : unsafe;
}

}  // namespace xsched::cli
