#include "xsched/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "xsched/metrics.hpp"
#include "xsched/safety.hpp"

namespace xsched::verify {

namespace {

using Clock = std::chrono::steady_clock;

double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

int pick(std::mt19937_64& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

void fail(SuiteReport& r, const std::string& what) {
    ++r.failures;
    if (r.counterexamples.size() < 3) r.counterexamples.push_back(what);
}

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Braking kinematics written out independently of the library.
VehicleState brake(VehicleState s, double from, double t, double a_dec) {
    double dt = std::max(0.0, t - from);
    double stop = s.velocity / a_dec;
    if (dt >= stop) return {s.position + s.velocity * stop / 2.0, 0.0};
    return {s.position + s.velocity * dt - a_dec * dt * dt / 2.0, s.velocity - a_dec * dt};
}

void throttle_step(double& p, double& v, double a, double vmax, double dt) {
    if (v >= vmax) {
        p += vmax * dt;
        return;
    }
    double ts = (vmax - v) / a;
    if (ts >= dt) {
        p += v * dt + a * dt * dt / 2.0;
        v += a * dt;
    } else {
        p += v * ts + a * ts * ts / 2.0 + vmax * (dt - ts);
        v = vmax;
    }
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0, double e = 0,
                double g = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d, e, g);
    return buf;
}

}  // namespace

Lemma1Instance random_lemma1_instance(std::mt19937_64& rng) {
    Lemma1Instance in;
    int R = pick(rng, 2, 3);
    int W = pick(rng, 2, 6);
    in.geo.roads = R;
    for (int r = 0; r < R; ++r) in.geo.extent.push_back(uniform(rng, 4.0, 7.0));
    in.params.window = W;
    in.params.length = 5.0;
    in.params.delta = uniform(rng, 5.0, 12.0);
    const double gap = in.params.spacing();

    int ego_road = pick(rng, 0, R - 1);
    double ego_live = uniform(rng, -800.0, -300.0);
    double ego_c = centered(ego_live, ego_road, in.geo);

    struct M {
        int road;
        double P;
    };
    std::vector<M> ms;
    double c = ego_c + uniform(rng, 0.01, 30.0);
    int road = pick(rng, 0, R - 1);
    ms.push_back({road, c + in.geo.extent[static_cast<std::size_t>(road)] / 2.0});
    int others = pick(rng, 1, W - 1);
    for (int k = 1; k < others; ++k) {
        int r = pick(rng, 0, R - 1);
        const M& prev = ms.back();
        double need = gap + (r != prev.road ? in.geo.extent[static_cast<std::size_t>(r)] : 0.0);
        ms.push_back({r, prev.P + need + uniform(rng, 0.0, 20.0)});
    }

    VehicleId id = 1;
    std::optional<double> front;
    for (const M& m : ms) {
        in.entries.push_back({id, m.road, m.P, m.P});
        in.info.members.push_back(id);
        in.info.eq_pos[id] = m.P;
        if (m.road == ego_road && (!front || m.P < *front)) front = m.P;
        ++id;
    }
    in.entries.push_back({0, ego_road, ego_live, ego_live});
    in.info.ego = 0;
    in.info.members.push_back(0);
    std::sort(in.info.members.begin(), in.info.members.end());
    in.info.eq_pos[0] = front ? std::min(ego_live, *front - gap) : ego_live;
    return in;
}

std::string describe(const Lemma1Instance& in) {
    std::ostringstream o;
    o.precision(17);
    o << "spacing=" << in.params.spacing() << " extents=";
    for (double d : in.geo.extent) o << d << ";";
    for (const FleetEntry& e : in.entries)
        o << " [id=" << e.id << " road=" << e.road << " live=" << e.position
          << " P=" << in.info.eq_pos.at(e.id) << "]";
    return o.str();
}

Scenario separated_fleet(std::mt19937_64& rng, std::size_t n) {
    ScenarioConfig c;
    c.scenario_id = "separated";
    c.range_A = 0.0;
    c.range_B = 200.0;
    c.lambda_coop = 0.0;
    c.lambda_noncoop = 0.0;
    c.jitter = false;
    c.seed = rng();
    Scenario sc = generate_scenario(c);
    const double slack = no_slowdown_slack(c);
    double t = uniform(rng, 0.0, 1.0);
    int prev_road = -1;
    for (std::size_t k = 0; k < n; ++k) {
        int road = pick(rng, 0, c.roads - 1);
        if (k > 0) {
            double need = c.length + slack +
                          (road != prev_road ? sc.geometry.zone_extent(prev_road) : 0.0);
            t += need / c.v_max + uniform(rng, 0.0, 0.5);
        }
        ScenarioVehicle sv;
        sv.vehicle.id = static_cast<VehicleId>(k);
        sv.vehicle.road = road;
        sv.vehicle.limits = c.limits();
        sv.vehicle.spawn_time = t;
        sv.vehicle.initial_position = -c.range_B;
        sc.vehicles.push_back(sv);
        prev_road = road;
    }
    return sc;
}

ScenarioConfig convergence_config(std::mt19937_64& rng) {
    ScenarioConfig c;
    c.scenario_id = "convergence";
    c.range_A = 1200.0;
    c.range_B = 200.0;
    c.window = pick(rng, 2, 6);
    c.lambda_coop = uniform(rng, 0.3, 0.8);
    c.lambda_noncoop = 0.0;
    c.horizon = uniform(rng, 10.0, 30.0);
    c.seed = rng() >> 1;
    return c;
}

ScenarioConfig mixed_config(std::mt19937_64& rng, int kind) {
    ScenarioConfig c;
    c.scenario_id = "mixed";
    c.range_A = pick(rng, 0, 1) ? 200.0 : 0.0;
    c.range_B = 200.0;
    c.lambda_coop = uniform(rng, 0.4, 1.2);
    c.lambda_noncoop = uniform(rng, 0.0, 0.3);
    c.behavior = static_cast<NoncoopBehavior>(kind % 3);
    c.horizon = 30.0;
    c.seed = rng() >> 1;
    return c;
}

double dense_follow_margin(VehicleState cand, double T, const Observation& pred, double clearance,
                           const KinematicLimits& lim, double dt) {
    const double am = lim.a_dec, aM = lim.a_acc, vm = lim.v_max;
    double stop_i = T + cand.velocity / am;
    double stop_j = pred.stamp + pred.state.velocity / am;
    double end = std::max({T, stop_i, stop_j});
    std::vector<double> tds;
    for (double x = T; x <= end + dt; x += dt) tds.push_back(x);
    if (stop_i > T) tds.push_back(stop_i);
    if (stop_j > T) tds.push_back(stop_j);
    std::sort(tds.begin(), tds.end());

    double prefix = kInf;
    double best = kInf;
    for (double td : tds) {
        VehicleState i = brake(cand, T, td, am);
        VehicleState j = brake(pred.state, pred.stamp, td, am);
        prefix = std::min(prefix, j.position - i.position - clearance);
        double m = prefix;
        double pi = i.position, vi = i.velocity, pj = j.position, vj = j.velocity;
        while (vi < vm || vj < vm) {
            throttle_step(pi, vi, aM, vm, dt);
            throttle_step(pj, vj, aM, vm, dt);
            m = std::min(m, pj - pi - clearance);
        }
        best = std::min(best, m);
    }
    return best;
}

double sampled_overlap_margin(const Trajectory& ti, const Trajectory& tj, bool same_road,
                              double d_ri, double d_rj, double l_i, double l_j, double t_lo,
                              double t_hi, double dt) {
    auto margin = [&](double t) {
        double pi = ti.evaluate(t).position, pj = tj.evaluate(t).position;
        if (same_road) {
            double lo = std::max({pi - l_i, pj - l_j, 0.0});
            double hi = std::min({pi, pj, d_ri});
            return hi - lo;
        }
        return std::min({pi, l_i + d_ri - pi, pj, l_j + d_rj - pj});
    };
    double best = -kInf, at = t_lo;
    for (double t = t_lo; t <= t_hi; t += dt) {
        double m = margin(t);
        if (m > best) {
            best = m;
            at = t;
        }
    }
    double a = std::max(t_lo, at - dt), b = std::min(t_hi, at + dt);
    for (int it = 0; it < 80; ++it) {
        double x1 = a + (b - a) * 0.382, x2 = a + (b - a) * 0.618;
        if (margin(x1) < margin(x2)) a = x1;
        else b = x2;
    }
    return std::max(best, margin(0.5 * (a + b)));
}

VehicleState integrate(VehicleState s0, const std::vector<Segment>& segs, double t,
                       const KinematicLimits& lim, double dt) {
    double p = s0.position, v = s0.velocity, now = 0.0;
    std::size_t k = 0;
    double seg_end = segs.empty() ? kInf : segs[0].duration;
    while (now < t - 1e-15) {
        double a = k < segs.size() ? segs[k].acceleration : 0.0;
        double h = std::min({dt, t - now, seg_end - now});
        double v1 = std::clamp(v + a * h, 0.0, lim.v_max);
        p += 0.5 * (v + v1) * h;
        v = v1;
        now += h;
        if (now >= seg_end - 1e-15 && k < segs.size()) {
            ++k;
            seg_end = k < segs.size() ? seg_end + segs[k].duration : kInf;
        }
    }
    return {p, v};
}

SuiteReport lemma1_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "lemma1";
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
        Lemma1Instance in = random_lemma1_instance(rng);
        FleetSnapshot snap(in.entries, in.geo.roads);
        double solved = solve_order_opt(in.info, snap, in.params, in.geo).target.at(in.info.ego);
        double closed = lemma1_closed_form(in.info, snap, in.params, in.geo);
        ++r.instances;
        if (std::abs(solved - closed) > 1e-9)
            fail(r, fmt("solver %.17g closed form %.17g: ", solved, closed) + describe(in));
    }
    r.seconds = elapsed(t0);
    return r;
}

SuiteReport convergence_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "thm1";
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
        ScenarioConfig c = convergence_config(rng);
        Scenario sc = generate_scenario(c);
        std::size_t coop = 0;
        for (const ScenarioVehicle& sv : sc.vehicles) coop += sv.vehicle.cooperative();
        while (coop > 20) {
            c.horizon = sc.vehicles[19].vehicle.spawn_time;
            sc = generate_scenario(c);
            coop = sc.vehicles.size();
        }
        EngineOptions opt;
        opt.record_decisions = false;
        SimResult res = simulate(sc, Policy::two_stage, opt);
        ++r.instances;
        const double full = c.v_max * sc.long_range.epoch_gap;
        std::string bad;
        for (const VehicleLog& v : res.vehicles) {
            if (v.handoff_slack < -1e-6)
                bad += fmt(" separation slack %.9g at hand-off of vehicle %g;", v.handoff_slack,
                           v.vehicle.id);
            const EpochRecord* last = nullptr;
            for (const EpochRecord& e : res.epochs)
                if (e.id == v.vehicle.id) last = &e;
            if (!last) bad += fmt(" vehicle %g never planned;", v.vehicle.id);
            else if (std::abs(last->displacement - full) > 1e-6)
                bad += fmt(" vehicle %g last epoch displacement %.9g;", v.vehicle.id, last->displacement);
        }
        if (!res.violations.empty()) bad += " safety violation;";
        if (!bad.empty()) fail(r, bad + "\n" + to_config_text(c));
    }
    r.seconds = elapsed(t0);
    return r;
}

SuiteReport safety_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "thm2";
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
        ScenarioConfig c = mixed_config(rng, static_cast<int>(k));
        Scenario sc = generate_scenario(c);
        EngineOptions opt;
        opt.record_decisions = false;
        SimResult res = simulate(sc, Policy::two_stage, opt);
        ++r.instances;
        if (!res.violations.empty()) {
            const Violation& v = res.violations.front();
            fail(r, fmt("%g violations, first between %g and %g at t=%.6f\n",
                        static_cast<double>(res.violations.size()), v.first, v.second, v.time) +
                        to_config_text(c));
        }
    }
    r.seconds = elapsed(t0);
    return r;
}

SuiteReport no_slowdown_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "thm3";
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t count = static_cast<std::size_t>(pick(rng, 5, 20));
        Scenario sc = separated_fleet(rng, count);
        SimResult res = simulate(sc, Policy::two_stage);
        ++r.instances;
        std::string bad;
        const double vm = sc.config.v_max;
        for (const VehicleLog& v : res.vehicles) {
            double from = v.handoff_time;
            double to = v.trajectory.time_at_position(0.0);
            for (double t = from; t <= to; t += 0.01) {
                double vel = v.trajectory.evaluate(t).velocity;
                if (std::abs(vel - vm) > 1e-9) {
                    bad += fmt(" vehicle %g at t=%.3f has v=%.12g;", v.vehicle.id, t, vel);
                    break;
                }
            }
            double c0 = relative_cost(v.vehicle, v.trajectory, from - v.vehicle.spawn_time);
            double c1 = relative_cost(v.vehicle, v.trajectory, v.clearance_time - v.vehicle.spawn_time);
            if (!(std::abs(c1 - c0) <= 1e-6))
                bad += fmt(" vehicle %g cost increment %.9g;", v.vehicle.id, c1 - c0);
        }
        if (!bad.empty()) {
            std::ostringstream o;
            o.precision(17);
            for (const ScenarioVehicle& sv : sc.vehicles)
                o << " [id=" << sv.vehicle.id << " road=" << sv.vehicle.road
                  << " spawn=" << sv.vehicle.spawn_time << "]";
            fail(r, bad + "\nfleet:" + o.str() + "\n" + to_config_text(sc.config));
        }
    }
    r.seconds = elapsed(t0);
    return r;
}

SuiteReport follow_oracle_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "follow_oracle";
    std::mt19937_64 rng(seed);
    KinematicLimits lim;
    for (std::size_t k = 0; k < n; ++k) {
        double L = pick(rng, 0, 1) ? 5.0 : 10.0;
        Observation pred{1, {uniform(rng, -60.0, 15.0), uniform(rng, 0.0, lim.v_max)}, 0.0};
        double T = uniform(rng, 0.0, 0.2);
        double v = uniform(rng, 0.0, lim.v_max);
        double p = pred.state.position - L - uniform(rng, -5.0, 40.0);
        if (pick(rng, 0, 3) != 0) p = std::min(p, -v * v / (2.0 * lim.a_dec));
        VehicleState cand{p, v};
        PredecessorView view{pred, L};
        double exact = follow_margin(cand, T, pred, L, lim);
        double dense = dense_follow_margin(cand, T, pred, L, lim);
        bool member = f_fol_member(cand, T, &view, lim);
        bool oracle = !(stop_envelope(cand, lim) > 0.0) && dense >= -1e-9;
        ++r.instances;
        if (member != oracle && std::abs(exact) > 1e-6)
            fail(r, fmt("cand (%.17g, %.17g) at T=%.17g pred (%.17g, %.17g) L=%g: ", p, v, T,
                        pred.state.position, pred.state.velocity, L) +
                        fmt("analytic %.9g dense %.9g", exact, dense));
    }
    r.seconds = elapsed(t0);
    return r;
}

SuiteReport conflict_oracle_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "conflict_oracle";
    std::mt19937_64 rng(seed);
    KinematicLimits lim;
    auto random_traj = [&](double start) {
        std::vector<Segment> segs;
        for (int s = 0; s < 4; ++s)
            segs.push_back({uniform(rng, 0.3, 2.5), uniform(rng, -lim.a_dec, lim.a_acc)});
        segs.push_back({kInf, lim.a_acc});
        VehicleState s0{uniform(rng, -40.0, 0.0) + start, uniform(rng, 2.0, lim.v_max)};
        return Trajectory(0.0, s0, segs, lim);
    };
    for (std::size_t k = 0; k < n; ++k) {
        bool same = pick(rng, 0, 1) == 1;
        double d1 = uniform(rng, 4.0, 7.0), d2 = same ? d1 : uniform(rng, 4.0, 7.0);
        Trajectory a = random_traj(0.0), b = random_traj(uniform(rng, -15.0, 0.0));
        const double horizon = 15.0;
        bool analytic = same ? same_road_conflict(a, b, d1, lim.length, lim.length, horizon)
                             : cross_road_conflict(a, b, d1, d2, lim.length, lim.length, horizon);
        double m = sampled_overlap_margin(a, b, same, d1, d2, lim.length, lim.length, 0.0, horizon);
        bool oracle = m > 1e-9;
        ++r.instances;
        if (analytic != oracle && std::abs(m) > 1e-6)
            fail(r, fmt("pair %g same_road=%g analytic=%g sampled margin %.9g", static_cast<double>(k),
                        same, analytic, m));
    }
    r.seconds = elapsed(t0);
    return r;
}

SuiteReport integration_oracle_suite(std::uint64_t seed, std::size_t n) {
    auto t0 = Clock::now();
    SuiteReport r;
    r.suite = "integration_oracle";
    std::mt19937_64 rng(seed);
    KinematicLimits lim;
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<Segment> segs;
        int m = pick(rng, 1, 12);
        for (int s = 0; s < m; ++s)
            segs.push_back({uniform(rng, 0.1, 100.0 / m), uniform(rng, -lim.a_dec, lim.a_acc)});
        VehicleState s0{uniform(rng, -100.0, 0.0), uniform(rng, 0.0, lim.v_max)};
        Trajectory tr(0.0, s0, segs, lim);
        double total = 0.0;
        for (const Segment& s : segs) total += s.duration;
        double t = uniform(rng, 0.5, 1.0) * std::max(total, 100.0);
        VehicleState exact = tr.evaluate(t);
        VehicleState num = integrate(s0, segs, t, lim);
        ++r.instances;
        if (std::abs(exact.position - num.position) > 1e-6 ||
            std::abs(exact.velocity - num.velocity) > 1e-6)
            fail(r, fmt("t=%.6f evaluate (%.9g, %.9g) integrated (%.9g, %.9g)", t, exact.position,
                        exact.velocity, num.position, num.velocity));
    }
    r.seconds = elapsed(t0);
    return r;
}

}  // namespace xsched::verify
