#include "xsched/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

namespace xsched {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::string t = trim(v);
    if (t == "inf" || t == "+inf") return kInf;
    double out = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ConfigError("key '" + key + "': not a number: '" + t + "'");
    return out;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
    std::string t = trim(v);
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size() || t[0] == '-')
        throw ConfigError("key '" + key + "': not an unsigned integer: '" + t + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    double d = to_double(key, v);
    if (!std::isfinite(d) || d != std::floor(d))
        throw ConfigError("key '" + key + "': not an integer: '" + trim(v) + "'");
    return static_cast<long long>(d);
}

std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double jittered(double x, std::mt19937_64& rng, bool on) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double e = u(rng);  // always drawn so streams do not depend on the flag
    return on ? x * (1.0 + 1e-6 * e) : x;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

}  // namespace

const char* behavior_name(NoncoopBehavior b) {
    switch (b) {
        case NoncoopBehavior::constant_speed: return "constant_speed";
        case NoncoopBehavior::braking_pulse: return "braking_pulse";
        case NoncoopBehavior::random_bounded: return "random_bounded";
        case NoncoopBehavior::mixed: return "mixed";
    }
    return "?";
}

NoncoopBehavior parse_behavior(const std::string& s) {
    for (auto b : {NoncoopBehavior::constant_speed, NoncoopBehavior::braking_pulse,
                   NoncoopBehavior::random_bounded, NoncoopBehavior::mixed})
        if (s == behavior_name(b)) return b;
    throw ConfigError("unknown noncoop_behavior '" + s + "'");
}

double no_slowdown_slack(const ScenarioConfig& c) {
    return c.v_max * (c.tau + c.mu) * (1.0 + c.a_dec / c.a_acc);
}

double ScenarioConfig::slack() const { return delta ? *delta : no_slowdown_slack(*this); }

double ScenarioConfig::observation_delay() const { return noncoop_delay ? *noncoop_delay : tau; }

double handoff_bound(const ScenarioConfig& c) {
    double dmax = c.extent.empty() ? 0.0 : *std::max_element(c.extent.begin(), c.extent.end());
    return c.v_max * c.v_max / c.a_dec + c.v_max * c.v_max / (2.0 * c.a_acc) + c.length + dmax;
}

std::vector<std::string> validate(const ScenarioConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    need(c.roads >= 2, "roads must be at least 2");
    need(static_cast<int>(c.extent.size()) == c.roads, "d must list one extent per road");
    for (double d : c.extent) need(d > 0.0 && std::isfinite(d), "zone extents must be positive");
    need(c.length > 0.0, "l must be positive");
    need(c.v_max > 0.0 && c.a_dec > 0.0 && c.a_acc > 0.0, "v_max, a_dec and a_acc must be positive");
    need(c.v_reduction > 0.0 && c.v_reduction < c.v_max, "v_R must lie in (0, v_max)");
    need(c.range_A >= 0.0 && c.range_B > 0.0, "A must be >= 0 and B > 0");
    need(c.window >= 1 && c.window <= 10, "W must lie in [1, 10]");
    need(c.tau > 0.0 && c.mu > 0.0, "tau and mu must be positive");
    need(c.epoch_gap > 0.0 && c.tick_gap > 0.0, "epoch_gap and tick_gap must be positive");
    need(c.tick_gap <= c.mu + 1e-12, "tick_gap must not exceed mu");
    need(c.lambda_coop >= 0.0 && c.lambda_noncoop >= 0.0, "arrival rates must be non-negative");
    need(c.horizon > 0.0 && std::isfinite(c.horizon), "horizon must be positive");
    need(c.drain >= 0.0, "drain must be non-negative");
    need(c.slack() > -c.length, "delta must exceed -l");
    need(c.observation_delay() >= 0.0, "noncoop_delay must be non-negative");
    LongHorizonParams lh{c.range_A, c.window, c.length, c.slack(), c.v_reduction, c.epoch_gap};
    need(epoch_profile_feasible(lh, c.limits()),
         "epoch_gap too short to realise the v_R slowdown within one epoch");
    std::vector<std::string> warn;
    double bound = handoff_bound(c);
    if (c.range_B < bound) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "B = %g is below the safe hand-off bound %.6g; cooperative safety is not guaranteed",
                      c.range_B, bound);
        warn.emplace_back(buf);
    }
    if (c.slack() < no_slowdown_slack(c) - 1e-12)
        warn.emplace_back("delta is below the no-slowdown slack; followers may brake");
    return warn;
}

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig c;
    bool extent_set = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "scenario_id") c.scenario_id = val;
        else if (key == "roads") c.roads = static_cast<int>(to_int(key, val));
        else if (key == "d") {
            c.extent.clear();
            std::stringstream ss(val);
            std::string item;
            while (std::getline(ss, item, ',')) c.extent.push_back(to_double(key, item));
            extent_set = true;
        } else if (key == "l") c.length = to_double(key, val);
        else if (key == "v_max") c.v_max = to_double(key, val);
        else if (key == "a_dec") c.a_dec = to_double(key, val);
        else if (key == "a_acc") c.a_acc = to_double(key, val);
        else if (key == "v_R") c.v_reduction = to_double(key, val);
        else if (key == "A") c.range_A = to_double(key, val);
        else if (key == "B") c.range_B = to_double(key, val);
        else if (key == "W") c.window = static_cast<int>(to_int(key, val));
        else if (key == "delta") c.delta = to_double(key, val);
        else if (key == "tau") c.tau = to_double(key, val);
        else if (key == "mu") c.mu = to_double(key, val);
        else if (key == "epoch_gap") c.epoch_gap = to_double(key, val);
        else if (key == "tick_gap") c.tick_gap = to_double(key, val);
        else if (key == "lambda_coop") c.lambda_coop = to_double(key, val);
        else if (key == "lambda_noncoop") c.lambda_noncoop = to_double(key, val);
        else if (key == "noncoop_behavior") c.behavior = parse_behavior(val);
        else if (key == "horizon") c.horizon = to_double(key, val);
        else if (key == "seed") c.seed = to_seed(key, val);
        else if (key == "noncoop_delay") c.noncoop_delay = to_double(key, val);
        else if (key == "noncoop_window") c.noncoop_window = to_double(key, val);
        else if (key == "jitter") c.jitter = to_int(key, val) != 0;
        else if (key == "drain") c.drain = to_double(key, val);
        else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    // A single extent applies to every road.
    if (extent_set && c.extent.size() == 1 && c.roads > 1)
        c.extent.assign(static_cast<std::size_t>(c.roads), c.extent.front());
    if (!extent_set) c.extent.assign(static_cast<std::size_t>(std::max(c.roads, 0)), 5.0);
    return c;
}

ScenarioConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string to_config_text(const ScenarioConfig& c) {
    std::ostringstream o;
    o << "scenario_id = " << c.scenario_id << "\n";
    o << "roads = " << c.roads << "\n";
    o << "d = ";
    for (std::size_t k = 0; k < c.extent.size(); ++k) o << (k ? "," : "") << num(c.extent[k]);
    o << "\n";
    o << "l = " << num(c.length) << "\n";
    o << "v_max = " << num(c.v_max) << "\n";
    o << "a_dec = " << num(c.a_dec) << "\n";
    o << "a_acc = " << num(c.a_acc) << "\n";
    o << "v_R = " << num(c.v_reduction) << "\n";
    o << "A = " << num(c.range_A) << "\n";
    o << "B = " << num(c.range_B) << "\n";
    o << "W = " << c.window << "\n";
    if (c.delta) o << "delta = " << num(*c.delta) << "\n";
    o << "tau = " << num(c.tau) << "\n";
    o << "mu = " << num(c.mu) << "\n";
    o << "epoch_gap = " << num(c.epoch_gap) << "\n";
    o << "tick_gap = " << num(c.tick_gap) << "\n";
    o << "lambda_coop = " << num(c.lambda_coop) << "\n";
    o << "lambda_noncoop = " << num(c.lambda_noncoop) << "\n";
    o << "noncoop_behavior = " << behavior_name(c.behavior) << "\n";
    o << "horizon = " << num(c.horizon) << "\n";
    o << "seed = " << c.seed << "\n";
    if (c.noncoop_delay) o << "noncoop_delay = " << num(*c.noncoop_delay) << "\n";
    o << "noncoop_window = " << num(c.noncoop_window) << "\n";
    o << "jitter = " << (c.jitter ? 1 : 0) << "\n";
    o << "drain = " << num(c.drain) << "\n";
    return o.str();
}

Scenario generate_scenario(const ScenarioConfig& c) {
    validate(c);
    Scenario sc;
    sc.config = c;
    auto shared = stream(c.seed, 1);
    sc.geometry.roads = c.roads;
    sc.geometry.range_A = c.range_A;
    sc.geometry.range_B = c.range_B;
    for (double d : c.extent) sc.geometry.extent.push_back(jittered(d, shared, c.jitter));
    double spacing = jittered(c.length + c.slack(), shared, c.jitter);
    sc.long_range = {c.range_A, c.window, c.length, spacing - c.length, c.v_reduction,
                     jittered(c.epoch_gap, shared, c.jitter)};

    const KinematicLimits lim = c.limits();
    const double entry = -c.range_A - c.range_B;
    std::vector<ScenarioVehicle> all;

    auto coop_rng = stream(c.seed, 2);
    std::exponential_distribution<double> gap_dist(c.lambda_coop > 0 ? c.lambda_coop : 1.0);
    std::uniform_int_distribution<int> road_dist(0, c.roads - 1);
    std::vector<std::optional<std::pair<double, double>>> last(static_cast<std::size_t>(c.roads));
    if (c.lambda_coop > 0.0) {
        for (double t = gap_dist(coop_rng); t <= c.horizon; t += gap_dist(coop_rng)) {
            ScenarioVehicle sv;
            sv.vehicle.road = road_dist(coop_rng);
            sv.vehicle.kind = VehicleKind::cooperative;
            sv.vehicle.limits = lim;
            sv.vehicle.spawn_time = t;
            double p = jittered(entry, coop_rng, c.jitter);
            // Keep same-road cooperative vehicles one spacing apart at spawn.
            auto& prev = last[static_cast<std::size_t>(sv.vehicle.road)];
            if (prev) {
                double ideal = prev->second + c.v_max * (t - prev->first);
                p = std::min(p, ideal - spacing);
            }
            prev = std::make_pair(t, p);
            sv.vehicle.initial_position = p;
            all.push_back(sv);
        }
    }

    auto nc_rng = stream(c.seed, 3);
    if (c.lambda_noncoop > 0.0) {
        double period = 1.0 / c.lambda_noncoop;
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        int kinds = 0;
        for (double t = period * u01(nc_rng); t <= c.horizon; t += period, ++kinds) {
            ScenarioVehicle sv;
            sv.vehicle.road = road_dist(nc_rng);
            sv.vehicle.kind = VehicleKind::noncooperative;
            sv.vehicle.limits = lim;
            sv.vehicle.spawn_time = t;
            sv.vehicle.initial_position = jittered(entry, nc_rng, c.jitter);
            NoncoopPlan& plan = sv.plan;
            plan.kind = c.behavior;
            if (c.behavior == NoncoopBehavior::mixed)
                plan.kind = static_cast<NoncoopBehavior>(std::uniform_int_distribution<int>(0, 2)(nc_rng));
            plan.window_start = -c.noncoop_window;
            plan.trigger_position = std::uniform_real_distribution<double>(-c.noncoop_window, 0.0)(nc_rng);
            plan.pulse_duration = std::uniform_real_distribution<double>(0.5, 6.0)(nc_rng);
            plan.stream = nc_rng();
            all.push_back(sv);
        }
    }

    std::stable_sort(all.begin(), all.end(), [](const ScenarioVehicle& a, const ScenarioVehicle& b) {
        if (a.vehicle.spawn_time != b.vehicle.spawn_time) return a.vehicle.spawn_time < b.vehicle.spawn_time;
        return a.vehicle.cooperative() && !b.vehicle.cooperative();
    });
    for (std::size_t k = 0; k < all.size(); ++k) all[k].vehicle.id = static_cast<VehicleId>(k);
    sc.vehicles = std::move(all);
    return sc;
}

double noncoop_policy_step(const NoncoopPlan& plan, VehicleState s, double pulse_start, double t,
                           std::mt19937_64& rng, const KinematicLimits& lim) {
    switch (plan.kind) {
        case NoncoopBehavior::constant_speed:
            return 0.0;
        case NoncoopBehavior::braking_pulse:
            if (!std::isfinite(pulse_start)) return s.position >= plan.trigger_position ? -lim.a_dec : 0.0;
            return t < pulse_start + plan.pulse_duration ? -lim.a_dec : lim.a_acc;
        case NoncoopBehavior::random_bounded:
            if (s.position < plan.window_start) return 0.0;
            return std::uniform_real_distribution<double>(-lim.a_dec, lim.a_acc)(rng);
        case NoncoopBehavior::mixed:
            break;
    }
    throw std::logic_error("mixed behaviour must be resolved per vehicle");
}

Trajectory noncoop_trajectory(const ScenarioVehicle& sv, const Scenario& sc) {
    const Vehicle& v = sv.vehicle;
    const KinematicLimits& lim = v.limits;
    const double dt = sc.config.tick_gap;
    const double zone = lim.length + sc.geometry.zone_extent(v.road);
    std::mt19937_64 rng(sv.plan.stream);
    std::vector<Segment> segs;
    VehicleState s{v.initial_position, lim.v_max};
    double pulse_start = kInf;
    // Cruise straight to the point where the behaviour can first deviate.
    double quiet = std::min(sv.plan.window_start, sv.plan.trigger_position);
    if (sv.plan.kind == NoncoopBehavior::constant_speed) quiet = zone;
    if (s.position < quiet) {
        double steps = std::floor((quiet - s.position) / (lim.v_max * dt));
        if (steps > 0) {
            segs.push_back({steps * dt, 0.0});
            s.position += steps * dt * lim.v_max;
        }
    }
    double t = v.spawn_time + (segs.empty() ? 0.0 : segs.front().duration);
    std::size_t k = 0;
    while (s.position < zone && k < 200000) {
        double a = noncoop_policy_step(sv.plan, s, pulse_start, t, rng, lim);
        if (sv.plan.kind == NoncoopBehavior::braking_pulse && !std::isfinite(pulse_start) && a < 0.0)
            pulse_start = t;
        segs.push_back({dt, a});
        s = advance(s, a, dt, lim);
        ++k;
        t += dt;
    }
    segs.push_back({kInf, lim.a_acc});
    return Trajectory(v.spawn_time, {v.initial_position, lim.v_max}, segs, lim);
}

}  // namespace xsched
