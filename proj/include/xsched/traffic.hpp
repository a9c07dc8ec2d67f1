#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "xsched/core.hpp"
#include "xsched/long_horizon.hpp"

namespace xsched {

enum class NoncoopBehavior { constant_speed, braking_pulse, random_bounded, mixed };

const char* behavior_name(NoncoopBehavior b);
NoncoopBehavior parse_behavior(const std::string& s);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
    std::string scenario_id = "run";
    int roads = 3;
    std::vector<double> extent{5.0, 5.0, 5.0};
    double length = 5.0;
    double v_max = 20.0;
    double a_dec = 4.0;
    double a_acc = 3.0;
    double v_reduction = 1.0;
    double range_A = 600.0;
    double range_B = 200.0;
    int window = 6;
    std::optional<double> delta;  // unset: the no-slowdown slack
    double tau = 0.1;
    double mu = 0.1;
    double epoch_gap = 2.0;
    double tick_gap = 0.1;
    double lambda_coop = 0.6;
    double lambda_noncoop = 0.0;
    NoncoopBehavior behavior = NoncoopBehavior::constant_speed;
    double horizon = 100.0;
    std::uint64_t seed = 1;
    std::optional<double> noncoop_delay;  // unset: tau; "inf": never observed
    double noncoop_window = 100.0;
    bool jitter = true;
    double drain = 600.0;  // extra simulated time for the last vehicles to clear

    KinematicLimits limits() const { return {length, v_max, a_dec, a_acc}; }
    double slack() const;            // delta, or its no-slowdown default
    double observation_delay() const;
};

// v_M (tau + mu) (1 + a_dec / a_acc)
double no_slowdown_slack(const ScenarioConfig& c);
// Smallest B keeping every vehicle unable to commit before it is short-range.
double handoff_bound(const ScenarioConfig& c);

// Throws ConfigError; returns warnings.
std::vector<std::string> validate(const ScenarioConfig& c);

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_text(const std::string& text);
std::string to_config_text(const ScenarioConfig& c);

struct NoncoopPlan {
    NoncoopBehavior kind = NoncoopBehavior::constant_speed;
    double trigger_position = 0.0;  // braking pulse starts here
    double pulse_duration = 0.0;
    double window_start = -100.0;   // random acceleration starts here
    std::uint64_t stream = 0;
};

struct ScenarioVehicle {
    Vehicle vehicle;
    NoncoopPlan plan;
};

struct Scenario {
    ScenarioConfig config;
    RoadGeometry geometry;       // extents after jitter
    LongHorizonParams long_range;  // slack and epoch gap after jitter
    std::vector<ScenarioVehicle> vehicles;  // id order == spawn order
};

Scenario generate_scenario(const ScenarioConfig& c);

// Acceleration of a non-cooperative vehicle for the tick starting at t.
double noncoop_policy_step(const NoncoopPlan& plan, VehicleState s, double pulse_start,
                           double t, std::mt19937_64& rng, const KinematicLimits& lim);

// Tick-by-tick rollout of the behaviour until the rear bumper clears the zone.
Trajectory noncoop_trajectory(const ScenarioVehicle& sv, const Scenario& sc);

}  // namespace xsched
