#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xsched/core.hpp"
#include "xsched/long_horizon.hpp"
#include "xsched/safety.hpp"
#include "xsched/short_horizon.hpp"
#include "xsched/traffic.hpp"

namespace xsched {

enum class Policy { two_stage, baseline };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& s);

struct DecisionRecord {
    VehicleId id;
    double time;
    Branch branch;
    double acceleration;
};

struct EpochRecord {
    VehicleId id;
    double time;
    double position;
    double target;  // p* from the order optimisation
    double displacement;
};

struct VehicleLog {
    Vehicle vehicle;
    Trajectory trajectory;
    double handoff_time = kInf;
    int priority = -1;                     // hand-off rank
    std::optional<VehicleId> predecessor;  // fixed at hand-off
    double handoff_slack = kInf;           // worst separation slack against live vehicles
    double clearance_time = kInf;          // rear bumper leaves the zone
};

struct SimResult {
    Policy policy = Policy::two_stage;
    ScenarioConfig config;
    RoadGeometry geometry;
    LongHorizonParams long_range;
    std::vector<VehicleLog> vehicles;  // indexed by id
    std::vector<DecisionRecord> decisions;
    std::vector<EpochRecord> epochs;
    std::vector<Violation> violations;
    double end_time = 0.0;
    bool truncated = false;  // stopped at the time cap with vehicles still inside

    std::size_t cooperative_violations() const;
};

struct EngineOptions {
    ShortHorizonParams short_range;
    bool audit = true;
    bool record_decisions = true;
};

SimResult simulate(const Scenario& sc, Policy policy, const EngineOptions& opt = {});

}  // namespace xsched
