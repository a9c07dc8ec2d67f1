#pragma once

#include <span>

#include "xsched/engine.hpp"

namespace xsched {

// Distance lost against the ideal full-speed trajectory, t0 seconds after spawn.
double relative_cost(const Vehicle& v, const Trajectory& traj, double t0);
// Same, additionally rejecting instants after the end of the run.
double relative_cost(const SimResult& res, VehicleId id, double t0);

struct FleetStats {
    double mean_cost = 0.0;
    double throughput = 0.0;  // cooperative clearances per second of simulated time
    std::size_t count = 0;
};

// Costs are taken at each cooperative vehicle's zone clearance.
FleetStats fleet_stats(const SimResult& res);

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

MeanSE mean_se(std::span<const double> xs);

}  // namespace xsched
