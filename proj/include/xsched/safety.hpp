#pragma once

#include <optional>
#include <vector>

#include "xsched/core.hpp"

namespace xsched {

// Both trajectories restricted to [t_lo, t_hi]; returns a witness instant of
// simultaneous occupancy, if any.
std::optional<double> same_road_conflict_time(const Trajectory& ti, const Trajectory& tj,
                                              double d_r, double l_i, double l_j,
                                              double t_lo, double t_hi);
std::optional<double> cross_road_conflict_time(const Trajectory& ti, const Trajectory& tj,
                                               double d_ri, double d_rj, double l_i, double l_j,
                                               double t_lo, double t_hi);

bool same_road_conflict(const Trajectory& ti, const Trajectory& tj, double d_r, double l_i,
                        double l_j, double horizon);
bool cross_road_conflict(const Trajectory& ti, const Trajectory& tj, double d_ri, double d_rj,
                         double l_i, double l_j, double horizon);

// Dispatches on the roads of the two vehicles.
std::optional<double> conflict_time(const Vehicle& a, const Trajectory& ta, const Vehicle& b,
                                    const Trajectory& tb, const RoadGeometry& geo, double t_lo,
                                    double t_hi);

bool separation_met(double p1, double p2, int r1, int r2, double l, double delta,
                    const RoadGeometry& geo);
double follow_clearance(double l, int road_follower, int road_leader, const RoadGeometry& geo);

struct Violation {
    VehicleId first;
    VehicleId second;
    double time;
};

struct TrackedVehicle {
    const Vehicle* vehicle;
    const Trajectory* trajectory;
};

// Pairs with at least one cooperative member, checked up to `horizon`.
std::vector<Violation> audit(std::span<const TrackedVehicle> fleet, const RoadGeometry& geo,
                             double horizon);

}  // namespace xsched
