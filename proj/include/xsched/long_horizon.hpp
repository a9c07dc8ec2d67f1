#pragma once

#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "xsched/core.hpp"

namespace xsched {

struct LongHorizonParams {
    double range_A = 600.0;
    int window = 6;             // W
    double length = 5.0;        // l
    double delta = 28.0 / 3.0;  // safety slack
    double v_reduction = 1.0;   // v_R
    double epoch_gap = 2.0;     // spacing of the shared epoch grid

    double spacing() const { return length + delta; }
};

// State of one cooperative vehicle at an epoch. initial_position fixes the
// same-road order and is compared across roads for the nearest-vehicle map.
struct FleetEntry {
    VehicleId id;
    int road;
    double initial_position;
    double position;
};

struct NeighborMap {
    std::optional<VehicleId> front;
    std::optional<VehicleId> behind;
    std::vector<std::optional<VehicleId>> cross_nearest;  // per road; empty for own road
};

class FleetSnapshot {
public:
    FleetSnapshot(std::vector<FleetEntry> entries, int roads);

    const FleetEntry& at(VehicleId id) const;
    bool contains(VehicleId id) const { return index_.count(id) != 0; }
    int roads() const { return static_cast<int>(lanes_.size()); }
    // Front-to-back order of one road.
    const std::vector<VehicleId>& lane(int road) const;
    int lane_rank(VehicleId id) const;
    NeighborMap neighbors(VehicleId id) const;
    std::span<const FleetEntry> entries() const { return entries_; }

private:
    std::vector<FleetEntry> entries_;
    std::unordered_map<VehicleId, std::size_t> index_;
    std::unordered_map<VehicleId, int> rank_;
    std::vector<std::vector<VehicleId>> lanes_;
};

struct CollectedInfo {
    VehicleId ego;
    std::vector<VehicleId> members;        // ascending id
    std::map<VehicleId, double> eq_pos;    // P
};

double centered(double position, int road, const RoadGeometry& geo);

CollectedInfo collect_info(VehicleId ego, const FleetSnapshot& snap,
                           const LongHorizonParams& params, const RoadGeometry& geo);

struct OrderSolution {
    std::vector<VehicleId> order;          // front to back
    std::map<VehicleId, double> target;    // p*
    double objective = 0.0;
};

OrderSolution solve_order_opt(const CollectedInfo& info, const FleetSnapshot& snap,
                              const LongHorizonParams& params, const RoadGeometry& geo);

struct EpochPlan {
    double target;                  // position at the next epoch
    std::vector<Segment> segments;  // spans exactly one epoch gap
};

EpochPlan long_horizon_step(double p_now, double p_star, const LongHorizonParams& params,
                            const KinematicLimits& lim);

// Whether the largest allowed slowdown fits in one epoch gap.
bool epoch_profile_feasible(const LongHorizonParams& params, const KinematicLimits& lim);

// Throws std::invalid_argument when the premises do not hold.
double lemma1_closed_form(const CollectedInfo& info, const FleetSnapshot& snap,
                          const LongHorizonParams& params, const RoadGeometry& geo);

}  // namespace xsched
