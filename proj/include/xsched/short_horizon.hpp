#pragma once

#include <optional>
#include <span>
#include <vector>

#include "xsched/core.hpp"

namespace xsched {

struct Observation {
    VehicleId subject = 0;
    VehicleState state;
    double stamp = 0.0;
};

struct PredecessorView {
    Observation obs;
    double clearance;  // L = l + d_{r'} when the predecessor uses another road
};

struct AdversaryView {
    Observation obs;
    KinematicLimits limits;
    double zone;  // own length plus zone extent of its road
};

struct Knowledge {
    std::optional<PredecessorView> predecessor;
    std::vector<AdversaryView> adversaries;
};

// What the ego knows about itself beyond its current state.
struct EgoProfile {
    KinematicLimits limits;
    double zone;  // l + d_r
    double spawn_time;
    double spawn_position;
};

struct ShortHorizonParams {
    int grid = 25;                  // accelerations sampled over [-a_dec, a_acc]
    int scenario_adversaries = 3;   // adversaries enumerated in the inner max
    double block_cap = 30.0;        // open-ended blocks end this long after the tick
};

enum class Branch {
    committed,       // already unable to stop: full throttle
    pred_gate,       // predecessor and best safe plan both committed
    follow_empty,    // nothing keeps the follow clearance: brake
    follow_minimax,  // minimax over the follow-safe candidates
    baseline,
    baseline_brake,  // baseline found no robust candidate
};

const char* branch_name(Branch b);

struct Candidate {
    double acceleration;
    VehicleState endpoint;
};

struct Decision {
    double acceleration;
    VehicleState endpoint;
    Branch branch;
};

// Possible occupancy interval of an adversary over all admissible inputs.
struct OccupancyBound {
    double earliest_entry;
    double forced_exit;
};

struct Block {
    double from;
    double until;
};

// Committed: cannot stop before the zone. States within 1e-9 m of the boundary
// count as uncommitted so rounding between a planned endpoint and the realized
// state cannot flip the classification.
bool in_region_C(VehicleState s, const KinematicLimits& lim);

// Smallest clearance slack over every synchronized brake-then-accelerate
// continuation; candidate at T, predecessor braking from its stamp.
double follow_margin(VehicleState cand, double T, const Observation& pred, double clearance,
                     const KinematicLimits& lim);
bool f_fol_member(VehicleState cand, double T, const PredecessorView* pred,
                  const KinematicLimits& lim);

std::vector<Candidate> candidate_set(VehicleState s, double dt, const KinematicLimits& lim,
                                     int grid);

OccupancyBound adversary_bound(const AdversaryView& adv);

// Occupancy window of "hold a for dt from s at t0, then full throttle".
Block committed_window(VehicleState s, double t0, double a, double dt, const EgoProfile& ego);

bool robust_clear(VehicleState s, double t0, const Candidate& c, double dt, const EgoProfile& ego,
                  std::span<const OccupancyBound> bounds);

// Definition-1 cost of reaching `endpoint` at T and then waiting for the zone
// to be clear of `blocks` before crossing at full throttle.
double minimax_value(VehicleState endpoint, double T, const EgoProfile& ego,
                     std::span<const Block> blocks);

// Maximum of minimax_value over the extreme behaviours of the nearest adversaries.
double worst_case_value(VehicleState endpoint, double T, const EgoProfile& ego,
                        std::span<const AdversaryView> adversaries,
                        const ShortHorizonParams& params);

std::size_t minimax_select(std::span<const Candidate> cands, std::span<const double> values);

struct SafeChoice {
    Candidate candidate;
    double value;
    bool fallback;  // no robust candidate; braking hard
};

SafeChoice best_safe_trajectory(VehicleState s, double t0, double dt,
                                std::span<const AdversaryView> adversaries, const EgoProfile& ego,
                                const ShortHorizonParams& params);

Decision algorithm2_step(VehicleState s, double t0, double dt, const Knowledge& know,
                         const EgoProfile& ego, const ShortHorizonParams& params);

// Knowledge.predecessor is ignored; every vehicle in adversaries is respected.
Decision baseline_minimax_step(VehicleState s, double t0, double dt, const Knowledge& know,
                               const EgoProfile& ego, const ShortHorizonParams& params);

}  // namespace xsched
