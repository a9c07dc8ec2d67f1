#pragma once

// Property suites and brute-force oracles. Nothing here is used by the
// simulator itself; the oracles deliberately avoid the closed forms they check.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xsched/engine.hpp"
#include "xsched/long_horizon.hpp"
#include "xsched/short_horizon.hpp"

namespace xsched::verify {

struct SuiteReport {
    std::string suite;
    std::size_t instances = 0;
    std::size_t failures = 0;
    std::vector<std::string> counterexamples;  // at most a few, serialized
    double seconds = 0.0;
    std::string note;

    bool passed() const { return failures == 0; }
};

// ---- instance generators -------------------------------------------------

struct Lemma1Instance {
    RoadGeometry geo;
    LongHorizonParams params;
    std::vector<FleetEntry> entries;
    CollectedInfo info;
};

Lemma1Instance random_lemma1_instance(std::mt19937_64& rng);
std::string describe(const Lemma1Instance& inst);

// Fully cooperative fleet spawning at -B with entry times spread per the
// no-slowdown separation plus a random margin.
Scenario separated_fleet(std::mt19937_64& rng, std::size_t n);

// Random fleet for the convergence suite (A = 1200, at most 20 vehicles).
ScenarioConfig convergence_config(std::mt19937_64& rng);

// Random mixed scenario for the safety suite; `kind` cycles the behaviours.
ScenarioConfig mixed_config(std::mt19937_64& rng, int kind);

// ---- oracles -------------------------------------------------------------

// Dense 1 ms sweep over brake durations and times of the follow clearance.
double dense_follow_margin(VehicleState cand, double T, const Observation& pred, double clearance,
                           const KinematicLimits& lim, double dt = 1e-3);

// Largest occupancy margin found by 1 ms sampling plus local refinement;
// positive means both vehicles occupy the zone at once.
double sampled_overlap_margin(const Trajectory& ti, const Trajectory& tj, bool same_road,
                              double d_ri, double d_rj, double l_i, double l_j, double t_lo,
                              double t_hi, double dt = 1e-3);

// Fixed-step integration of piecewise commands with velocity clamping.
VehicleState integrate(VehicleState s0, const std::vector<Segment>& segs, double t,
                       const KinematicLimits& lim, double dt = 1e-4);

// ---- suites ----------------------------------------------------------------

SuiteReport lemma1_suite(std::uint64_t seed, std::size_t n);
SuiteReport convergence_suite(std::uint64_t seed, std::size_t n);
SuiteReport safety_suite(std::uint64_t seed, std::size_t n);
SuiteReport no_slowdown_suite(std::uint64_t seed, std::size_t n);
SuiteReport follow_oracle_suite(std::uint64_t seed, std::size_t n);
SuiteReport conflict_oracle_suite(std::uint64_t seed, std::size_t n);
SuiteReport integration_oracle_suite(std::uint64_t seed, std::size_t n);

}  // namespace xsched::verify
