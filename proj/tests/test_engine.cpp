#include <cmath>
#include <map>

#include "doctest.h"
#include "xsched/engine.hpp"
#include "xsched/metrics.hpp"

using namespace xsched;
using doctest::Approx;

namespace {

Scenario lone_vehicle(double A) {
    ScenarioConfig c;
    c.range_A = A;
    c.lambda_coop = 0.0;
    c.jitter = false;
    Scenario sc = generate_scenario(c);
    ScenarioVehicle sv;
    sv.vehicle.id = 0;
    sv.vehicle.road = 1;
    sv.vehicle.spawn_time = 0.5;
    sv.vehicle.initial_position = -A - c.range_B;
    sc.vehicles.push_back(sv);
    return sc;
}

ScenarioConfig busy(double A, double lc, double ln) {
    ScenarioConfig c;
    c.range_A = A;
    c.lambda_coop = lc;
    c.lambda_noncoop = ln;
    c.behavior = NoncoopBehavior::mixed;
    c.horizon = 40.0;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("empty scenario") {
    ScenarioConfig c;
    c.lambda_coop = 0.0;
    SimResult r = simulate(generate_scenario(c), Policy::two_stage);
    CHECK(r.vehicles.empty());
    CHECK(r.decisions.empty());
    CHECK(r.epochs.empty());
    CHECK(r.violations.empty());
    CHECK(r.end_time == 0.0);
    FleetStats st = fleet_stats(r);
    CHECK(st.count == 0);
    CHECK(st.mean_cost == 0.0);
    CHECK(st.throughput == 0.0);
}

TEST_CASE("a lone cooperative vehicle never slows down") {
    for (double A : {0.0, 600.0}) {
        for (Policy p : {Policy::two_stage, Policy::baseline}) {
            SimResult r = simulate(lone_vehicle(A), p);
            REQUIRE(r.vehicles.size() == 1);
            const VehicleLog& v = r.vehicles[0];
            for (double t = 0.5; t <= v.clearance_time; t += 0.05)
                CHECK(v.trajectory.evaluate(t).velocity == 20.0);
            double travel = (A + 200.0 + 10.0) / 20.0;
            CHECK(v.clearance_time == Approx(0.5 + travel).epsilon(1e-9));
            CHECK(fleet_stats(r).mean_cost == Approx(0.0).epsilon(1e-9));
            CHECK(fleet_stats(r).throughput == Approx(1.0 / r.end_time));
        }
    }
}

TEST_CASE("same seed gives identical results") {
    Scenario sc = generate_scenario(busy(200.0, 0.8, 0.2));
    SimResult a = simulate(sc, Policy::two_stage), b = simulate(sc, Policy::two_stage);
    REQUIRE(a.vehicles.size() == b.vehicles.size());
    CHECK(a.end_time == b.end_time);
    CHECK(a.decisions.size() == b.decisions.size());
    for (std::size_t k = 0; k < a.vehicles.size(); ++k) {
        auto pa = a.vehicles[k].trajectory.pieces(), pb = b.vehicles[k].trajectory.pieces();
        REQUIRE(pa.size() == pb.size());
        for (std::size_t j = 0; j < pa.size(); ++j) {
            CHECK(pa[j].t0 == pb[j].t0);
            CHECK(pa[j].p0 == pb[j].p0);
            CHECK(pa[j].v0 == pb[j].v0);
            CHECK(pa[j].a == pb[j].a);
        }
    }
}

TEST_CASE("timing and hand-off contracts") {
    ScenarioConfig c = busy(600.0, 0.7, 0.0);
    Scenario sc = generate_scenario(c);
    SimResult r = simulate(sc, Policy::two_stage);
    REQUIRE(!r.vehicles.empty());
    CHECK(r.violations.empty());

    std::map<VehicleId, std::vector<double>> ticks;
    for (const DecisionRecord& d : r.decisions) ticks[d.id].push_back(d.time);
    for (auto& [id, ts] : ticks)
        for (std::size_t k = 1; k < ts.size(); ++k) CHECK(ts[k] - ts[k - 1] <= c.mu + 1e-9);

    const double gap = sc.long_range.epoch_gap;
    for (const VehicleLog& v : r.vehicles) {
        // Hand-off happens exactly at -B.
        CHECK(v.trajectory.evaluate(v.handoff_time).position == Approx(-c.range_B).epsilon(1e-9));
        // Between epochs the speed never drops more than v_R below v_M.
        CHECK(v.trajectory.evaluate(v.handoff_time).velocity >= 19.0 - 1e-9);
        // Full speed at every epoch while in the long range.
        for (double t = std::ceil(v.vehicle.spawn_time / gap) * gap; t < v.handoff_time; t += gap)
            CHECK(std::abs(v.trajectory.evaluate(t).velocity - 20.0) < 1e-9);
        CHECK(std::isfinite(v.clearance_time));
    }
    for (const EpochRecord& e : r.epochs) {
        CHECK(e.displacement >= 19.0 * gap - 1e-9);
        CHECK(e.displacement <= 20.0 * gap + 1e-9);
    }
}

TEST_CASE("vehicles move forward and respect the limits") {
    for (Policy p : {Policy::two_stage, Policy::baseline}) {
        SimResult r = simulate(generate_scenario(busy(200.0, 0.8, 0.2)), p);
        CHECK(r.cooperative_violations() == 0);
        for (const VehicleLog& v : r.vehicles)
            for (const Piece& pc : v.trajectory.pieces()) {
                CHECK(pc.v0 >= 0.0);
                CHECK(pc.v0 <= 20.0);
                CHECK(pc.a >= -4.0 - 1e-9);
                CHECK(pc.a <= 3.0 + 1e-9);
            }
    }
}

TEST_CASE("predecessors are earlier hand-offs") {
    SimResult r = simulate(generate_scenario(busy(600.0, 1.0, 0.0)), Policy::two_stage);
    for (const VehicleLog& v : r.vehicles) {
        if (!v.predecessor) continue;
        const VehicleLog& p = r.vehicles[*v.predecessor];
        CHECK(p.priority < v.priority);
        CHECK(p.handoff_time <= v.handoff_time);
    }
}

TEST_CASE("policy names") {
    CHECK(parse_policy("two_stage") == Policy::two_stage);
    CHECK(parse_policy("baseline") == Policy::baseline);
    CHECK(std::string(policy_name(Policy::baseline)) == "baseline");
    CHECK_THROWS(parse_policy("greedy"));
}
