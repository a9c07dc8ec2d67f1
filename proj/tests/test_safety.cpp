#include <random>

#include "doctest.h"
#include "xsched/safety.hpp"
#include "xsched/verify.hpp"

using namespace xsched;

namespace {

const KinematicLimits kLim{};

Trajectory cruise(double t0, double p0, double v = 20.0) {
    Segment s{kInf, 0.0};
    return Trajectory(t0, {p0, v}, std::span<const Segment>(&s, 1), kLim);
}

RoadGeometry three_roads(double d = 5.0) {
    RoadGeometry g;
    g.extent = {d, d, d};
    return g;
}

}  // namespace

TEST_CASE("same-road conflict examples") {
    // Offset 30 m always exceeds l + d = 10.
    CHECK_FALSE(same_road_conflict(cruise(0, -50), cruise(0, -80), 5.0, 5.0, 5.0, 20.0));
    CHECK(same_road_conflict(cruise(0, -50), cruise(0, -50), 5.0, 5.0, 5.0, 20.0));
    // Bodies 4 m apart with l = 5 overlap while inside the zone.
    CHECK(same_road_conflict(cruise(0, -10), cruise(0, -14), 5.0, 5.0, 5.0, 20.0));
}

TEST_CASE("same-road grazing contact is not a conflict") {
    // Gap exactly l: follower front touches leader rear.
    CHECK_FALSE(same_road_conflict(cruise(0, -10), cruise(0, -15), 5.0, 5.0, 5.0, 20.0));
}

TEST_CASE("cross-road conflict examples") {
    // i inside (0, 10) during [2, 2.5]; j during [4, 4.5].
    CHECK_FALSE(cross_road_conflict(cruise(0, -40), cruise(0, -80), 5.0, 5.0, 5.0, 5.0, 20.0));
    CHECK(cross_road_conflict(cruise(0, -20), cruise(0, -20), 5.0, 5.0, 5.0, 5.0, 20.0));
    Trajectory parked = cruise(0, -1.0, 0.0);
    CHECK_FALSE(cross_road_conflict(cruise(0, -20), parked, 5.0, 5.0, 5.0, 5.0, 20.0));
}

TEST_CASE("conflict witness lies in a shared occupancy instant") {
    auto w = cross_road_conflict_time(cruise(0, -20), cruise(0, -25), 5.0, 5.0, 5.0, 5.0, 0.0, 10.0);
    REQUIRE(w.has_value());
    double pi = -20 + 20 * *w, pj = -25 + 20 * *w;
    CHECK(pi > 0.0);
    CHECK(pi < 10.0);
    CHECK(pj > 0.0);
    CHECK(pj < 10.0);
}

TEST_CASE("conflict predicates are symmetric") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> p(-60.0, 0.0), a(-4.0, 3.0), d(0.2, 3.0);
    for (int k = 0; k < 300; ++k) {
        std::vector<Segment> s1{{d(rng), a(rng)}, {kInf, 3.0}}, s2{{d(rng), a(rng)}, {kInf, 3.0}};
        Trajectory x(0.0, {p(rng), 15.0}, s1, kLim), y(0.0, {p(rng), 12.0}, s2, kLim);
        CHECK(same_road_conflict(x, y, 5.0, 5.0, 5.0, 30.0) ==
              same_road_conflict(y, x, 5.0, 5.0, 5.0, 30.0));
        CHECK(cross_road_conflict(x, y, 5.0, 7.0, 5.0, 5.0, 30.0) ==
              cross_road_conflict(y, x, 7.0, 5.0, 5.0, 5.0, 30.0));
    }
}

TEST_CASE("analytic conflict detection agrees with dense sampling") {
    verify::SuiteReport r = verify::conflict_oracle_suite(17, 1000);
    CHECK(r.instances == 1000);
    CHECK(r.failures == 0);
}

TEST_CASE("separation examples") {
    RoadGeometry g = three_roads();
    const double delta = 9.33;
    CHECK(separation_met(19.34, 0.0, 0, 0, 5.0, delta, g));
    CHECK(separation_met(19.34, 0.0, 0, 1, 5.0, delta, g));
    CHECK_FALSE(separation_met(19.32, 0.0, 0, 1, 5.0, delta, g));
    CHECK_FALSE(separation_met(-7.0, -7.0, 0, 0, 5.0, delta, g));
    CHECK_FALSE(separation_met(-7.0, -7.0, 0, 2, 5.0, 0.0, g));
}

TEST_CASE("separation uses the extent of the road of the vehicle ahead") {
    RoadGeometry g;
    g.extent = {5.0, 8.0, 5.0};
    // p1 ahead on road 1 (d = 8): needs 5 + 1 + 8 = 14.
    CHECK(separation_met(14.0, 0.0, 1, 0, 5.0, 1.0, g));
    CHECK_FALSE(separation_met(13.9, 0.0, 1, 0, 5.0, 1.0, g));
    // p2 ahead on road 0 (d = 5): needs 11.
    CHECK(separation_met(0.0, 11.0, 1, 0, 5.0, 1.0, g));
}

TEST_CASE("separation is monotone in the distance") {
    RoadGeometry g = three_roads();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> gap(0.0, 40.0), more(0.0, 10.0);
    for (int k = 0; k < 500; ++k) {
        double x = gap(rng);
        int r2 = static_cast<int>(rng() % 3);
        if (separation_met(x, 0.0, 0, r2, 5.0, 9.33, g))
            CHECK(separation_met(x + more(rng), 0.0, 0, r2, 5.0, 9.33, g));
    }
}

TEST_CASE("follow clearance") {
    RoadGeometry g;
    g.extent = {5.0, 7.0, 5.0};
    CHECK(follow_clearance(5.0, 0, 0, g) == 5.0);
    CHECK(follow_clearance(5.0, 1, 0, g) == 10.0);
    CHECK(follow_clearance(5.0, 0, 1, g) == 12.0);
}

TEST_CASE("audit") {
    RoadGeometry g = three_roads();
    Vehicle a{0, 0, VehicleKind::cooperative, kLim, 0.0, -50.0};
    Vehicle b{1, 1, VehicleKind::cooperative, kLim, 0.0, -50.0};
    Vehicle c{2, 1, VehicleKind::noncooperative, kLim, 0.0, -50.0};
    Vehicle d{3, 2, VehicleKind::noncooperative, kLim, 0.0, -50.0};
    Trajectory ta = cruise(0, -50), tb = cruise(0, -50), tc = cruise(0, -200), td = cruise(0, -200);

    std::vector<TrackedVehicle> single{{&a, &ta}};
    CHECK(audit(single, g, 30.0).empty());

    std::vector<TrackedVehicle> twins{{&a, &ta}, {&b, &tb}};
    auto v = audit(twins, g, 30.0);
    REQUIRE(v.size() == 1);
    CHECK(v[0].first == 0);
    CHECK(v[0].second == 1);

    // Two non-cooperative vehicles may overlap without a recorded violation.
    std::vector<TrackedVehicle> wild{{&c, &tc}, {&d, &td}};
    CHECK(audit(wild, g, 30.0).empty());
}
