#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "xsched/core.hpp"
#include "xsched/verify.hpp"

using namespace xsched;
using doctest::Approx;

namespace {

const KinematicLimits kLim{};

Trajectory make(double t0, VehicleState s, std::vector<Segment> segs) {
    return Trajectory(t0, s, segs, kLim);
}

}  // namespace

TEST_CASE("evaluate holds constant velocity") {
    Trajectory tr = make(3.0, {-100.0, 20.0}, {{5.0, 0.0}});
    VehicleState s = tr.evaluate(8.0);
    CHECK(s.position == Approx(0.0).epsilon(1e-12));
    CHECK(s.velocity == 20.0);
}

TEST_CASE("evaluate stops at the velocity floor") {
    Trajectory tr = make(0.0, {-100.0, 20.0}, {{kInf, -4.0}});
    // 400 / (2 * 4) = 50 m over 5 s, then at rest.
    VehicleState s = tr.evaluate(10.0);
    CHECK(s.position == Approx(-50.0).epsilon(1e-12));
    CHECK(s.velocity == 0.0);
    CHECK(tr.evaluate(5.0).position == Approx(-50.0).epsilon(1e-12));
    CHECK(tr.evaluate(1000.0).position == Approx(-50.0).epsilon(1e-12));
}

TEST_CASE("evaluate clamps at the velocity ceiling") {
    Trajectory tr = make(0.0, {0.0, 0.0}, {{kInf, 3.0}});
    VehicleState s = tr.evaluate(20.0 / 3.0);
    CHECK(s.position == Approx(200.0 / 3.0).epsilon(1e-12));
    CHECK(s.velocity == Approx(20.0).epsilon(1e-12));
    VehicleState later = tr.evaluate(20.0 / 3.0 + 4.0);
    CHECK(later.velocity == 20.0);
    CHECK(later.position == Approx(200.0 / 3.0 + 80.0).epsilon(1e-12));
}

TEST_CASE("evaluate past the last segment holds the final velocity") {
    Trajectory tr = make(0.0, {-10.0, 10.0}, {{1.0, 2.0}});
    VehicleState s = tr.evaluate(3.0);
    CHECK(s.velocity == Approx(12.0));
    CHECK(s.position == Approx(-10.0 + 11.0 + 24.0));
    CHECK(tr.acceleration_at(2.0) == 0.0);
}

TEST_CASE("evaluate before the origin is a domain error") {
    Trajectory tr = make(2.0, {0.0, 20.0}, {});
    CHECK_THROWS_AS(tr.evaluate(1.999), std::domain_error);
}

TEST_CASE("construction rejects accelerations outside the limits") {
    CHECK_THROWS_AS(make(0.0, {0.0, 10.0}, {{1.0, 3.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make(0.0, {0.0, 10.0}, {{1.0, -4.5}}), std::invalid_argument);
    CHECK_THROWS_AS(make(0.0, {0.0, 25.0}, {}), std::invalid_argument);
}

TEST_CASE("stop envelope") {
    CHECK(stop_envelope({-50.0, 20.0}, kLim) == Approx(0.0));
    CHECK(stop_envelope({-10.0, 0.0}, kLim) == -10.0);
    CHECK(stop_envelope({-49.0, 20.0}, kLim) == Approx(1.0));
}

TEST_CASE("extreme trajectories") {
    Trajectory up = extreme_trajectory(0.0, {-5.0, 20.0}, true, kLim);
    CHECK(up.evaluate(2.0).position == Approx(35.0));
    CHECK(up.evaluate(2.0).velocity == 20.0);

    Trajectory down = extreme_trajectory(0.0, {-100.0, 20.0}, false, kLim);
    Trajectory ref = make(0.0, {-100.0, 20.0}, {{kInf, -4.0}});
    for (double t : {0.5, 3.0, 5.0, 9.0})
        CHECK(down.evaluate(t).position == Approx(ref.evaluate(t).position).epsilon(1e-12));

    Trajectory parked = extreme_trajectory(0.0, {-100.0, 0.0}, false, kLim);
    CHECK(parked.evaluate(50.0).position == -100.0);
    CHECK(parked.evaluate(50.0).velocity == 0.0);
}

TEST_CASE("braking preserves the stopping point") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-300.0, 0.0), vel(0.0, 20.0), dt(0.0, 6.0);
    for (int k = 0; k < 200; ++k) {
        VehicleState s{pos(rng), vel(rng)};
        Trajectory tr = extreme_trajectory(1.0, s, false, kLim);
        double env = stop_envelope(s, kLim);
        CHECK(stop_envelope(tr.evaluate(1.0 + dt(rng)), kLim) == Approx(env).epsilon(1e-12));
    }
}

TEST_CASE("advance agrees with evaluate") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> vel(0.0, 20.0), acc(-4.0, 3.0), dt(0.0, 8.0);
    for (int k = 0; k < 300; ++k) {
        VehicleState s{-50.0, vel(rng)};
        double a = acc(rng), h = dt(rng);
        VehicleState e = make(0.0, s, {{kInf, a}}).evaluate(h);
        VehicleState f = advance(s, a, h, kLim);
        CHECK(f.position == Approx(e.position).epsilon(1e-12));
        CHECK(f.velocity == Approx(e.velocity).epsilon(1e-12));
    }
}

TEST_CASE("time to cover and time at position") {
    // From rest: 3 t^2 / 2 = 24 -> t = 4.
    CHECK(time_to_cover(0.0, 24.0, 3.0, 20.0) == Approx(4.0));
    // Saturates after 20/3 s and 200/3 m, then cruises.
    CHECK(time_to_cover(0.0, 200.0 / 3.0 + 40.0, 3.0, 20.0) == Approx(20.0 / 3.0 + 2.0));
    CHECK(time_to_cover(20.0, 0.0, 3.0, 20.0) == 0.0);

    Trajectory tr = make(1.0, {-100.0, 20.0}, {{kInf, -4.0}});
    CHECK(tr.time_at_position(-75.0) == Approx(1.0 + (20.0 - std::sqrt(200.0)) / 4.0));
    CHECK(std::isinf(tr.time_at_position(-49.0)));
    CHECK(tr.time_at_position(-200.0) == 1.0);
}

TEST_CASE("splicing keeps the prefix and continues from the state at the cut") {
    Trajectory tr = make(0.0, {-100.0, 20.0}, {{kInf, 0.0}});
    Segment brake{kInf, -4.0};
    Trajectory sp = tr.spliced(2.0, std::span<const Segment>(&brake, 1));
    CHECK(sp.evaluate(1.0).position == Approx(-80.0));
    CHECK(sp.evaluate(2.0).position == Approx(-60.0));
    CHECK(sp.evaluate(7.0).position == Approx(-10.0));
    CHECK(sp.evaluate(7.0).velocity == 0.0);
}

TEST_CASE("random trajectories stay within the limits and match fixed-step integration") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> acc(-4.0, 3.0), dur(0.1, 12.0), vel(0.0, 20.0);
    for (int k = 0; k < 40; ++k) {
        std::vector<Segment> segs;
        double total = 0.0;
        while (total < 100.0) {
            segs.push_back({dur(rng), acc(rng)});
            total += segs.back().duration;
        }
        VehicleState s0{-500.0, vel(rng)};
        Trajectory tr = make(0.0, s0, segs);
        double prev_v = s0.velocity;
        for (double t = 0.01; t <= 100.0; t += 0.01) {
            double v = tr.evaluate(t).velocity;
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 20.0);
            double a = (v - prev_v) / 0.01;
            REQUIRE(a >= -4.0 - 1e-6);
            REQUIRE(a <= 3.0 + 1e-6);
            prev_v = v;
        }
        VehicleState exact = tr.evaluate(100.0);
        VehicleState num = verify::integrate(s0, segs, 100.0, kLim);
        CHECK(std::abs(exact.position - num.position) < 1e-6);
        CHECK(std::abs(exact.velocity - num.velocity) < 1e-6);
    }
}

TEST_CASE("integration oracle suite") {
    verify::SuiteReport r = verify::integration_oracle_suite(3, 100);
    CHECK(r.instances == 100);
    CHECK(r.failures == 0);
}
