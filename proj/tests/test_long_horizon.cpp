#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "xsched/long_horizon.hpp"
#include "xsched/safety.hpp"
#include "xsched/verify.hpp"

using namespace xsched;
using doctest::Approx;

namespace {

RoadGeometry geo3() {
    RoadGeometry g;
    g.extent = {5.0, 5.0, 5.0};
    return g;
}

LongHorizonParams params(int W) {
    LongHorizonParams p;
    p.window = W;
    return p;
}

FleetEntry entry(VehicleId id, int road, double p) { return {id, road, p, p}; }

// Best objective over every permutation that keeps same-road order, with each
// vehicle placed as far forward as all earlier vehicles allow.
double brute_force_objective(const CollectedInfo& info, const FleetSnapshot& snap,
                             const LongHorizonParams& prm, const RoadGeometry& g) {
    std::vector<VehicleId> ids = info.members;
    std::sort(ids.begin(), ids.end());
    double best = kInf;
    do {
        bool ok = true;
        for (std::size_t a = 0; a < ids.size() && ok; ++a)
            for (std::size_t b = a + 1; b < ids.size() && ok; ++b) {
                const FleetEntry &ea = snap.at(ids[a]), &eb = snap.at(ids[b]);
                if (ea.road == eb.road && ea.initial_position < eb.initial_position) ok = false;
            }
        if (!ok) continue;
        std::vector<double> placed;
        double obj = 0.0;
        for (std::size_t a = 0; a < ids.size(); ++a) {
            const FleetEntry& ea = snap.at(ids[a]);
            double p = ea.position;
            for (std::size_t b = 0; b < a; ++b) {
                const FleetEntry& eb = snap.at(ids[b]);
                double need = prm.spacing() + (eb.road != ea.road ? g.zone_extent(eb.road) : 0.0);
                p = std::min(p, placed[b] - need);
            }
            placed.push_back(p);
            obj += info.eq_pos.at(ids[a]) - p;
        }
        best = std::min(best, obj);
    } while (std::next_permutation(ids.begin(), ids.end()));
    return best;
}

std::vector<FleetEntry> random_fleet(std::mt19937_64& rng, int n, int roads) {
    std::uniform_real_distribution<double> pos(-900.0, -300.0);
    std::vector<FleetEntry> out;
    for (int k = 0; k < n; ++k)
        out.push_back(entry(static_cast<VehicleId>(k), static_cast<int>(rng() % roads), pos(rng)));
    return out;
}

}  // namespace

TEST_CASE("single vehicle collects only itself") {
    FleetSnapshot snap({entry(4, 1, -700.0)}, 3);
    CollectedInfo info = collect_info(4, snap, params(6), geo3());
    CHECK(info.members == std::vector<VehicleId>{4});
    CHECK(info.eq_pos.at(4) == -700.0);
    OrderSolution sol = solve_order_opt(info, snap, params(6), geo3());
    CHECK(sol.target.at(4) == -700.0);
    CHECK(sol.objective == 0.0);
}

TEST_CASE("follower clamp on a shared road") {
    FleetSnapshot snap({entry(0, 0, -497.0), entry(1, 0, -500.0)}, 3);
    LongHorizonParams prm = params(6);
    CollectedInfo info = collect_info(1, snap, prm, geo3());
    CHECK(info.members.size() == 2);
    CHECK(info.eq_pos.at(0) == -497.0);
    CHECK(info.eq_pos.at(1) == Approx(-497.0 - (5.0 + 28.0 / 3.0)));
}

TEST_CASE("window truncation keeps the nearest vehicle ahead") {
    FleetSnapshot snap({entry(0, 0, -900.0), entry(1, 0, -300.0), entry(2, 1, -420.0),
                        entry(3, 2, -380.0)},
                       3);
    CollectedInfo info = collect_info(0, snap, params(2), geo3());
    CHECK(info.members == std::vector<VehicleId>{0, 2});
}

TEST_CASE("collected sets respect their invariants") {
    std::mt19937_64 rng(41);
    RoadGeometry g = geo3();
    for (int k = 0; k < 200; ++k) {
        int W = 2 + static_cast<int>(rng() % 5);
        LongHorizonParams prm = params(W);
        FleetSnapshot snap(random_fleet(rng, 3 + static_cast<int>(rng() % 15), 3), 3);
        VehicleId ego = snap.entries()[rng() % snap.entries().size()].id;
        CollectedInfo info = collect_info(ego, snap, prm, g);
        REQUIRE(std::find(info.members.begin(), info.members.end(), ego) != info.members.end());
        CHECK(info.members.size() <= static_cast<std::size_t>(W));
        double ego_c = centered(info.eq_pos.at(ego), snap.at(ego).road, g);
        for (VehicleId m : info.members) {
            CHECK(centered(info.eq_pos.at(m), snap.at(m).road, g) >= ego_c - 1e-9);
            for (VehicleId n : info.members) {
                const FleetEntry &a = snap.at(m), &b = snap.at(n);
                if (a.road == b.road && a.initial_position > b.initial_position)
                    CHECK(info.eq_pos.at(m) - info.eq_pos.at(n) >= prm.spacing() - 1e-9);
            }
        }
    }
}

TEST_CASE("order optimisation: slack constraints leave positions untouched") {
    FleetSnapshot snap({entry(0, 0, -400.0), entry(1, 0, -420.0)}, 3);
    LongHorizonParams prm = params(6);
    CollectedInfo info = collect_info(1, snap, prm, geo3());
    OrderSolution sol = solve_order_opt(info, snap, prm, geo3());
    CHECK(sol.target.at(0) == -400.0);
    CHECK(sol.target.at(1) == -420.0);
    CHECK(sol.objective == 0.0);
}

TEST_CASE("order optimisation returns feasible, order-preserving optima") {
    std::mt19937_64 rng(97);
    RoadGeometry g = geo3();
    for (int k = 0; k < 150; ++k) {
        int W = 2 + static_cast<int>(rng() % 5);
        LongHorizonParams prm = params(W);
        FleetSnapshot snap(random_fleet(rng, 4 + static_cast<int>(rng() % 12), 3), 3);
        VehicleId ego = snap.entries()[rng() % snap.entries().size()].id;
        CollectedInfo info = collect_info(ego, snap, prm, g);
        OrderSolution sol = solve_order_opt(info, snap, prm, g);
        double obj = 0.0;
        for (VehicleId m : info.members) {
            const FleetEntry& a = snap.at(m);
            double pa = sol.target.at(m);
            CHECK(pa <= a.position + 1e-9);
            obj += info.eq_pos.at(m) - pa;
            for (VehicleId n : info.members) {
                if (n == m) continue;
                const FleetEntry& b = snap.at(n);
                double pb = sol.target.at(n);
                if (a.road == b.road) {
                    if (a.initial_position > b.initial_position) {
                        CHECK(pa - pb >= prm.spacing() - 1e-9);
                    }
                } else if (pa >= pb) {
                    CHECK(pa - pb >= prm.spacing() + g.zone_extent(a.road) - 1e-9);
                }
            }
        }
        CHECK(sol.objective == Approx(obj).epsilon(1e-9));
        CHECK(sol.objective == Approx(brute_force_objective(info, snap, prm, g)).epsilon(1e-9));
    }
}

TEST_CASE("closed form for the ego target") {
    RoadGeometry g = geo3();
    LongHorizonParams prm = params(6);
    const double gap = prm.spacing();

    SUBCASE("ego already clear of a same-road vehicle") {
        FleetSnapshot snap({entry(0, 0, -300.0), entry(1, 0, -320.0)}, 3);
        CollectedInfo info{1, {0, 1}, {{0, -300.0}, {1, -320.0}}};
        CHECK(lemma1_closed_form(info, snap, prm, g) == -320.0);
        CHECK(solve_order_opt(info, snap, prm, g).target.at(1) == -320.0);
    }
    SUBCASE("ego yields to a cross-road vehicle") {
        FleetSnapshot snap({entry(0, 1, -300.0), entry(1, 0, -308.0)}, 3);
        CollectedInfo info{1, {0, 1}, {{0, -300.0}, {1, -308.0}}};
        double expect = -300.0 - (gap + 5.0);
        CHECK(expect == Approx(-319.3333333333));
        CHECK(lemma1_closed_form(info, snap, prm, g) == Approx(expect).epsilon(1e-12));
        CHECK(solve_order_opt(info, snap, prm, g).target.at(1) == Approx(expect).epsilon(1e-12));
    }
    SUBCASE("distant vehicle leaves the ego unconstrained") {
        FleetSnapshot snap({entry(0, 2, -300.0), entry(1, 0, -1300.0)}, 3);
        CollectedInfo info{1, {0, 1}, {{0, -300.0}, {1, -1300.0}}};
        CHECK(lemma1_closed_form(info, snap, prm, g) == -1300.0);
    }
    SUBCASE("violated premises are rejected") {
        FleetSnapshot snap({entry(0, 2, -400.0), entry(1, 0, -300.0)}, 3);
        CollectedInfo info{1, {0, 1}, {{0, -400.0}, {1, -300.0}}};
        CHECK_THROWS_AS(lemma1_closed_form(info, snap, prm, g), std::invalid_argument);
    }
}

TEST_CASE("closed form matches the optimiser on random premise-satisfying instances") {
    verify::SuiteReport r = verify::lemma1_suite(1234, 500);
    CHECK(r.instances == 500);
    CHECK(r.failures == 0);
}

TEST_CASE("epoch step targets") {
    LongHorizonParams prm = params(6);
    KinematicLimits lim;
    CHECK(long_horizon_step(-800.0, -800.0, prm, lim).target == Approx(-760.0));
    CHECK(long_horizon_step(-800.0, -900.0, prm, lim).target == Approx(-762.0));
    CHECK(long_horizon_step(-800.0, -801.0, prm, lim).target == Approx(-761.0));
    CHECK_THROWS_AS(long_horizon_step(-800.0, -799.0, prm, lim), std::logic_error);
}

TEST_CASE("epoch profiles realise the displacement and end at full speed") {
    LongHorizonParams prm = params(6);
    KinematicLimits lim;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> shift(0.0, 5.0);
    for (int k = 0; k < 300; ++k) {
        double p = -1000.0, p_star = p - shift(rng);
        EpochPlan plan = long_horizon_step(p, p_star, prm, lim);
        double disp = plan.target - p;
        CHECK(disp >= 38.0 - 1e-12);
        CHECK(disp <= 40.0 + 1e-12);
        double span = 0.0;
        for (const Segment& s : plan.segments) span += s.duration;
        CHECK(span == Approx(prm.epoch_gap).epsilon(1e-12));
        Trajectory tr(0.0, {p, 20.0}, plan.segments, lim);
        VehicleState end = tr.evaluate(prm.epoch_gap);
        CHECK(end.position == Approx(plan.target).epsilon(1e-12));
        CHECK(std::abs(end.velocity - 20.0) < 1e-9);
        for (double t = 0.0; t <= prm.epoch_gap; t += 0.05) CHECK(tr.evaluate(t).velocity <= 20.0);
    }
}

TEST_CASE("epoch gap feasibility") {
    KinematicLimits lim;
    LongHorizonParams prm = params(6);
    CHECK(epoch_profile_feasible(prm, lim));
    // The deepest slowdown needs a gap of at least 2 v_R (1/a_dec + 1/a_acc) = 7/6 s.
    prm.epoch_gap = 1.1;
    CHECK_FALSE(epoch_profile_feasible(prm, lim));
    prm.epoch_gap = 1.2;
    CHECK(epoch_profile_feasible(prm, lim));
}
