#include "xsched/short_horizon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace xsched {

namespace {

constexpr double kTol = 1e-9;

struct Quad {
    double c0, c1, c2;
    double min_on(double len) const {
        double m = std::min(c0, c0 + len * (c1 + len * c2));
        if (c2 > 0.0) {
            double x = -c1 / (2.0 * c2);
            if (x > 0.0 && x < len) m = std::min(m, c0 + x * (c1 + x * c2));
        }
        return m;
    }
};

// Full braking from (p, v) starting at t0, evaluated at t >= t0.
struct Braking {
    double t0, p, v, a_dec;
    double stop_time() const { return t0 + v / a_dec; }
    VehicleState at(double t) const {
        double dt = std::min(t - t0, v / a_dec);
        return {p + v * dt - 0.5 * a_dec * dt * dt, v - a_dec * dt};
    }
};

double brake_time_to(VehicleState s, double x, double a_dec) {
    double c = x - s.position;
    if (c <= 0.0) return 0.0;
    double disc = s.velocity * s.velocity - 2.0 * a_dec * c;
    if (disc < 0.0) return kInf;
    return 2.0 * c / (s.velocity + std::sqrt(disc));
}

// Definition-1 cost once the vehicle holds full throttle from (s, t).
double settled_cost(VehicleState s, double t, const EgoProfile& ego) {
    const KinematicLimits& L = ego.limits;
    double gap = L.v_max - s.velocity;
    return ego.spawn_position + L.v_max * (t - ego.spawn_time) -
           (s.position - gap * gap / (2.0 * L.a_acc));
}

// Accelerate until the stop envelope reaches the entrance, then brake to rest there.
Trajectory approach(VehicleState start, double T, const KinematicLimits& L) {
    std::vector<Segment> segs;
    VehicleState s = start;
    double E = stop_envelope(s, L);
    if (E < 0.0) {
        double a = L.a_acc;
        double A2 = 0.5 * a + a * a / (2.0 * L.a_dec);
        double A1 = s.velocity * (1.0 + a / L.a_dec);
        double tau = (-A1 + std::sqrt(A1 * A1 - 4.0 * A2 * E)) / (2.0 * A2);
        if (s.velocity + a * tau <= L.v_max) {
            segs.push_back({tau, a});
            s = advance(s, a, tau, L);
        } else {
            double ts = (L.v_max - s.velocity) / a;
            double ps = s.position + 0.5 * (s.velocity + L.v_max) * ts;
            double cruise = std::max(0.0, (-L.v_max * L.v_max / (2.0 * L.a_dec) - ps) / L.v_max);
            segs.push_back({ts, a});
            segs.push_back({cruise, 0.0});
            s = {ps + L.v_max * cruise, L.v_max};
        }
    }
    if (s.velocity > 0.0) segs.push_back({s.velocity / L.a_dec, -L.a_dec});
    segs.push_back({kInf, 0.0});
    return Trajectory(T, start, segs, L);
}

struct Departure {
    double s, in, out;
    VehicleState state;
};

}  // namespace

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::committed: return "committed";
        case Branch::pred_gate: return "pred_gate";
        case Branch::follow_empty: return "follow_empty";
        case Branch::follow_minimax: return "follow_minimax";
        case Branch::baseline: return "baseline";
        case Branch::baseline_brake: return "baseline_brake";
    }
    return "?";
}

bool in_region_C(VehicleState s, const KinematicLimits& lim) {
    return stop_envelope(s, lim) > kTol;
}

double follow_margin(VehicleState cand, double T, const Observation& pred, double clearance,
                     const KinematicLimits& lim) {
    if (pred.stamp > T + 1e-12) throw std::invalid_argument("observation newer than decision");
    Braking ego{T, cand.position, cand.velocity, lim.a_dec};
    Braking lead{pred.stamp, pred.state.position, pred.state.velocity, lim.a_dec};
    std::array<double, 3> cuts{T, std::max(T, ego.stop_time()), std::max(T, lead.stop_time())};
    std::sort(cuts.begin(), cuts.end());
    const double vm = lim.v_max, two_a = 2.0 * lim.a_acc;
    double best = kInf;
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        double x = cuts[k];
        double len = k + 1 < cuts.size() ? cuts[k + 1] - x : 0.0;
        VehicleState si = ego.at(x), sj = lead.at(x);
        double ai = (si.velocity > 0.0 && len > 0.0) ? -lim.a_dec : 0.0;
        double aj = (sj.velocity > 0.0 && len > 0.0) ? -lim.a_dec : 0.0;
        if (x >= ego.stop_time()) ai = 0.0;
        if (x >= lead.stop_time()) aj = 0.0;
        Quad gap{sj.position - si.position - clearance, sj.velocity - si.velocity, 0.5 * (aj - ai)};
        double ci = vm - si.velocity, cj = vm - sj.velocity;
        Quad shift{(ci * ci - cj * cj) / two_a, (-2.0 * ci * ai + 2.0 * cj * aj) / two_a,
                   (ai * ai - aj * aj) / two_a};
        Quad sum{gap.c0 + shift.c0, gap.c1 + shift.c1, gap.c2 + shift.c2};
        best = std::min({best, gap.min_on(len), sum.min_on(len)});
    }
    return best;
}

bool f_fol_member(VehicleState cand, double T, const PredecessorView* pred,
                  const KinematicLimits& lim) {
    if (in_region_C(cand, lim)) return false;
    if (!pred) return true;
    return follow_margin(cand, T, pred->obs, pred->clearance, lim) >= -kTol;
}

std::vector<Candidate> candidate_set(VehicleState s, double dt, const KinematicLimits& lim,
                                     int grid) {
    if (grid < 2) throw std::invalid_argument("candidate grid needs at least two points");
    std::vector<Candidate> out;
    out.reserve(static_cast<std::size_t>(grid));
    for (int k = grid - 1; k >= 0; --k) {
        double a = k == grid - 1 ? lim.a_acc
                   : k == 0      ? -lim.a_dec
                                 : -lim.a_dec + (lim.a_acc + lim.a_dec) * k / (grid - 1);
        VehicleState e = advance(s, a, dt, lim);
        bool dup = false;
        for (const Candidate& c : out)
            if (std::abs(c.endpoint.position - e.position) <= 1e-12 &&
                std::abs(c.endpoint.velocity - e.velocity) <= 1e-12) {
                dup = true;
                break;
            }
        if (!dup) out.push_back({a, e});
    }
    return out;
}

OccupancyBound adversary_bound(const AdversaryView& adv) {
    const KinematicLimits& L = adv.limits;
    VehicleState s = adv.obs.state;
    if (s.position >= adv.zone) return {kInf, kInf};
    double entry = adv.obs.stamp + time_to_cover(s.velocity, -s.position, L.a_acc, L.v_max);
    double exit = kInf;
    if (stop_envelope(s, L) >= adv.zone) exit = adv.obs.stamp + brake_time_to(s, adv.zone, L.a_dec);
    return {entry, exit};
}

Block committed_window(VehicleState s, double t0, double a, double dt, const EgoProfile& ego) {
    const KinematicLimits& L = ego.limits;
    VehicleState e = advance(s, a, dt, L);
    double t1 = t0 + dt;
    auto reach = [&](double x) {
        if (e.position < x) return t1 + time_to_cover(e.velocity, x - e.position, L.a_acc, L.v_max);
        if (s.position >= x) return t0;
        Segment seg{dt, a};
        return Trajectory(t0, s, std::span<const Segment>(&seg, 1), L).time_at_position(x);
    };
    return {reach(0.0), reach(ego.zone)};
}

bool robust_clear(VehicleState s, double t0, const Candidate& c, double dt, const EgoProfile& ego,
                  std::span<const OccupancyBound> bounds) {
    if (!in_region_C(c.endpoint, ego.limits)) return true;
    Block w = committed_window(s, t0, c.acceleration, dt, ego);
    for (const OccupancyBound& b : bounds) {
        if (std::isinf(b.earliest_entry)) continue;
        bool before = w.until <= b.earliest_entry - kTol;
        bool after = w.from >= b.forced_exit + kTol;
        if (!before && !after) return false;
    }
    return true;
}

namespace {

// Shared machinery for one endpoint: departure candidates and their windows.
class Rollout {
public:
    Rollout(VehicleState endpoint, double T, const EgoProfile& ego)
        : end_(endpoint), T_(T), ego_(ego) {}

    Departure depart(double s) {
        VehicleState st = s <= T_ ? end_ : path().evaluate(s);
        const KinematicLimits& L = ego_.limits;
        double in = s + time_to_cover(st.velocity, -st.position, L.a_acc, L.v_max);
        double out = s + time_to_cover(st.velocity, ego_.zone - st.position, L.a_acc, L.v_max);
        return {s, in, out, st};
    }

    // Earliest departure whose entry is not before `until`.
    double entry_after(double until) {
        if (depart(T_).in >= until) return T_;
        double lo = T_, hi = std::max(T_, until);
        for (int it = 0; it < 100 && hi - lo > 1e-10; ++it) {
            double mid = 0.5 * (lo + hi);
            if (depart(mid).in >= until) hi = mid;
            else lo = mid;
        }
        return hi;
    }

    double cost(const Departure& d) const { return settled_cost(d.state, d.s, ego_); }

private:
    const Trajectory& path() {
        if (path_.empty()) path_ = approach(end_, T_, ego_.limits);
        return path_;
    }

    VehicleState end_;
    double T_;
    const EgoProfile& ego_;
    Trajectory path_;
};

bool clear_of(const Departure& d, std::span<const Block> blocks) {
    for (const Block& b : blocks)
        if (!(d.out <= b.from || d.in >= b.until - kTol)) return false;
    return true;
}

double earliest_cost(Rollout& ro, std::vector<Departure>& options, std::span<const Block> blocks) {
    for (const Departure& d : options)
        if (clear_of(d, blocks)) return ro.cost(d);
    throw std::logic_error("no clear departure found");
}

}  // namespace

double minimax_value(VehicleState endpoint, double T, const EgoProfile& ego,
                     std::span<const Block> blocks) {
    if (in_region_C(endpoint, ego.limits)) return settled_cost(endpoint, T, ego);
    Rollout ro(endpoint, T, ego);
    std::vector<Departure> options{ro.depart(T)};
    for (const Block& b : blocks) options.push_back(ro.depart(ro.entry_after(b.until)));
    std::sort(options.begin(), options.end(),
              [](const Departure& a, const Departure& b) { return a.s < b.s; });
    return earliest_cost(ro, options, blocks);
}

double worst_case_value(VehicleState endpoint, double T, const EgoProfile& ego,
                        std::span<const AdversaryView> adversaries,
                        const ShortHorizonParams& params) {
    if (in_region_C(endpoint, ego.limits)) return settled_cost(endpoint, T, ego);

    struct Ranked {
        double entry;
        VehicleId id;
        std::size_t k;
    };
    std::vector<Ranked> ranked;
    for (std::size_t k = 0; k < adversaries.size(); ++k) {
        OccupancyBound b = adversary_bound(adversaries[k]);
        if (std::isfinite(b.earliest_entry))
            ranked.push_back({b.earliest_entry, adversaries[k].obs.subject, k});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.entry < b.entry || (a.entry == b.entry && a.id < b.id);
    });
    if (ranked.size() > static_cast<std::size_t>(params.scenario_adversaries))
        ranked.resize(static_cast<std::size_t>(params.scenario_adversaries));

    const double cap = T + params.block_cap;
    // Per adversary: block under full braking (may be absent) and under full throttle.
    std::vector<std::array<std::optional<Block>, 2>> modes;
    for (const Ranked& r : ranked) {
        const AdversaryView& adv = adversaries[r.k];
        const KinematicLimits& L = adv.limits;
        VehicleState s = adv.obs.state;
        std::array<std::optional<Block>, 2> m;
        double acc_out = adv.obs.stamp + time_to_cover(s.velocity, adv.zone - s.position, L.a_acc, L.v_max);
        m[1] = Block{r.entry, std::min(acc_out, cap)};
        if (stop_envelope(s, L) > 0.0) {
            double in = adv.obs.stamp + brake_time_to(s, 0.0, L.a_dec);
            double out = stop_envelope(s, L) >= adv.zone
                             ? adv.obs.stamp + brake_time_to(s, adv.zone, L.a_dec)
                             : kInf;
            m[0] = Block{in, std::min(out, cap)};
        }
        modes.push_back(m);
    }

    Rollout ro(endpoint, T, ego);
    Departure now = ro.depart(T);
    std::vector<Block> all;
    for (const auto& m : modes)
        for (const auto& b : m)
            if (b) all.push_back(*b);
    if (clear_of(now, all)) return ro.cost(now);

    std::vector<Departure> options{now};
    for (const Block& b : all) options.push_back(ro.depart(ro.entry_after(b.until)));
    std::sort(options.begin(), options.end(),
              [](const Departure& a, const Departure& b) { return a.s < b.s; });

    double worst = -kInf;
    std::vector<Block> scenario;
    const std::size_t n = modes.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        scenario.clear();
        for (std::size_t k = 0; k < n; ++k) {
            const auto& b = modes[k][(mask >> k) & 1u];
            if (b) scenario.push_back(*b);
        }
        worst = std::max(worst, earliest_cost(ro, options, scenario));
    }
    return worst;
}

std::size_t minimax_select(std::span<const Candidate> cands, std::span<const double> values) {
    if (cands.empty() || cands.size() != values.size())
        throw std::invalid_argument("minimax_select needs one value per candidate");
    std::size_t best = 0;
    for (std::size_t k = 1; k < cands.size(); ++k) {
        double dv = values[k] - values[best];
        if (dv < -kTol) {
            best = k;
            continue;
        }
        if (dv > kTol) continue;
        const VehicleState& a = cands[k].endpoint;
        const VehicleState& b = cands[best].endpoint;
        if (a.position > b.position || (a.position == b.position && a.velocity > b.velocity))
            best = k;
    }
    return best;
}

SafeChoice best_safe_trajectory(VehicleState s, double t0, double dt,
                                std::span<const AdversaryView> adversaries, const EgoProfile& ego,
                                const ShortHorizonParams& params) {
    std::vector<OccupancyBound> bounds;
    bounds.reserve(adversaries.size());
    for (const AdversaryView& a : adversaries) bounds.push_back(adversary_bound(a));
    std::vector<Candidate> robust;
    for (const Candidate& c : candidate_set(s, dt, ego.limits, params.grid))
        if (robust_clear(s, t0, c, dt, ego, bounds)) robust.push_back(c);
    double T = t0 + dt;
    if (robust.empty()) {
        Candidate brake{-ego.limits.a_dec, advance(s, -ego.limits.a_dec, dt, ego.limits)};
        return {brake, worst_case_value(brake.endpoint, T, ego, adversaries, params), true};
    }
    std::vector<double> values;
    values.reserve(robust.size());
    for (const Candidate& c : robust)
        values.push_back(worst_case_value(c.endpoint, T, ego, adversaries, params));
    std::size_t k = minimax_select(robust, values);
    return {robust[k], values[k], false};
}

Decision algorithm2_step(VehicleState s, double t0, double dt, const Knowledge& know,
                         const EgoProfile& ego, const ShortHorizonParams& params) {
    const KinematicLimits& L = ego.limits;
    if (in_region_C(s, L)) return {L.a_acc, advance(s, L.a_acc, dt, L), Branch::committed};

    SafeChoice star = best_safe_trajectory(s, t0, dt, know.adversaries, ego, params);
    const PredecessorView* pred = know.predecessor ? &*know.predecessor : nullptr;
    bool pred_committed = !pred || in_region_C(pred->obs.state, L);
    if (pred_committed && in_region_C(star.candidate.endpoint, L))
        return {star.candidate.acceleration, star.candidate.endpoint, Branch::pred_gate};

    double T = t0 + dt;
    std::vector<Candidate> follow;
    for (const Candidate& c : candidate_set(s, dt, L, params.grid))
        if (f_fol_member(c.endpoint, T, pred, L)) follow.push_back(c);
    if (follow.empty()) return {-L.a_dec, advance(s, -L.a_dec, dt, L), Branch::follow_empty};

    std::vector<double> values;
    values.reserve(follow.size());
    for (const Candidate& c : follow)
        values.push_back(worst_case_value(c.endpoint, T, ego, know.adversaries, params));
    std::size_t k = minimax_select(follow, values);
    return {follow[k].acceleration, follow[k].endpoint, Branch::follow_minimax};
}

Decision baseline_minimax_step(VehicleState s, double t0, double dt, const Knowledge& know,
                               const EgoProfile& ego, const ShortHorizonParams& params) {
    SafeChoice star = best_safe_trajectory(s, t0, dt, know.adversaries, ego, params);
    return {star.candidate.acceleration, star.candidate.endpoint,
            star.fallback ? Branch::baseline_brake : Branch::baseline};
}

}  // namespace xsched
