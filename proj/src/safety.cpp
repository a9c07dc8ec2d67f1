#include "xsched/safety.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace xsched {

namespace {

constexpr double kEps = 1e-9;

// c0 + c1 tau + c2 tau^2
struct Quad {
    double c0, c1, c2;
    double operator()(double x) const { return c0 + x * (c1 + x * c2); }
};

struct Motion {
    double p, v, a;
};

Quad position(const Motion& m, double offset) { return {m.p + offset, m.v, 0.5 * m.a}; }

Quad diff(const Quad& x, const Quad& y) { return {x.c0 - y.c0, x.c1 - y.c1, x.c2 - y.c2}; }

void roots_in(const Quad& q, double lo, double hi, std::vector<double>& out) {
    auto keep = [&](double r) {
        if (r > lo && r < hi) out.push_back(r);
    };
    if (q.c2 == 0.0) {
        if (q.c1 != 0.0) keep(-q.c0 / q.c1);
        return;
    }
    double disc = q.c1 * q.c1 - 4.0 * q.c2 * q.c0;
    if (disc < 0.0) return;
    double s = std::sqrt(disc);
    double qq = -0.5 * (q.c1 + std::copysign(s, q.c1));
    if (qq != 0.0) {
        keep(qq / q.c2);
        keep(q.c0 / qq);
    } else {
        keep(0.0);
    }
}

template <std::size_t N, class Build>
std::optional<double> scan(const Trajectory& ti, const Trajectory& tj, double t_lo, double t_hi,
                           Build build) {
    t_lo = std::max({t_lo, ti.origin_time(), tj.origin_time()});
    if (!(t_hi > t_lo)) return std::nullopt;
    auto pi = ti.pieces();
    auto pj = tj.pieces();
    std::size_t a = 0, b = 0;
    while (a + 1 < pi.size() && pi[a + 1].t0 <= t_lo) ++a;
    while (b + 1 < pj.size() && pj[b + 1].t0 <= t_lo) ++b;
    double t = t_lo;
    std::vector<double> cuts;
    while (t < t_hi) {
        double end = std::min({pi[a].end_time(), pj[b].end_time(), t_hi});
        VehicleState si = pi[a].at(t);
        VehicleState sj = pj[b].at(t);
        std::array<Quad, N> fs = build(Motion{si.position, si.velocity, pi[a].a},
                                       Motion{sj.position, sj.velocity, pj[b].a});
        double span = end - t;
        cuts.assign({0.0});
        for (Quad f : fs) {
            f.c0 -= kEps;
            roots_in(f, 0.0, span, cuts);
        }
        std::sort(cuts.begin(), cuts.end());
        double last = std::isinf(span) ? cuts.back() + 2.0 : span;
        cuts.push_back(last);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            double m = 0.5 * (cuts[k] + cuts[k + 1]);
            if (!(cuts[k + 1] > cuts[k])) continue;
            bool all = true;
            for (const Quad& f : fs)
                if (!(f(m) > kEps)) {
                    all = false;
                    break;
                }
            if (all) return t + m;
        }
        if (std::isinf(end)) break;
        t = end;
        while (a + 1 < pi.size() && pi[a].end_time() <= t) ++a;
        while (b + 1 < pj.size() && pj[b].end_time() <= t) ++b;
    }
    return std::nullopt;
}

}  // namespace

std::optional<double> same_road_conflict_time(const Trajectory& ti, const Trajectory& tj,
                                              double d_r, double l_i, double l_j, double t_lo,
                                              double t_hi) {
    return scan<6>(ti, tj, t_lo, t_hi, [&](const Motion& mi, const Motion& mj) {
        Quad qi = position(mi, 0.0), qj = position(mj, 0.0);
        return std::array<Quad, 6>{qi,
                                   qj,
                                   diff(Quad{d_r + l_i, 0, 0}, qi),
                                   diff(Quad{d_r + l_j, 0, 0}, qj),
                                   diff(position(mj, l_i), qi),
                                   diff(position(mi, l_j), qj)};
    });
}

std::optional<double> cross_road_conflict_time(const Trajectory& ti, const Trajectory& tj,
                                               double d_ri, double d_rj, double l_i, double l_j,
                                               double t_lo, double t_hi) {
    return scan<4>(ti, tj, t_lo, t_hi, [&](const Motion& mi, const Motion& mj) {
        Quad qi = position(mi, 0.0), qj = position(mj, 0.0);
        return std::array<Quad, 4>{qi, diff(Quad{l_i + d_ri, 0, 0}, qi), qj,
                                   diff(Quad{l_j + d_rj, 0, 0}, qj)};
    });
}

bool same_road_conflict(const Trajectory& ti, const Trajectory& tj, double d_r, double l_i,
                        double l_j, double horizon) {
    return same_road_conflict_time(ti, tj, d_r, l_i, l_j, -kInf, horizon).has_value();
}

bool cross_road_conflict(const Trajectory& ti, const Trajectory& tj, double d_ri, double d_rj,
                         double l_i, double l_j, double horizon) {
    return cross_road_conflict_time(ti, tj, d_ri, d_rj, l_i, l_j, -kInf, horizon).has_value();
}

std::optional<double> conflict_time(const Vehicle& a, const Trajectory& ta, const Vehicle& b,
                                    const Trajectory& tb, const RoadGeometry& geo, double t_lo,
                                    double t_hi) {
    if (a.road == b.road)
        return same_road_conflict_time(ta, tb, geo.zone_extent(a.road), a.limits.length,
                                       b.limits.length, t_lo, t_hi);
    return cross_road_conflict_time(ta, tb, geo.zone_extent(a.road), geo.zone_extent(b.road),
                                    a.limits.length, b.limits.length, t_lo, t_hi);
}

bool separation_met(double p1, double p2, int r1, int r2, double l, double delta,
                    const RoadGeometry& geo) {
    bool cross = r1 != r2;
    double need1 = l + delta + (cross ? geo.zone_extent(r1) : 0.0);
    double need2 = l + delta + (cross ? geo.zone_extent(r2) : 0.0);
    return p1 - p2 >= need1 || p2 - p1 >= need2;
}

double follow_clearance(double l, int road_follower, int road_leader, const RoadGeometry& geo) {
    return l + (road_follower != road_leader ? geo.zone_extent(road_leader) : 0.0);
}

std::vector<Violation> audit(std::span<const TrackedVehicle> fleet, const RoadGeometry& geo,
                             double horizon) {
    struct Window {
        double in, out;
    };
    std::vector<Window> win;
    win.reserve(fleet.size());
    for (const TrackedVehicle& tv : fleet) {
        double zone = tv.vehicle->limits.length + geo.zone_extent(tv.vehicle->road);
        win.push_back({tv.trajectory->time_at_position(0.0),
                       tv.trajectory->time_at_position(zone)});
    }
    std::vector<std::size_t> order(fleet.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return win[x].in < win[y].in || (win[x].in == win[y].in && x < y);
    });
    std::vector<Violation> out;
    for (std::size_t x = 0; x < order.size(); ++x) {
        std::size_t i = order[x];
        if (win[i].in > horizon) break;
        for (std::size_t y = x + 1; y < order.size(); ++y) {
            std::size_t j = order[y];
            if (win[j].in > win[i].out) break;
            const Vehicle& vi = *fleet[i].vehicle;
            const Vehicle& vj = *fleet[j].vehicle;
            if (!vi.cooperative() && !vj.cooperative()) continue;
            double lo = std::max(win[i].in, win[j].in);
            double hi = std::min({win[i].out, win[j].out, horizon});
            auto hit = conflict_time(vi, *fleet[i].trajectory, vj, *fleet[j].trajectory, geo,
                                     lo - 1e-6, hi + 1e-6);
            if (hit) {
                VehicleId a = std::min(vi.id, vj.id), b = std::max(vi.id, vj.id);
                out.push_back({a, b, *hit});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Violation& u, const Violation& v) {
        return u.first < v.first || (u.first == v.first && u.second < v.second);
    });
    return out;
}

}  // namespace xsched
