#include "xsched/long_horizon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xsched {

FleetSnapshot::FleetSnapshot(std::vector<FleetEntry> entries, int roads)
    : entries_(std::move(entries)), lanes_(static_cast<std::size_t>(roads)) {
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        const FleetEntry& e = entries_[k];
        if (e.road < 0 || e.road >= roads) throw std::out_of_range("fleet entry road");
        if (!index_.emplace(e.id, k).second) throw std::invalid_argument("duplicate vehicle id");
        lanes_[static_cast<std::size_t>(e.road)].push_back(e.id);
    }
    for (auto& lane : lanes_) {
        std::sort(lane.begin(), lane.end(), [&](VehicleId a, VehicleId b) {
            double pa = at(a).initial_position, pb = at(b).initial_position;
            return pa > pb || (pa == pb && a < b);
        });
        for (std::size_t k = 0; k < lane.size(); ++k) rank_[lane[k]] = static_cast<int>(k);
    }
}

const FleetEntry& FleetSnapshot::at(VehicleId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("vehicle not in snapshot");
    return entries_[it->second];
}

const std::vector<VehicleId>& FleetSnapshot::lane(int road) const {
    return lanes_.at(static_cast<std::size_t>(road));
}

int FleetSnapshot::lane_rank(VehicleId id) const { return rank_.at(id); }

NeighborMap FleetSnapshot::neighbors(VehicleId id) const {
    const FleetEntry& e = at(id);
    const auto& own = lane(e.road);
    int k = lane_rank(id);
    NeighborMap nm;
    if (k > 0) nm.front = own[static_cast<std::size_t>(k - 1)];
    if (k + 1 < static_cast<int>(own.size())) nm.behind = own[static_cast<std::size_t>(k + 1)];
    nm.cross_nearest.resize(lanes_.size());
    for (int r = 0; r < roads(); ++r) {
        if (r == e.road) continue;
        std::optional<VehicleId> best;
        double best_gap = kInf;
        for (VehicleId j : lane(r)) {
            double gap = std::abs(at(j).initial_position - e.initial_position);
            if (gap < best_gap || (gap == best_gap && best && j < *best)) {
                best_gap = gap;
                best = j;
            }
        }
        nm.cross_nearest[static_cast<std::size_t>(r)] = best;
    }
    return nm;
}

double centered(double position, int road, const RoadGeometry& geo) {
    return position - 0.5 * geo.zone_extent(road);
}

CollectedInfo collect_info(VehicleId ego, const FleetSnapshot& snap,
                           const LongHorizonParams& params, const RoadGeometry& geo) {
    const int R = snap.roads();
    const double gap = params.spacing();
    struct Range {
        int lo = -1, hi = -1;
        bool empty() const { return lo < 0; }
    };
    std::vector<Range> rng(static_cast<std::size_t>(R));
    std::map<VehicleId, double> P;

    auto recompute = [&] {
        P.clear();
        for (int r = 0; r < R; ++r) {
            const Range& g = rng[static_cast<std::size_t>(r)];
            if (g.empty()) continue;
            const auto& lane = snap.lane(r);
            double prev = kInf;
            for (int k = g.lo; k <= g.hi; ++k) {
                VehicleId id = lane[static_cast<std::size_t>(k)];
                double p = std::min(snap.at(id).position, prev - gap);
                P[id] = p;
                prev = p;
            }
        }
    };
    auto cen = [&](VehicleId id) { return centered(P.at(id), snap.at(id).road, geo); };

    const FleetEntry& me = snap.at(ego);
    int rank = snap.lane_rank(ego);
    rng[static_cast<std::size_t>(me.road)] = {rank, rank};
    recompute();
    NeighborMap nm = snap.neighbors(ego);

    std::size_t count = 1;
    const std::size_t cap = static_cast<std::size_t>(params.window + 2 * R);
    while (count < cap) {
        bool added = false;
        for (int r = 0; r < R && !added; ++r) {
            Range& g = rng[static_cast<std::size_t>(r)];
            if (!g.empty()) continue;
            auto near = nm.cross_nearest[static_cast<std::size_t>(r)];
            if (!near) continue;
            int k = snap.lane_rank(*near);
            g = {k, k};
            added = true;
        }
        double mine = cen(ego);
        for (int r = 0; r < R && !added; ++r) {
            Range& g = rng[static_cast<std::size_t>(r)];
            if (g.empty()) continue;
            const auto& lane = snap.lane(r);
            VehicleId last = lane[static_cast<std::size_t>(g.hi)];
            if (cen(last) > mine && g.hi + 1 < static_cast<int>(lane.size())) {
                ++g.hi;
                added = true;
            }
        }
        if (!added) {
            int best = -1;
            double best_c = kInf;
            for (int r = 0; r < R; ++r) {
                const Range& g = rng[static_cast<std::size_t>(r)];
                if (g.empty() || g.lo == 0) continue;
                double c = cen(snap.lane(r)[static_cast<std::size_t>(g.lo)]);
                if (c < best_c) {
                    best_c = c;
                    best = r;
                }
            }
            if (best >= 0) {
                --rng[static_cast<std::size_t>(best)].lo;
                added = true;
            }
        }
        if (!added) break;
        ++count;
        recompute();
    }

    double mine = cen(ego);
    std::vector<std::pair<double, VehicleId>> keep;
    for (const auto& [id, p] : P) {
        double c = centered(p, snap.at(id).road, geo);
        if (id == ego) continue;
        if (c < mine) continue;
        keep.emplace_back(c, id);
    }
    std::sort(keep.begin(), keep.end());
    if (keep.size() + 1 > static_cast<std::size_t>(params.window))
        keep.resize(static_cast<std::size_t>(std::max(0, params.window - 1)));

    CollectedInfo info{ego, {ego}, {{ego, P.at(ego)}}};
    for (const auto& [c, id] : keep) {
        info.members.push_back(id);
        info.eq_pos[id] = P.at(id);
    }
    std::sort(info.members.begin(), info.members.end());
    return info;
}

OrderSolution solve_order_opt(const CollectedInfo& info, const FleetSnapshot& snap,
                              const LongHorizonParams& params, const RoadGeometry& geo) {
    if (info.members.size() > 10) throw std::invalid_argument("window larger than 10");
    const int R = snap.roads();
    std::vector<std::vector<VehicleId>> seq(static_cast<std::size_t>(R));
    for (VehicleId id : info.members) seq[static_cast<std::size_t>(snap.at(id).road)].push_back(id);
    for (auto& s : seq)
        std::sort(s.begin(), s.end(), [&](VehicleId a, VehicleId b) {
            return snap.lane_rank(a) < snap.lane_rank(b);
        });

    const std::size_t n = info.members.size();
    std::vector<std::size_t> head(static_cast<std::size_t>(R), 0);
    std::vector<VehicleId> order;
    std::vector<double> pos;
    std::vector<int> road_of;
    OrderSolution best;
    best.objective = kInf;

    auto dfs = [&](auto&& self, double obj) -> void {
        if (order.size() == n) {
            if (obj < best.objective - 1e-9) {
                best.objective = obj;
                best.order = order;
                best.target.clear();
                for (std::size_t k = 0; k < n; ++k) best.target[order[k]] = pos[k];
            }
            return;
        }
        std::vector<std::pair<VehicleId, int>> next;
        for (int r = 0; r < R; ++r) {
            std::size_t h = head[static_cast<std::size_t>(r)];
            if (h < seq[static_cast<std::size_t>(r)].size())
                next.emplace_back(seq[static_cast<std::size_t>(r)][h], r);
        }
        std::sort(next.begin(), next.end());
        for (auto [id, r] : next) {
            double p = snap.at(id).position;
            for (std::size_t k = 0; k < order.size(); ++k) {
                double need = params.spacing() + (road_of[k] != r ? geo.zone_extent(road_of[k]) : 0.0);
                p = std::min(p, pos[k] - need);
            }
            order.push_back(id);
            pos.push_back(p);
            road_of.push_back(r);
            ++head[static_cast<std::size_t>(r)];
            self(self, obj + info.eq_pos.at(id) - p);
            --head[static_cast<std::size_t>(r)];
            order.pop_back();
            pos.pop_back();
            road_of.pop_back();
        }
    };
    dfs(dfs, 0.0);
    return best;
}

bool epoch_profile_feasible(const LongHorizonParams& params, const KinematicLimits& lim) {
    double k = 1.0 / lim.a_dec + 1.0 / lim.a_acc;
    return params.epoch_gap >= 2.0 * k * params.v_reduction - 1e-12;
}

EpochPlan long_horizon_step(double p_now, double p_star, const LongHorizonParams& params,
                            const KinematicLimits& lim) {
    const double gap = params.epoch_gap;
    const double vm = lim.v_max;
    double target = std::max(p_now + (vm - params.v_reduction) * gap, p_star + vm * gap);
    double deficit = vm * gap - (target - p_now);
    if (deficit < -1e-9 || deficit > params.v_reduction * gap + 1e-9)
        throw std::logic_error("epoch displacement outside the allowed band");
    deficit = std::max(0.0, deficit);
    EpochPlan plan{target, {}};
    if (deficit == 0.0) {
        plan.segments.push_back({gap, 0.0});
        return plan;
    }
    // Brake, cruise, then accelerate back to v_max, losing `deficit` metres.
    double k = 1.0 / lim.a_dec + 1.0 / lim.a_acc;
    double disc = gap * gap - 2.0 * k * deficit;
    if (disc < -1e-12) throw std::logic_error("epoch gap too short for the requested slowdown");
    double dv = 2.0 * deficit / (gap + std::sqrt(std::max(0.0, disc)));
    double t1 = dv / lim.a_dec, t2 = dv / lim.a_acc;
    double tc = std::max(0.0, gap - t1 - t2);
    plan.segments = {{t1, -lim.a_dec}, {tc, 0.0}, {t2, lim.a_acc}};
    return plan;
}

double lemma1_closed_form(const CollectedInfo& info, const FleetSnapshot& snap,
                          const LongHorizonParams& params, const RoadGeometry& geo) {
    const VehicleId ego = info.ego;
    const int r = snap.at(ego).road;
    const double p_ego = info.eq_pos.at(ego);
    const double c_ego = centered(p_ego, r, geo);
    std::optional<VehicleId> sm;
    for (VehicleId id : info.members) {
        if (id == ego) continue;
        double p = info.eq_pos.at(id);
        if (centered(p, snap.at(id).road, geo) < c_ego)
            throw std::invalid_argument("member behind ego in centered position");
        if (!sm || p < info.eq_pos.at(*sm) || (p == info.eq_pos.at(*sm) && id < *sm)) sm = id;
        for (VehicleId other : info.members) {
            if (other == ego || other <= id) continue;
            const FleetEntry& a = snap.at(id);
            const FleetEntry& b = snap.at(other);
            double pa = p, pb = info.eq_pos.at(other);
            bool ok;
            if (a.road == b.road) {
                bool a_first = snap.lane_rank(id) < snap.lane_rank(other);
                ok = (a_first ? pa - pb : pb - pa) >= params.spacing() - 1e-9;
            } else {
                ok = pa - pb >= params.spacing() + geo.zone_extent(a.road) - 1e-9 ||
                     pb - pa >= params.spacing() + geo.zone_extent(b.road) - 1e-9;
            }
            if (!ok) throw std::invalid_argument("members are not separated");
        }
    }
    if (!sm) return p_ego;
    int rs = snap.at(*sm).road;
    double ps = info.eq_pos.at(*sm);
    if (centered(ps, rs, geo) == c_ego)
        throw std::invalid_argument("ego and nearest member share a centered position");
    double need = params.spacing() + (rs != r ? geo.zone_extent(rs) : 0.0);
    return std::min(ps - need, p_ego);
}

}  // namespace xsched
