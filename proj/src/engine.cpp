#include "xsched/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace xsched {

namespace {

enum class Stage { pending, long_range, short_range, done };
enum class EventKind { spawn = 0, epoch = 1, decision = 2 };

struct Event {
    double time;
    EventKind kind;
    VehicleId id;
    std::uint64_t tick;  // decision index since hand-off
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.id > b.id;
    }
};

struct Agent {
    Stage stage = Stage::pending;
    bool handoff_pending = false;
    double handoff_at = kInf;
    double exit_time = kInf;  // known in advance for non-cooperative vehicles
    std::unordered_map<VehicleId, double> last_stamp;
};

class Engine {
public:
    Engine(const Scenario& sc, Policy policy, const EngineOptions& opt)
        : sc_(sc), cfg_(sc.config), opt_(opt), rng_(seed_for(sc.config.seed)) {
        res_.policy = policy;
        res_.config = cfg_;
        res_.geometry = sc.geometry;
        res_.long_range = sc.long_range;
        agents_.resize(sc.vehicles.size());
        for (const ScenarioVehicle& sv : sc.vehicles) {
            VehicleLog log;
            log.vehicle = sv.vehicle;
            if (sv.vehicle.cooperative()) {
                Segment cruise{kInf, 0.0};
                log.trajectory = Trajectory(sv.vehicle.spawn_time,
                                            {sv.vehicle.initial_position, sv.vehicle.limits.v_max},
                                            std::span<const Segment>(&cruise, 1), sv.vehicle.limits);
            } else {
                log.trajectory = noncoop_trajectory(sv, sc);
                agents_[sv.vehicle.id].exit_time = log.trajectory.time_at_position(zone(sv.vehicle));
            }
            res_.vehicles.push_back(std::move(log));
            queue_.push({sv.vehicle.spawn_time, EventKind::spawn, sv.vehicle.id, 0});
            if (sv.vehicle.cooperative()) last_coop_spawn_ = std::max(last_coop_spawn_, sv.vehicle.spawn_time);
        }
        cap_ = cfg_.horizon + cfg_.drain;
        if (cfg_.range_A > 0.0) queue_.push({0.0, EventKind::epoch, 0, 0});
    }

    SimResult run() {
        std::vector<Event> batch;
        double now = 0.0;
        while (!queue_.empty()) {
            double t = queue_.top().time;
            if (t > cap_) {
                res_.truncated = remaining_coop() > 0;
                break;
            }
            now = t;
            batch.clear();
            while (!queue_.empty() && queue_.top().time == t) {
                batch.push_back(queue_.top());
                queue_.pop();
            }
            for (const Event& e : batch)
                if (e.kind == EventKind::spawn) spawn(e.id, t);
            for (const Event& e : batch)
                if (e.kind == EventKind::epoch) epoch(t);
            std::vector<Event> ticks;
            for (const Event& e : batch)
                if (e.kind == EventKind::decision) ticks.push_back(e);
            if (!ticks.empty()) decide(ticks, t);
        }
        double end = 0.0;
        for (std::size_t k = 0; k < res_.vehicles.size(); ++k) {
            const VehicleLog& v = res_.vehicles[k];
            double fin = v.vehicle.cooperative() ? v.clearance_time : agents_[k].exit_time;
            end = std::max(end, std::isfinite(fin) ? fin : now);
        }
        res_.end_time = res_.truncated ? std::max(end, now) : end;
        if (opt_.audit) {
            std::vector<TrackedVehicle> fleet;
            for (const VehicleLog& v : res_.vehicles) fleet.push_back({&v.vehicle, &v.trajectory});
            res_.violations = audit(fleet, sc_.geometry, res_.end_time + 1.0);
        }
        return std::move(res_);
    }

private:
    static std::uint64_t seed_for(std::uint64_t seed) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 4u};
        std::uint64_t out;
        seq.generate(reinterpret_cast<std::uint32_t*>(&out), reinterpret_cast<std::uint32_t*>(&out) + 2);
        return out;
    }

    double zone(const Vehicle& v) const { return v.limits.length + sc_.geometry.zone_extent(v.road); }

    std::size_t remaining_coop() const {
        std::size_t n = 0;
        for (std::size_t k = 0; k < agents_.size(); ++k)
            if (res_.vehicles[k].vehicle.cooperative() && agents_[k].stage != Stage::done) ++n;
        return n;
    }

    void spawn(VehicleId id, double t) {
        const Vehicle& v = res_.vehicles[id].vehicle;
        if (!v.cooperative()) {
            agents_[id].stage = Stage::done;
            noncoop_live_.push_back(id);
            return;
        }
        agents_[id].stage = Stage::long_range;
        coop_live_.push_back(id);
        plan_handoff(id, t, cfg_.range_A > 0.0 ? next_epoch_after(t) : kInf);
    }

    double next_epoch_after(double t) const {
        double gap = sc_.long_range.epoch_gap;
        double k = std::floor(t / gap) + 1.0;
        return k * gap;
    }

    // Schedule the hand-off if the current plan reaches -B before `limit`.
    void plan_handoff(VehicleId id, double t, double limit) {
        Agent& ag = agents_[id];
        double cross = res_.vehicles[id].trajectory.time_at_position(-cfg_.range_B);
        cross = std::max(cross, t);
        if (cross <= limit) {
            ag.handoff_pending = true;
            ag.handoff_at = cross;
            queue_.push({cross, EventKind::decision, id, 0});
        }
    }

    void epoch(double t) {
        std::vector<FleetEntry> entries;
        for (VehicleId id : coop_live_) {
            const VehicleLog& v = res_.vehicles[id];
            entries.push_back({id, v.vehicle.road,
                               v.vehicle.initial_position - v.vehicle.limits.v_max * v.vehicle.spawn_time,
                               v.trajectory.evaluate(t).position});
        }
        FleetSnapshot snap(entries, sc_.geometry.roads);
        struct Plan {
            VehicleId id;
            EpochPlan plan;
            double p_now, p_star;
        };
        std::vector<Plan> plans;
        for (VehicleId id : coop_live_) {
            const Agent& ag = agents_[id];
            if (ag.stage != Stage::long_range || ag.handoff_pending) continue;
            CollectedInfo info = collect_info(id, snap, sc_.long_range, sc_.geometry);
            OrderSolution sol = solve_order_opt(info, snap, sc_.long_range, sc_.geometry);
            double p_now = snap.at(id).position;
            double p_star = sol.target.at(id);
            plans.push_back({id, long_horizon_step(p_now, p_star, sc_.long_range,
                                                   res_.vehicles[id].vehicle.limits),
                             p_now, p_star});
        }
        double next = t + sc_.long_range.epoch_gap;
        for (Plan& p : plans) {
            VehicleLog& v = res_.vehicles[p.id];
            p.plan.segments.push_back({kInf, 0.0});
            v.trajectory = std::move(v.trajectory).spliced(t, p.plan.segments);
            res_.epochs.push_back({p.id, t, p.p_now, p.p_star, p.plan.target - p.p_now});
            plan_handoff(p.id, t, next);
        }
        bool more = t < last_coop_spawn_;
        for (VehicleId id : coop_live_)
            if (agents_[id].stage == Stage::long_range && !agents_[id].handoff_pending) more = true;
        if (more && next <= cap_) queue_.push({next, EventKind::epoch, 0, 0});
    }

    Observation observe(VehicleId observer, VehicleId subject, double t, double max_delay) {
        const VehicleLog& s = res_.vehicles[subject];
        double& last = agents_[observer].last_stamp[subject];
        double stamp;
        if (std::isinf(max_delay)) {
            stamp = s.vehicle.spawn_time;
        } else {
            double delay = std::uniform_real_distribution<double>(0.0, max_delay)(rng_);
            stamp = std::max({last, t - delay, s.vehicle.spawn_time});
        }
        stamp = std::min(stamp, t);
        last = stamp;
        return {subject, s.trajectory.evaluate(stamp), stamp};
    }

    void add_adversary(Knowledge& k, VehicleId observer, VehicleId subject, double t, double delay) {
        Observation o = observe(observer, subject, t, delay);
        const Vehicle& v = res_.vehicles[subject].vehicle;
        double z = zone(v);
        if (o.state.position >= z) return;
        k.adversaries.push_back({o, v.limits, z});
    }

    Knowledge knowledge_for(VehicleId id, double t) {
        Knowledge k;
        const VehicleLog& me = res_.vehicles[id];
        for (VehicleId j : noncoop_live_) add_adversary(k, id, j, t, cfg_.observation_delay());
        if (res_.policy == Policy::two_stage) {
            if (me.predecessor) {
                VehicleId j = *me.predecessor;
                Observation o = observe(id, j, t, cfg_.tau);
                const Vehicle& pv = res_.vehicles[j].vehicle;
                if (o.state.position < zone(pv))
                    k.predecessor = PredecessorView{
                        o, follow_clearance(me.vehicle.limits.length, me.vehicle.road, pv.road,
                                            sc_.geometry)};
            }
        } else {
            for (VehicleId j : short_live_) {
                if (j == id) continue;
                const VehicleLog& other = res_.vehicles[j];
                Observation o = observe(id, j, t, cfg_.tau);
                double z = zone(other.vehicle);
                if (o.state.position >= z) continue;
                // Lower-priority vehicles are respected only once they are committed.
                if (other.priority > me.priority && !in_region_C(o.state, other.vehicle.limits)) continue;
                k.adversaries.push_back({o, other.vehicle.limits, z});
            }
        }
        return k;
    }

    void handoff(VehicleId id, double t) {
        Agent& ag = agents_[id];
        VehicleLog& v = res_.vehicles[id];
        ag.stage = Stage::short_range;
        ag.handoff_pending = false;
        v.handoff_time = t;
        v.priority = next_priority_++;
        // The most recent hand-off still inside is the tail of the passing order.
        std::optional<VehicleId> tail;
        int best = -1;
        for (VehicleId j : short_live_)
            if (res_.vehicles[j].priority > best) {
                best = res_.vehicles[j].priority;
                tail = j;
            }
        v.predecessor = tail;
        double p = v.trajectory.evaluate(t).position;
        double slack = kInf;
        const double l = v.vehicle.limits.length, delta = sc_.long_range.delta;
        for (VehicleId j : coop_live_) {
            if (j == id) continue;
            const VehicleLog& o = res_.vehicles[j];
            double q = o.trajectory.evaluate(t).position;
            bool cross = o.vehicle.road != v.vehicle.road;
            double need_me = l + delta + (cross ? sc_.geometry.zone_extent(v.vehicle.road) : 0.0);
            double need_o = l + delta + (cross ? sc_.geometry.zone_extent(o.vehicle.road) : 0.0);
            slack = std::min(slack, std::max(p - q - need_me, q - p - need_o));
        }
        v.handoff_slack = slack;
        short_live_.push_back(id);
    }

    void decide(const std::vector<Event>& ticks, double t) {
        struct Pending {
            VehicleId id;
            std::uint64_t tick;
            Decision d;
        };
        std::vector<Pending> out;
        std::vector<Event> sorted = ticks;
        std::sort(sorted.begin(), sorted.end(),
                  [](const Event& a, const Event& b) { return a.id < b.id; });
        for (const Event& e : sorted)
            if (agents_[e.id].stage == Stage::long_range) handoff(e.id, t);
        const double dt = cfg_.tick_gap;
        for (const Event& e : sorted) {
            VehicleLog& v = res_.vehicles[e.id];
            VehicleState s = v.trajectory.evaluate(t);
            if (s.position >= zone(v.vehicle)) {
                finish(e.id, t);
                continue;
            }
            Knowledge k = knowledge_for(e.id, t);
            EgoProfile ego{v.vehicle.limits, zone(v.vehicle), v.vehicle.spawn_time,
                           v.vehicle.initial_position};
            Decision d = res_.policy == Policy::two_stage
                             ? algorithm2_step(s, t, dt, k, ego, opt_.short_range)
                             : baseline_minimax_step(s, t, dt, k, ego, opt_.short_range);
            out.push_back({e.id, e.tick, d});
        }
        for (const Pending& p : out) {
            VehicleLog& v = res_.vehicles[p.id];
            Segment seg{dt, p.d.acceleration};
            v.trajectory = std::move(v.trajectory).spliced(t, std::span<const Segment>(&seg, 1));
            if (opt_.record_decisions)
                res_.decisions.push_back({p.id, t, p.d.branch, p.d.acceleration});
            double next = v.handoff_time + static_cast<double>(p.tick + 1) * dt;
            queue_.push({next, EventKind::decision, p.id, p.tick + 1});
        }
        prune(t);
    }

    void finish(VehicleId id, double t) {
        VehicleLog& v = res_.vehicles[id];
        Segment go{kInf, v.vehicle.limits.a_acc};
        v.trajectory = std::move(v.trajectory).spliced(t, std::span<const Segment>(&go, 1));
        v.clearance_time = v.trajectory.time_at_position(zone(v.vehicle));
        agents_[id].stage = Stage::done;
    }

    // Drop vehicles that everyone has certainly observed leaving.
    void prune(double t) {
        double horizon_nc = cfg_.observation_delay();
        auto gone = [&](VehicleId j, double exit, double delay) {
            (void)j;
            return std::isfinite(delay) && exit + delay < t;
        };
        std::erase_if(noncoop_live_, [&](VehicleId j) {
            return gone(j, agents_[j].exit_time, horizon_nc);
        });
        std::erase_if(short_live_, [&](VehicleId j) {
            return agents_[j].stage == Stage::done && gone(j, res_.vehicles[j].clearance_time, cfg_.tau);
        });
        std::erase_if(coop_live_, [&](VehicleId j) { return agents_[j].stage == Stage::done; });
    }

    const Scenario& sc_;
    const ScenarioConfig& cfg_;
    EngineOptions opt_;
    std::mt19937_64 rng_;
    SimResult res_;
    std::vector<Agent> agents_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::vector<VehicleId> coop_live_, short_live_, noncoop_live_;
    int next_priority_ = 0;
    double cap_ = 0.0;
    double last_coop_spawn_ = -kInf;
};

}  // namespace

const char* policy_name(Policy p) { return p == Policy::two_stage ? "two_stage" : "baseline"; }

Policy parse_policy(const std::string& s) {
    if (s == "two_stage") return Policy::two_stage;
    if (s == "baseline") return Policy::baseline;
    throw std::invalid_argument("unknown policy '" + s + "'");
}

std::size_t SimResult::cooperative_violations() const { return violations.size(); }

SimResult simulate(const Scenario& sc, Policy policy, const EngineOptions& opt) {
    return Engine(sc, policy, opt).run();
}

}  // namespace xsched
