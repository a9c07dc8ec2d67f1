#include "xsched/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace xsched {

double relative_cost(const Vehicle& v, const Trajectory& traj, double t0) {
    if (!(t0 >= 0.0) || !std::isfinite(t0)) throw std::domain_error("t0 outside the vehicle log");
    const KinematicLimits& L = v.limits;
    VehicleState s = traj.evaluate(v.spawn_time + t0);
    double gap = L.v_max - s.velocity;
    return v.initial_position + L.v_max * t0 - (s.position - gap * gap / (2.0 * L.a_acc));
}

double relative_cost(const SimResult& res, VehicleId id, double t0) {
    if (id >= res.vehicles.size()) throw std::out_of_range("unknown vehicle");
    const VehicleLog& log = res.vehicles[id];
    if (log.vehicle.spawn_time + t0 > res.end_time + 1e-9)
        throw std::domain_error("t0 after the end of the run");
    return relative_cost(log.vehicle, log.trajectory, t0);
}

FleetStats fleet_stats(const SimResult& res) {
    FleetStats st;
    double sum = 0.0;
    for (const VehicleLog& v : res.vehicles) {
        if (!v.vehicle.cooperative() || !std::isfinite(v.clearance_time)) continue;
        sum += relative_cost(v.vehicle, v.trajectory, v.clearance_time - v.vehicle.spawn_time);
        ++st.count;
    }
    if (st.count > 0) st.mean_cost = sum / static_cast<double>(st.count);
    if (res.end_time > 0.0) st.throughput = static_cast<double>(st.count) / res.end_time;
    return st;
}

MeanSE mean_se(std::span<const double> xs) {
    MeanSE out;
    if (xs.empty()) return out;
    double n = static_cast<double>(xs.size());
    for (double x : xs) out.mean += x;
    out.mean /= n;
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
    return out;
}

}  // namespace xsched
