#include "xsched/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace xsched {

namespace {

constexpr double kAccelSlack = 1e-9;
constexpr double kTimeSlack = 1e-12;

// Smallest tau >= 0 with p0 + v0 tau + a tau^2 / 2 = p0 + c, c >= 0.
double forward_root(double v0, double a, double c) {
    if (c <= 0.0) return 0.0;
    double disc = std::max(0.0, v0 * v0 + 2.0 * a * c);
    double den = v0 + std::sqrt(disc);
    if (den <= 0.0) return kInf;
    return 2.0 * c / den;
}

}  // namespace

double RoadGeometry::zone_extent(int road) const {
    if (road < 0 || road >= static_cast<int>(extent.size()))
        throw std::out_of_range("road index " + std::to_string(road));
    return extent[static_cast<std::size_t>(road)];
}

VehicleState Piece::at(double t) const {
    double dt = t - t0;
    return {p0 + v0 * dt + 0.5 * a * dt * dt, v0 + a * dt};
}

Trajectory::Trajectory(double origin_time, VehicleState origin, std::span<const Segment> segments,
                       const KinematicLimits& limits)
    : limits_(limits) {
    if (origin.velocity < -kAccelSlack || origin.velocity > limits.v_max + 1e-9)
        throw std::invalid_argument("initial velocity outside [0, v_max]");
    origin.velocity = std::clamp(origin.velocity, 0.0, limits.v_max);
    append(origin_time, origin, segments);
}

void Trajectory::append(double t, VehicleState s, std::span<const Segment> segments) {
    const double vmax = limits_.v_max;
    auto push = [&](double dur, double a) {
        pieces_.push_back({t, s.position, s.velocity, a, dur});
        if (std::isinf(dur)) return;
        VehicleState e = pieces_.back().at(t + dur);
        t += dur;
        s = e;
    };
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const Segment& seg = segments[k];
        if (!(seg.duration >= 0.0))
            throw std::invalid_argument("segment duration must be non-negative");
        if (std::isinf(seg.duration) && k + 1 != segments.size())
            throw std::invalid_argument("only the last segment may be unbounded");
        if (seg.acceleration < -limits_.a_dec - kAccelSlack ||
            seg.acceleration > limits_.a_acc + kAccelSlack)
            throw std::invalid_argument("acceleration outside limits");
        if (seg.duration == 0.0) continue;
        double a = seg.acceleration;
        double dur = seg.duration;
        if (a > 0.0) {
            if (s.velocity >= vmax) {
                s.velocity = vmax;
                push(dur, 0.0);
                continue;
            }
            double t_sat = (vmax - s.velocity) / a;
            if (t_sat < dur) {
                push(t_sat, a);
                s.velocity = vmax;
                push(dur - t_sat, 0.0);
            } else {
                push(dur, a);
            }
        } else if (a < 0.0) {
            if (s.velocity <= 0.0) {
                s.velocity = 0.0;
                push(dur, 0.0);
                continue;
            }
            double t_stop = s.velocity / -a;
            if (t_stop < dur) {
                push(t_stop, a);
                s.velocity = 0.0;
                push(dur - t_stop, 0.0);
            } else {
                push(dur, a);
            }
        } else {
            push(dur, 0.0);
        }
    }
    if (pieces_.empty() || !std::isinf(pieces_.back().duration)) push(kInf, 0.0);
}

std::size_t Trajectory::piece_index(double t) const {
    if (pieces_.empty()) throw std::logic_error("empty trajectory");
    if (t < pieces_.front().t0 - kTimeSlack)
        throw std::domain_error("time precedes trajectory origin");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                               [](double x, const Piece& p) { return x < p.t0; });
    if (it == pieces_.begin()) return 0;
    return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

VehicleState Trajectory::evaluate(double t) const {
    const Piece& p = pieces_[piece_index(t)];
    VehicleState s = p.at(std::max(t, p.t0));
    s.velocity = std::clamp(s.velocity, 0.0, limits_.v_max);
    return s;
}

double Trajectory::acceleration_at(double t) const { return pieces_[piece_index(t)].a; }

double Trajectory::time_at_position(double x) const {
    for (const Piece& p : pieces_) {
        if (p.p0 >= x) return p.t0;
        if (std::isinf(p.duration)) {
            if (p.a < 0.0) return kInf;
            if (p.a == 0.0 && p.v0 <= 0.0) return kInf;
            return p.t0 + forward_root(p.v0, p.a, x - p.p0);
        }
        VehicleState e = p.at(p.end_time());
        if (e.position >= x) return p.t0 + std::min(p.duration, forward_root(p.v0, p.a, x - p.p0));
    }
    return kInf;
}

Trajectory Trajectory::spliced(double t, std::span<const Segment> tail) const& {
    Trajectory copy = *this;
    return std::move(copy).spliced(t, tail);
}

Trajectory Trajectory::spliced(double t, std::span<const Segment> tail) && {
    std::size_t k = piece_index(t);
    VehicleState s = pieces_[k].at(std::max(t, pieces_[k].t0));
    s.velocity = std::clamp(s.velocity, 0.0, limits_.v_max);
    pieces_.resize(k + 1);
    double dur = t - pieces_[k].t0;
    if (dur <= 0.0) pieces_.pop_back();
    else pieces_.back().duration = dur;
    append(t, s, tail);
    return std::move(*this);
}

double stop_envelope(VehicleState s, const KinematicLimits& lim) {
    return s.position + s.velocity * s.velocity / (2.0 * lim.a_dec);
}

Trajectory extreme_trajectory(double t0, VehicleState s, bool max, const KinematicLimits& lim) {
    Segment seg{kInf, max ? lim.a_acc : -lim.a_dec};
    return Trajectory(t0, s, std::span<const Segment>(&seg, 1), lim);
}

VehicleState advance(VehicleState s, double a, double dt, const KinematicLimits& lim) {
    double limit_t = dt;
    if (a > 0.0) limit_t = s.velocity >= lim.v_max ? 0.0 : (lim.v_max - s.velocity) / a;
    else if (a < 0.0) limit_t = s.velocity <= 0.0 ? 0.0 : s.velocity / -a;
    if (limit_t >= dt) return {s.position + s.velocity * dt + 0.5 * a * dt * dt, s.velocity + a * dt};
    double v_end = a > 0.0 ? lim.v_max : 0.0;
    double p = s.position + 0.5 * (s.velocity + v_end) * limit_t + v_end * (dt - limit_t);
    return {p, v_end};
}

double time_to_cover(double v0, double dist, double a, double v_max) {
    if (dist <= 0.0) return 0.0;
    if (v0 >= v_max) return dist / v_max;
    double t_sat = (v_max - v0) / a;
    double d_sat = 0.5 * (v0 + v_max) * t_sat;
    if (dist <= d_sat) return forward_root(v0, a, dist);
    return t_sat + (dist - d_sat) / v_max;
}

}  // namespace xsched
