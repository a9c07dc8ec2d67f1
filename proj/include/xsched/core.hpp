#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace xsched {

using VehicleId = std::uint32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct KinematicLimits {
    double length = 5.0;
    double v_max = 20.0;
    double a_dec = 4.0;  // magnitude of the strongest deceleration
    double a_acc = 3.0;
};

struct RoadGeometry {
    int roads = 3;
    std::vector<double> extent;  // zone length d_r per road
    double range_A = 600.0;
    double range_B = 200.0;

    double zone_extent(int road) const;
};

struct VehicleState {
    double position = 0.0;  // front bumper, 0 at the zone entrance
    double velocity = 0.0;
};

enum class VehicleKind { cooperative, noncooperative };

struct Vehicle {
    VehicleId id = 0;
    int road = 0;
    VehicleKind kind = VehicleKind::cooperative;
    KinematicLimits limits;
    double spawn_time = 0.0;
    double initial_position = 0.0;  // position at spawn_time, velocity v_max

    bool cooperative() const { return kind == VehicleKind::cooperative; }
};

struct Segment {
    double duration;
    double acceleration;
};

// One constant-acceleration piece after saturation splitting.
struct Piece {
    double t0;
    double p0;
    double v0;
    double a;
    double duration;

    double end_time() const { return t0 + duration; }
    VehicleState at(double t) const;
};

// Piecewise constant-acceleration motion. Commanded accelerations are cut at
// v = 0 and v = v_max and the remainder is held at the bound, so every piece
// has exact endpoints. The last piece always has infinite duration.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(double origin_time, VehicleState origin, std::span<const Segment> segments,
               const KinematicLimits& limits);

    double origin_time() const { return pieces_.front().t0; }
    VehicleState origin_state() const { return {pieces_.front().p0, pieces_.front().v0}; }
    std::span<const Piece> pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }

    VehicleState evaluate(double t) const;
    double acceleration_at(double t) const;

    // First time at or after the origin with position >= x (kInf if never).
    double time_at_position(double x) const;

    // Keep motion before t and continue from the state at t with `tail`.
    Trajectory spliced(double t, std::span<const Segment> tail) const&;
    Trajectory spliced(double t, std::span<const Segment> tail) &&;

    const KinematicLimits& limits() const { return limits_; }

private:
    std::size_t piece_index(double t) const;
    void append(double t, VehicleState s, std::span<const Segment> segments);

    std::vector<Piece> pieces_;
    KinematicLimits limits_;
};

// Farthest point the vehicle can still stop at.
double stop_envelope(VehicleState s, const KinematicLimits& lim);

// Full throttle (max = true) or full braking from s at time t0, forever.
Trajectory extreme_trajectory(double t0, VehicleState s, bool max, const KinematicLimits& lim);

// State after holding acceleration a for dt, saturating at 0 and v_max.
VehicleState advance(VehicleState s, double a, double dt, const KinematicLimits& lim);

// Time to cover `dist` >= 0 from speed v0 accelerating at a > 0 up to v_max.
double time_to_cover(double v0, double dist, double a, double v_max);

}  // namespace xsched
