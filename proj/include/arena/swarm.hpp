#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "arena/field.hpp"

// Simulated robot behaviors closing the loop at desk scale: robots sense the
// virtual environment under their position and move. Behavior models are
// intentionally minimal and non-canonical; they exist to exercise the rest of
// the pipeline with plausible swarm phenomenology.

namespace arena {

enum class Behavior { RandomWalkDeposit, GradientFollow, Disperse, TileVote };

struct Robot {
    std::uint64_t id = 0;
    Point2 pos;              // world mm
    double heading = 0.0;    // radians in [-pi, pi)
    double speed = 0.0;      // mm/s
    double radius = 0.0;     // mm
    std::uint8_t opinion = 0;
    Behavior behavior = Behavior::RandomWalkDeposit;
};

struct SensorReading {
    double center_value = 0.0;
    double left_value = 0.0;   // at heading + sensor_angle, sensor_offset ahead
    double right_value = 0.0;  // at heading - sensor_angle
    std::uint8_t tile_label = 0;
};

struct BehaviorParams {
    double sensor_angle = 0.5;      // rad
    double sensor_offset = 30.0;    // mm ahead
    double sensor_noise_sigma = 0.0;
    double sigma_turn = 1.2;        // rad/sqrt(s), random-walk heading diffusion
    double k_turn = 2.0;            // rad/s, gradient steering rate
    double deposit_rate = 1.0;      // concentration per second
    double opinion_noise = 0.0;     // [0,1]
};

struct ArenaBounds {
    double width_mm = 0.0;
    double height_mm = 0.0;
};

struct DepositEvent {
    Point2 pos;
    double amount = 0.0;
};

double wrap_angle(double a);  // into [-pi, pi)

SensorReading sense_robot(const Robot& robot, const Field& field, const TileLayer& tiles,
                          std::uint64_t t, const BehaviorParams& params, std::uint64_t seed);

struct RobotStep {
    Robot robot;
    std::optional<DepositEvent> deposit;
};

// Pure given the keyed rng draws; boundary handling is specular reflection.
RobotStep step_robot(const Robot& robot, const SensorReading& reading, double dt,
                     const BehaviorParams& params, const ArenaBounds& bounds, std::uint64_t seed,
                     std::uint64_t t);

struct SwarmStep {
    std::vector<Robot> robots;
    std::vector<DepositEvent> deposits;
};

// Senses all robots against the same pre-tick snapshot, steps them, then
// resolves overlaps Jacobi-style (at most 8 sweeps). Order-independent up to
// list permutation.
SwarmStep step_swarm(const std::vector<Robot>& robots, const Field& field, const TileLayer& tiles,
                     const ArenaBounds& bounds, std::uint64_t t, double dt,
                     const BehaviorParams& params, std::uint64_t seed);

}  // namespace arena
