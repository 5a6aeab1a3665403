#include "arena/swarm.hpp"

#include <algorithm>
#include <cmath>

#include "arena/rng.hpp"

namespace arena {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kSenseTag = 0x73656e7365ull;
constexpr std::uint64_t kStepTag = 0x737465'70ull;

Point2 clamp_to_bounds(Point2 p, const ArenaBounds& b, double margin) {
    return {std::clamp(p.x, margin, b.width_mm - margin),
            std::clamp(p.y, margin, b.height_mm - margin)};
}

double sample_clamped(const Field& field, Point2 p) {
    const double eps = 1e-9;
    p.x = std::clamp(p.x, 0.0, field.width_mm() - eps);
    p.y = std::clamp(p.y, 0.0, field.height_mm() - eps);
    return sample_field(field, p);
}

std::uint8_t tile_label_at(const std::vector<std::uint8_t>& labels, const TileLayer& tiles,
                           Point2 p) {
    const int i = std::clamp(static_cast<int>(std::floor(p.x / tiles.tile_size)), 0, tiles.tw - 1);
    const int j = std::clamp(static_cast<int>(std::floor(p.y / tiles.tile_size)), 0, tiles.th - 1);
    return labels[static_cast<std::size_t>(j) * tiles.tw + i];
}

SensorReading sense_with_labels(const Robot& robot, const Field& field, const TileLayer& tiles,
                                const std::vector<std::uint8_t>& labels, std::uint64_t t,
                                const BehaviorParams& params, std::uint64_t seed) {
    SensorReading r;
    const double off = params.sensor_offset;
    const auto antenna = [&](double da) -> Point2 {
        const double a = robot.heading + da;
        return {robot.pos.x + off * std::cos(a), robot.pos.y + off * std::sin(a)};
    };
    r.center_value = sample_clamped(field, robot.pos);
    r.left_value = sample_clamped(field, antenna(params.sensor_angle));
    r.right_value = sample_clamped(field, antenna(-params.sensor_angle));
    if (params.sensor_noise_sigma > 0.0) {
        const auto noisy = [&](double v, std::uint64_t k) {
            return std::max(0.0, v + params.sensor_noise_sigma *
                                         rng::gauss_at(seed, kSenseTag, t, robot.id, k));
        };
        r.center_value = noisy(r.center_value, 0);
        r.left_value = noisy(r.left_value, 1);
        r.right_value = noisy(r.right_value, 2);
    }
    r.tile_label = tile_label_at(labels, tiles, robot.pos);
    return r;
}

// advance and reflect heading specularly at the walls
void advance(Robot& r, double dt, const ArenaBounds& bounds) {
    double nx = r.pos.x + r.speed * dt * std::cos(r.heading);
    double ny = r.pos.y + r.speed * dt * std::sin(r.heading);
    const double m = r.radius;
    if (nx < m) {
        nx = 2.0 * m - nx;
        r.heading = wrap_angle(kPi - r.heading);
    } else if (nx > bounds.width_mm - m) {
        nx = 2.0 * (bounds.width_mm - m) - nx;
        r.heading = wrap_angle(kPi - r.heading);
    }
    if (ny < m) {
        ny = 2.0 * m - ny;
        r.heading = wrap_angle(-r.heading);
    } else if (ny > bounds.height_mm - m) {
        ny = 2.0 * (bounds.height_mm - m) - ny;
        r.heading = wrap_angle(-r.heading);
    }
    r.pos = clamp_to_bounds({nx, ny}, bounds, m);
}

}  // namespace

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

SensorReading sense_robot(const Robot& robot, const Field& field, const TileLayer& tiles,
                          std::uint64_t t, const BehaviorParams& params, std::uint64_t seed) {
    return sense_with_labels(robot, field, tiles, tiles.labels_at(t), t, params, seed);
}

RobotStep step_robot(const Robot& robot, const SensorReading& reading, double dt,
                     const BehaviorParams& params, const ArenaBounds& bounds, std::uint64_t seed,
                     std::uint64_t t) {
    if (dt <= 0.0) throw std::invalid_argument("step_robot: dt must be > 0");
    Robot r = robot;
    std::optional<DepositEvent> dep;
    const double diff = reading.left_value - reading.right_value;
    const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);

    switch (r.behavior) {
        case Behavior::RandomWalkDeposit:
            r.heading = wrap_angle(r.heading + params.sigma_turn * std::sqrt(dt) *
                                                   rng::gauss_at(seed, kStepTag, t, r.id, 0));
            advance(r, dt, bounds);
            dep = DepositEvent{r.pos, params.deposit_rate * dt};
            break;
        case Behavior::GradientFollow:
            r.heading = wrap_angle(r.heading + params.k_turn * sgn * dt);
            advance(r, dt, bounds);
            break;
        case Behavior::Disperse:
            // steer away from higher concentration, mark visited ground
            r.heading = wrap_angle(r.heading - params.k_turn * sgn * dt);
            advance(r, dt, bounds);
            dep = DepositEvent{r.pos, params.deposit_rate * dt};
            break;
        case Behavior::TileVote: {
            const bool keep =
                rng::uniform01_at(seed, kStepTag, t, r.id, 1) >= params.opinion_noise;
            r.opinion = keep ? reading.tile_label
                             : static_cast<std::uint8_t>(1 - reading.tile_label);
            r.heading = wrap_angle(r.heading + params.sigma_turn * std::sqrt(dt) *
                                                   rng::gauss_at(seed, kStepTag, t, r.id, 0));
            advance(r, dt, bounds);
            break;
        }
    }
    return {r, dep};
}

SwarmStep step_swarm(const std::vector<Robot>& robots, const Field& field, const TileLayer& tiles,
                     const ArenaBounds& bounds, std::uint64_t t, double dt,
                     const BehaviorParams& params, std::uint64_t seed) {
    const auto labels = tiles.labels_at(t);

    SwarmStep out;
    out.robots.reserve(robots.size());
    for (const Robot& r : robots) {
        const SensorReading reading = sense_with_labels(r, field, tiles, labels, t, params, seed);
        RobotStep stepped = step_robot(r, reading, dt, params, bounds, seed, t);
        if (stepped.deposit) out.deposits.push_back(*stepped.deposit);
        out.robots.push_back(std::move(stepped.robot));
    }

    // Jacobi-style overlap resolution: displacements computed from the state
    // at sweep start, so the result is independent of list order.
    for (int sweep = 0; sweep < 8; ++sweep) {
        std::vector<Point2> push(out.robots.size(), Point2{0.0, 0.0});
        bool any = false;
        for (std::size_t i = 0; i < out.robots.size(); ++i) {
            for (std::size_t j = i + 1; j < out.robots.size(); ++j) {
                Robot &a = out.robots[i], &b = out.robots[j];
                const double target = a.radius + b.radius;
                double dx = b.pos.x - a.pos.x, dy = b.pos.y - a.pos.y;
                double d = std::hypot(dx, dy);
                if (d >= target) continue;
                any = true;
                if (d < 1e-9) {
                    // coincident centers: deterministic direction from the ids
                    const double ang = 2.0 * kPi *
                                       rng::uniform01_at(seed, 0x636f6c6cull,
                                                         std::min(a.id, b.id), std::max(a.id, b.id));
                    dx = std::cos(ang);
                    dy = std::sin(ang);
                    d = 1.0;
                }
                const double half = 0.5 * (target - d) / d;
                push[i].x -= dx * half;
                push[i].y -= dy * half;
                push[j].x += dx * half;
                push[j].y += dy * half;
            }
        }
        if (!any) break;
        for (std::size_t i = 0; i < out.robots.size(); ++i) {
            Robot& r = out.robots[i];
            r.pos = clamp_to_bounds({r.pos.x + push[i].x, r.pos.y + push[i].y}, bounds, r.radius);
        }
    }
    return out;
}

}  // namespace arena
