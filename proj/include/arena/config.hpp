#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arena/detect.hpp"
#include "arena/field.hpp"
#include "arena/image.hpp"
#include "arena/render.hpp"
#include "arena/swarm.hpp"
#include "arena/track.hpp"

// Declarative experiment description. The loader is strict: unknown keys and
// invariant violations are errors naming the offending field path.

namespace arena {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RunMode { ClosedLoop, FramesIn, Headless };

enum class Placement { Explicit, Uniform, Cluster };

struct RobotPlacement {
    Placement placement = Placement::Uniform;
    std::size_t count = 1;
    std::vector<Point2> positions;  // explicit mode
    Point2 cluster_center;
    double cluster_radius = 0.0;
};

struct BlurParams {
    double sigma = 1.0;
    int ksize = 5;
};

struct FieldParams {
    double cell_size_mm = 8.0;
    double diffusion_d = 5.0;
    double evaporation_rho = 0.01;
};

struct RunParams {
    double tick_rate = 38.0;  // Hz
    std::uint64_t duration = 500;
    std::uint64_t master_seed = 1;
    RunMode mode = RunMode::Headless;
    std::string track_csv;   // empty = no track log
    std::string event_log;   // empty = no event log
    std::string frames_dir;  // frames_in source / closed_loop export target
};

struct ScenarioConfig {
    ArenaBounds arena{1024.0, 768.0};
    CameraModel camera;
    RenderConfig render;
    std::optional<std::array<double, 9>> camera_to_projector;  // persisted calibration
    HoughParams hough;
    BlurParams blur;
    TrackerParams tracker;
    FieldParams field;
    TileLayer tiles;
    OverlayStyle overlay;
    BehaviorParams behavior;
    Behavior behavior_type = Behavior::RandomWalkDeposit;
    double robot_speed = 20.0;      // mm/s
    double robot_radius_mm = 14.0;  // body radius, mm
    RobotPlacement robots;
    std::vector<VirtualObject> objects;
    RunParams run;

    // cross-module invariants (stability bound, contrast, ranges)
    void validate() const;

    // deterministic initial robot list from the placement block
    std::vector<Robot> make_robots() const;

    Field make_field() const;
};

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);

}  // namespace arena
