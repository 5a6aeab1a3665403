#include <cmath>

#include "arena/config.hpp"
#include "doctest.h"

using namespace arena;

namespace {

const char* kMinimal = R"({
  "arena": {"width_mm": 1024, "height_mm": 768},
  "robots": {"placement": "explicit", "positions": [[500, 400]]}
})";

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("minimal scenario gets documented defaults") {
    const ScenarioConfig cfg = parse_scenario(kMinimal);
    CHECK(cfg.arena.width_mm == 1024.0);
    CHECK(cfg.robots.count == 1);
    CHECK(cfg.hough.dp == 2.0);
    CHECK(cfg.blur.sigma == 1.0);
    CHECK(cfg.blur.ksize == 5);
    CHECK(cfg.hough.edge_threshold == 60.0);
    CHECK(cfg.tracker.confirm_hits == 3);
    CHECK(cfg.tracker.max_misses == 5);
    CHECK(cfg.tracker.radius_smoothing_alpha == 0.3);
    CHECK(cfg.tracker.velocity_smoothing_beta == 0.5);
    CHECK(cfg.run.tick_rate == 38.0);
    // default registration scales the arena onto the camera frame
    const Point2 corner = map_point(cfg.camera.world_to_camera, {1024.0, 768.0});
    CHECK(corner.x == doctest::Approx(cfg.camera.width));
    CHECK(corner.y == doctest::Approx(cfg.camera.height));

    const auto robots = cfg.make_robots();
    REQUIRE(robots.size() == 1);
    CHECK(robots[0].pos.x == 500.0);
}

TEST_CASE("unknown keys are rejected with their path") {
    const char* text = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "explicit", "positions": [[500, 400]]},
      "tracker": {"gate_radius": 20, "confirm_hitz": 3}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("confirm_hitz"), ConfigError);
}

TEST_CASE("stability violations name field.diffusion_d") {
    const char* text = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "explicit", "positions": [[500, 400]]},
      "field": {"cell_size_mm": 2.0, "diffusion_d": 100.0},
      "run": {"tick_rate": 10}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("field.diffusion_d"),
                         ConfigError);
}

TEST_CASE("invariant violations name the field path") {
    const char* bad_amplitude = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "explicit", "positions": [[500, 400]]},
      "tiles": {"noise_amplitude": 1.5}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad_amplitude), doctest::Contains("noise_amplitude"),
                         ConfigError);

    const char* bad_position = R"({
      "arena": {"width_mm": 100, "height_mm": 100},
      "robots": {"placement": "explicit", "positions": [[500, 400]]}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(bad_position), doctest::Contains("robots.positions[0]"),
                         ConfigError);
}

TEST_CASE("placements are deterministic under the master seed") {
    const char* text = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "cluster", "count": 20, "cluster_center": [512, 384],
                 "cluster_radius": 100},
      "run": {"master_seed": 7}
    })";
    const ScenarioConfig cfg = parse_scenario(text);
    const auto a = cfg.make_robots();
    const auto b = cfg.make_robots();
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pos.x == b[i].pos.x);
        CHECK(std::hypot(a[i].pos.x - 512.0, a[i].pos.y - 384.0) <= 100.0 + 1e-9);
    }
}

TEST_CASE("objects and behavior blocks parse") {
    const char* text = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "uniform", "count": 5},
      "behavior": {"type": "tile_vote", "opinion_noise": 0.1, "speed_mm_s": 30},
      "objects": [
        {"id": 1, "shape": {"type": "disc", "center": [100, 100], "radius": 50},
         "effect": {"type": "deposit_source", "rate": 2.0}},
        {"id": 2, "shape": {"type": "rect", "min": [0, 0], "max": [50, 50]},
         "effect": {"type": "blocker"}}
      ]
    })";
    const ScenarioConfig cfg = parse_scenario(text);
    CHECK(cfg.behavior_type == Behavior::TileVote);
    CHECK(cfg.robot_speed == 30.0);
    REQUIRE(cfg.objects.size() == 2);
    CHECK(std::holds_alternative<DepositSourceEffect>(cfg.objects[0].effect));
    CHECK(std::holds_alternative<BlockerEffect>(cfg.objects[1].effect));
}

TEST_CASE("frames_in mode requires a frames directory") {
    const char* text = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "uniform", "count": 1},
      "run": {"mode": "frames_in"}
    })";
    CHECK_THROWS_WITH_AS(parse_scenario(text), doctest::Contains("frames_dir"), ConfigError);
}

TEST_SUITE_END();
