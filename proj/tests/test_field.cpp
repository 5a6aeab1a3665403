#include <cmath>

#include "arena/field.hpp"
#include "arena/rng.hpp"
#include "doctest.h"

using namespace arena;

TEST_SUITE_BEGIN("field");

TEST_CASE("deposit lands in the containing cell and is additive") {
    Field f(10, 8, 10.0, 0.0, 0.0);
    deposit(f, {35.0, 25.0}, 0.0);
    CHECK(f.total_mass() == 0.0);

    deposit(f, {35.0, 25.0}, 5.0);
    CHECK(f.cell(3, 2) == 5.0);
    CHECK(f.total_mass() == 5.0);

    deposit(f, {35.0, 25.0}, 2.0);
    deposit(f, {39.9, 29.9}, 3.0);
    CHECK(f.cell(3, 2) == 10.0);

    CHECK_THROWS_AS(deposit(f, {-1.0, 5.0}, 1.0), BoundsError);
    CHECK_THROWS_AS(deposit(f, {5.0, 1e9}, 1.0), BoundsError);
    CHECK_THROWS_AS(deposit(f, {5.0, 5.0}, -1.0), std::invalid_argument);
}

TEST_CASE("a uniform field without evaporation is a fixed point") {
    Field f(12, 9, 10.0, 20.0, 0.0);
    for (auto& v : f.values) v = 4.2;
    step_field(f, 1.0);
    for (auto v : f.values) CHECK(v == doctest::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("impulse spreads by the exact 5-point stencil") {
    // coefficient d*dt/cell^2 = 0.1
    Field f(9, 9, 10.0, 10.0, 0.0);
    f.cell(4, 4) = 1.0;
    step_field(f, 1.0);
    CHECK(f.cell(4, 4) == doctest::Approx(0.6));
    CHECK(f.cell(3, 4) == doctest::Approx(0.1));
    CHECK(f.cell(5, 4) == doctest::Approx(0.1));
    CHECK(f.cell(4, 3) == doctest::Approx(0.1));
    CHECK(f.cell(4, 5) == doctest::Approx(0.1));
    CHECK(f.cell(3, 3) == 0.0);
}

TEST_CASE("evaporation-only decay is exactly exponential") {
    Field f(6, 6, 10.0, 0.0, 0.5);
    for (auto& v : f.values) v = 1.0;
    step_field(f, 2.0);
    for (auto v : f.values) CHECK(v == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Field g(6, 6, 10.0, 0.0, 0.3);
    g.cell(2, 3) = 7.0;
    for (int k = 1; k <= 50; ++k) {
        step_field(g, 0.1);
        CHECK(g.cell(2, 3) ==
              doctest::Approx(7.0 * std::exp(-0.3 * 0.1 * k)).epsilon(1e-9));
    }
}

TEST_CASE("diffusion conserves mass with reflective walls") {
    rng::Stream s(9);
    Field f(20, 15, 10.0, 20.0, 0.0);
    for (auto& v : f.values) v = s.uniform01() * 10.0;
    const double mass = f.total_mass();
    for (int k = 0; k < 500; ++k) step_field(f, 1.0);
    CHECK(f.total_mass() == doctest::Approx(mass).epsilon(1e-9));
    for (auto v : f.values) CHECK(v >= 0.0);
}

TEST_CASE("maximum principle under pure diffusion") {
    rng::Stream s(13);
    Field f(16, 16, 10.0, 20.0, 0.0);
    for (auto& v : f.values) v = s.uniform01() * 5.0;
    double lo = *std::min_element(f.values.begin(), f.values.end());
    double hi = *std::max_element(f.values.begin(), f.values.end());
    for (int k = 0; k < 100; ++k) {
        step_field(f, 1.0);
        const double new_lo = *std::min_element(f.values.begin(), f.values.end());
        const double new_hi = *std::max_element(f.values.begin(), f.values.end());
        CHECK(new_lo >= lo - 1e-12);
        CHECK(new_hi <= hi + 1e-12);
        lo = new_lo;
        hi = new_hi;
    }
}

TEST_CASE("blockers wall off diffusion but mass is still conserved") {
    Field f(9, 3, 10.0, 10.0, 0.0);
    std::vector<VirtualObject> objects(1);
    objects[0].shape = RectShape{{40.0, 0.0}, {50.0, 30.0}};  // column i=4
    objects[0].effect = BlockerEffect{};
    const auto mask = blocked_mask(f, objects);
    REQUIRE(!mask.empty());
    CHECK(mask[4] == 1);
    CHECK(mask[3] == 0);

    f.cell(1, 1) = 10.0;
    for (int k = 0; k < 200; ++k) step_field(f, 1.0, mask);
    CHECK(f.total_mass() == doctest::Approx(10.0).epsilon(1e-9));
    // nothing leaks past the wall
    for (int j = 0; j < 3; ++j)
        for (int i = 5; i < 9; ++i) CHECK(f.cell(i, j) == 0.0);
}

TEST_CASE("stability bound is enforced") {
    Field f(8, 8, 10.0, 100.0, 0.0);  // d*dt/cell^2 = 1.0 at dt=1
    CHECK_THROWS_AS(f.check_stability(1.0), std::invalid_argument);
    CHECK_NOTHROW(f.check_stability(0.2));
}

TEST_CASE("bilinear sampling") {
    Field f(4, 4, 10.0, 0.0, 0.0);
    f.cell(1, 1) = 2.0;
    f.cell(2, 1) = 6.0;
    CHECK(sample_field(f, {15.0, 15.0}) == 2.0);  // exact cell center
    CHECK(sample_field(f, {20.0, 15.0}) == 4.0);  // midpoint between centers

    Field u(5, 5, 10.0, 0.0, 0.0);
    for (auto& v : u.values) v = 3.3;
    rng::Stream s(21);
    for (int k = 0; k < 50; ++k)
        CHECK(sample_field(u, {s.uniform01() * 49.9, s.uniform01() * 49.9}) ==
              doctest::Approx(3.3));

    CHECK_THROWS_AS(sample_field(f, {40.0, 5.0}), BoundsError);
}

TEST_CASE("tile frame equals the base pattern when amplitude is zero") {
    TileLayer tiles = TileLayer::checkerboard(4, 3, 100.0);
    for (std::uint64_t t : {0ull, 5ull, 99ull}) {
        const auto colors = make_tile_layer_frame(tiles, t);
        for (std::size_t i = 0; i < colors.size(); ++i)
            CHECK(colors[i] == tiles.base_colors[tiles.pattern[i]]);
    }
}

TEST_CASE("tile noise is deterministic in (seed, tick, tile)") {
    TileLayer tiles = TileLayer::checkerboard(4, 3, 100.0);
    tiles.noise_amplitude = 0.4;
    tiles.noise_seed = 1234;
    for (auto mode : {TileNoiseMode::Flicker, TileNoiseMode::Flip}) {
        tiles.noise_mode = mode;
        CHECK(make_tile_layer_frame(tiles, 7) == make_tile_layer_frame(tiles, 7));
        CHECK(make_tile_layer_frame(tiles, 7) != make_tile_layer_frame(tiles, 8));
    }
}

TEST_CASE("flip mode with amplitude 1 flips every tile every tick") {
    TileLayer tiles = TileLayer::checkerboard(4, 3, 100.0);
    tiles.noise_mode = TileNoiseMode::Flip;
    tiles.noise_amplitude = 1.0;
    tiles.noise_seed = 5;
    auto prev = tiles.labels_at(0);
    CHECK(prev == tiles.pattern);
    for (std::uint64_t t = 1; t <= 6; ++t) {
        const auto cur = tiles.labels_at(t);
        for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur[i] == (1 - prev[i]));
        prev = cur;
    }
}

TEST_CASE("live amplitude changes rebase the flip state") {
    TileLayer tiles = TileLayer::checkerboard(4, 3, 100.0);
    tiles.noise_mode = TileNoiseMode::Flip;
    tiles.noise_amplitude = 1.0;
    tiles.noise_seed = 5;
    const auto at3 = tiles.labels_at(3);
    tiles.set_amplitude(0.0, 3);
    CHECK(tiles.labels_at(3) == at3);
    CHECK(tiles.labels_at(10) == at3);  // frozen after amplitude 0
    CHECK_THROWS_AS(tiles.set_amplitude(1.5, 4), std::invalid_argument);
}

TEST_CASE("deposit sources feed covered cells at rate*dt") {
    Field f(10, 10, 10.0, 0.0, 0.0);
    std::vector<VirtualObject> objects(1);
    objects[0].shape = DiscShape{{50.0, 50.0}, 12.0};
    objects[0].effect = DepositSourceEffect{2.0};
    apply_deposit_sources(f, objects, 0.5);
    int covered = 0;
    for (auto v : f.values)
        if (v > 0.0) {
            CHECK(v == doctest::Approx(1.0));
            ++covered;
        }
    CHECK(covered > 0);
}

TEST_SUITE_END();
