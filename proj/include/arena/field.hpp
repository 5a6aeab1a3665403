#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "arena/homography.hpp"

// The stigmergic virtual environment: a scalar pheromone grid with explicit
// 5-point diffusion and exponential evaporation, a tiled background with
// deterministic dynamic noise, and virtual objects layered on top.

namespace arena {

using Rgb = std::array<std::uint8_t, 3>;

class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct Field {
    int gw = 0, gh = 0;       // grid cells
    double cell_size = 10.0;  // mm per cell
    std::vector<double> values;
    double diffusion_d = 0.0;      // mm^2/s
    double evaporation_rho = 0.0;  // 1/s

    Field() = default;
    Field(int w, int h, double cell, double d, double rho)
        : gw(w), gh(h), cell_size(cell), values(static_cast<std::size_t>(w) * h, 0.0),
          diffusion_d(d), evaporation_rho(rho) {}

    double& cell(int i, int j) { return values[static_cast<std::size_t>(j) * gw + i]; }
    double cell(int i, int j) const { return values[static_cast<std::size_t>(j) * gw + i]; }

    double width_mm() const { return gw * cell_size; }
    double height_mm() const { return gh * cell_size; }

    double total_mass() const;

    // forward-Euler stability: d * dt / cell^2 <= 0.25
    void check_stability(double dt) const;
};

void deposit(Field& field, Point2 pos_mm, double amount);

// Reflective boundaries; cells under `blocked` (when non-empty, gw*gh flags)
// exchange no mass with their neighbors.
void step_field(Field& field, double dt, const std::vector<std::uint8_t>& blocked = {});

double sample_field(const Field& field, Point2 pos_mm);

enum class TileNoiseMode { Flicker, Flip };

struct TileLayer {
    int tw = 1, th = 1;       // tile counts
    double tile_size = 100.0;  // mm
    std::array<Rgb, 2> base_colors{Rgb{20, 20, 20}, Rgb{220, 220, 220}};
    std::vector<std::uint8_t> pattern;  // per-tile binary label (checkerboard by default)
    double noise_amplitude = 0.0;       // [0,1]
    TileNoiseMode noise_mode = TileNoiseMode::Flicker;
    std::uint64_t noise_seed = 0;
    // flip noise accumulates from this tick; rebased when amplitude changes live
    std::uint64_t noise_epoch = 0;

    static TileLayer checkerboard(int tw, int th, double tile_size);

    // Effective binary labels at tick t: base pattern XOR the parity of flip
    // draws over ticks (epoch, t]. Pure in (seed, t, tile).
    std::vector<std::uint8_t> labels_at(std::uint64_t t) const;

    // Re-anchors the flip state so a live amplitude change keeps continuity.
    void set_amplitude(double amplitude, std::uint64_t t);
};

// Per-tile display colors at tick t (row-major, tw*th entries).
std::vector<Rgb> make_tile_layer_frame(const TileLayer& tiles, std::uint64_t t);

struct DiscShape {
    Point2 center;  // mm
    double radius = 0.0;
};
struct RectShape {
    Point2 min;
    Point2 max;  // mm
};
struct DepositSourceEffect {
    double rate = 0.0;  // concentration per covered cell per second
};
struct BlockerEffect {};
struct DisplayOnlyEffect {
    Rgb color{255, 255, 255};
};

struct VirtualObject {
    std::uint64_t id = 0;
    std::variant<DiscShape, RectShape> shape;
    std::variant<DepositSourceEffect, BlockerEffect, DisplayOnlyEffect> effect;

    bool contains(Point2 p) const;
};

std::vector<std::uint8_t> blocked_mask(const Field& field, const std::vector<VirtualObject>& objects);

// Adds rate*dt to every field cell whose center lies inside a deposit source.
void apply_deposit_sources(Field& field, const std::vector<VirtualObject>& objects, double dt);

}  // namespace arena
