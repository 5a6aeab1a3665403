#include "arena/field.hpp"

#include <algorithm>
#include <cmath>

#include "arena/rng.hpp"

namespace arena {

double Field::total_mass() const {
    double m = 0.0;
    for (double v : values) m += v;
    return m;
}

void Field::check_stability(double dt) const {
    if (diffusion_d * dt / (cell_size * cell_size) > 0.25)
        throw std::invalid_argument(
            "field.diffusion_d: violates stability bound d*dt/cell^2 <= 0.25");
}

void deposit(Field& field, Point2 pos_mm, double amount) {
    if (amount < 0.0) throw std::invalid_argument("deposit: amount must be >= 0");
    const int i = static_cast<int>(std::floor(pos_mm.x / field.cell_size));
    const int j = static_cast<int>(std::floor(pos_mm.y / field.cell_size));
    if (i < 0 || j < 0 || i >= field.gw || j >= field.gh)
        throw BoundsError("deposit: position outside field bounds");
    field.cell(i, j) += amount;
}

void step_field(Field& field, double dt, const std::vector<std::uint8_t>& blocked) {
    if (dt <= 0.0) throw std::invalid_argument("step_field: dt must be > 0");
    field.check_stability(dt);
    const int w = field.gw, h = field.gh;
    const double c = field.diffusion_d * dt / (field.cell_size * field.cell_size);
    const double decay = std::exp(-field.evaporation_rho * dt);
    const bool has_blocked = !blocked.empty();

    std::vector<double> next(field.values.size());
    auto is_open = [&](int i, int j) {
        return !has_blocked || !blocked[static_cast<std::size_t>(j) * w + i];
    };
    // flux form: exchange only between open in-bounds neighbor pairs, so mass
    // is conserved exactly with reflective walls and blockers
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * w + i;
            const double v = field.values[idx];
            if (!is_open(i, j)) {
                next[idx] = v * decay;
                continue;
            }
            double lap = 0.0;
            if (i > 0 && is_open(i - 1, j)) lap += field.cell(i - 1, j) - v;
            if (i + 1 < w && is_open(i + 1, j)) lap += field.cell(i + 1, j) - v;
            if (j > 0 && is_open(i, j - 1)) lap += field.cell(i, j - 1) - v;
            if (j + 1 < h && is_open(i, j + 1)) lap += field.cell(i, j + 1) - v;
            next[idx] = (v + c * lap) * decay;
        }
    }
    field.values = std::move(next);
}

double sample_field(const Field& field, Point2 pos_mm) {
    if (pos_mm.x < 0.0 || pos_mm.y < 0.0 || pos_mm.x >= field.width_mm() ||
        pos_mm.y >= field.height_mm())
        throw BoundsError("sample_field: position outside field bounds");
    // bilinear over cell centers, clamped at borders
    const double fx = pos_mm.x / field.cell_size - 0.5;
    const double fy = pos_mm.y / field.cell_size - 0.5;
    const int i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, field.gw - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, field.gh - 1);
    const int i1 = std::min(i0 + 1, field.gw - 1);
    const int j1 = std::min(j0 + 1, field.gh - 1);
    const double tx = std::clamp(fx - i0, 0.0, 1.0);
    const double ty = std::clamp(fy - j0, 0.0, 1.0);
    const double top = field.cell(i0, j0) * (1.0 - tx) + field.cell(i1, j0) * tx;
    const double bot = field.cell(i0, j1) * (1.0 - tx) + field.cell(i1, j1) * tx;
    return top * (1.0 - ty) + bot * ty;
}

TileLayer TileLayer::checkerboard(int tw_, int th_, double tile_size_) {
    TileLayer t;
    t.tw = tw_;
    t.th = th_;
    t.tile_size = tile_size_;
    t.pattern.resize(static_cast<std::size_t>(tw_) * th_);
    for (int j = 0; j < th_; ++j)
        for (int i = 0; i < tw_; ++i)
            t.pattern[static_cast<std::size_t>(j) * tw_ + i] =
                static_cast<std::uint8_t>((i + j) % 2);
    return t;
}

namespace {
constexpr std::uint64_t kFlipTag = 0x74696c65'666c6970ull;
constexpr std::uint64_t kFlickerTag = 0x74696c65'666c6963ull;
}  // namespace

std::vector<std::uint8_t> TileLayer::labels_at(std::uint64_t t) const {
    std::vector<std::uint8_t> labels = pattern;
    if (noise_mode != TileNoiseMode::Flip || noise_amplitude <= 0.0) return labels;
    for (std::size_t idx = 0; idx < labels.size(); ++idx) {
        unsigned parity = 0;
        for (std::uint64_t k = noise_epoch + 1; k <= t; ++k)
            if (rng::uniform01_at(noise_seed, kFlipTag, k, idx) < noise_amplitude) parity ^= 1u;
        labels[idx] ^= static_cast<std::uint8_t>(parity);
    }
    return labels;
}

void TileLayer::set_amplitude(double amplitude, std::uint64_t t) {
    if (amplitude < 0.0 || amplitude > 1.0)
        throw std::invalid_argument("tile noise amplitude out of [0,1]");
    if (noise_mode == TileNoiseMode::Flip) {
        pattern = labels_at(t);
        noise_epoch = t;
    }
    noise_amplitude = amplitude;
}

std::vector<Rgb> make_tile_layer_frame(const TileLayer& tiles, std::uint64_t t) {
    const auto labels = tiles.labels_at(t);
    std::vector<Rgb> colors(labels.size());
    const bool flicker =
        tiles.noise_mode == TileNoiseMode::Flicker && tiles.noise_amplitude > 0.0;
    for (std::size_t idx = 0; idx < labels.size(); ++idx) {
        Rgb c = tiles.base_colors[labels[idx]];
        if (flicker) {
            const double off = (2.0 * rng::uniform01_at(tiles.noise_seed, kFlickerTag, t, idx) -
                                1.0) * tiles.noise_amplitude * 255.0;
            for (int ch = 0; ch < 3; ++ch)
                c[static_cast<std::size_t>(ch)] = static_cast<std::uint8_t>(
                    std::clamp(std::lround(c[static_cast<std::size_t>(ch)] + off), 0l, 255l));
        }
        colors[idx] = c;
    }
    return colors;
}

bool VirtualObject::contains(Point2 p) const {
    if (const auto* d = std::get_if<DiscShape>(&shape)) {
        return std::hypot(p.x - d->center.x, p.y - d->center.y) <= d->radius;
    }
    const auto& r = std::get<RectShape>(shape);
    return p.x >= r.min.x && p.x <= r.max.x && p.y >= r.min.y && p.y <= r.max.y;
}

std::vector<std::uint8_t> blocked_mask(const Field& field,
                                       const std::vector<VirtualObject>& objects) {
    std::vector<std::uint8_t> mask(field.values.size(), 0);
    bool any = false;
    for (const auto& obj : objects) {
        if (!std::holds_alternative<BlockerEffect>(obj.effect)) continue;
        any = true;
        for (int j = 0; j < field.gh; ++j)
            for (int i = 0; i < field.gw; ++i) {
                const Point2 center{(i + 0.5) * field.cell_size, (j + 0.5) * field.cell_size};
                if (obj.contains(center)) mask[static_cast<std::size_t>(j) * field.gw + i] = 1;
            }
    }
    if (!any) mask.clear();
    return mask;
}

void apply_deposit_sources(Field& field, const std::vector<VirtualObject>& objects, double dt) {
    for (const auto& obj : objects) {
        const auto* src = std::get_if<DepositSourceEffect>(&obj.effect);
        if (!src || src->rate <= 0.0) continue;
        for (int j = 0; j < field.gh; ++j)
            for (int i = 0; i < field.gw; ++i) {
                const Point2 center{(i + 0.5) * field.cell_size, (j + 0.5) * field.cell_size};
                if (obj.contains(center)) field.cell(i, j) += src->rate * dt;
            }
    }
}

}  // namespace arena
