#include "arena/render.hpp"

#include <algorithm>
#include <cmath>

namespace arena {

Colormap default_colormap() {
    Colormap cm;
    for (int i = 0; i < 256; ++i) {
        // black -> green with a late warm tint toward yellow
        const double t = i / 255.0;
        cm[static_cast<std::size_t>(i)] = {
            static_cast<std::uint8_t>(std::lround(200.0 * t * t)),
            static_cast<std::uint8_t>(std::lround(255.0 * t)),
            static_cast<std::uint8_t>(std::lround(40.0 * t))};
    }
    return cm;
}

namespace {

void field_range(const Field& field, double& lo, double& hi) {
    lo = field.values.empty() ? 0.0 : field.values[0];
    hi = lo;
    for (double v : field.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
}

}  // namespace

ImageBuffer field_colormap(const Field& field, const Colormap& colormap, int out_width,
                           int out_height) {
    double lo, hi;
    field_range(field, lo, hi);
    const double span = hi - lo;

    ImageBuffer out(out_width, out_height, 3);
    for (int y = 0; y < out_height; ++y) {
        const int j = std::clamp(y * field.gh / out_height, 0, field.gh - 1);
        for (int x = 0; x < out_width; ++x) {
            const int i = std::clamp(x * field.gw / out_width, 0, field.gw - 1);
            int idx = 0;
            if (span > 0.0)
                idx = static_cast<int>(std::lround((field.cell(i, j) - lo) / span * 255.0));
            const Rgb& c = colormap[static_cast<std::size_t>(std::clamp(idx, 0, 255))];
            for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = c[static_cast<std::size_t>(ch)];
        }
    }
    return out;
}

void draw_ring(ProjectorFrame& frame, Point2 center_px, double radius, Rgb color, int thickness) {
    if (thickness < 1) throw std::invalid_argument("draw_ring: thickness must be >= 1");
    const double half = 0.5 * thickness;
    const int x0 = std::max(0, static_cast<int>(std::floor(center_px.x - radius - half)));
    const int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(center_px.x + radius + half)));
    const int y0 = std::max(0, static_cast<int>(std::floor(center_px.y - radius - half)));
    const int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(center_px.y + radius + half)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d = std::hypot(x - center_px.x, y - center_px.y);
            if (std::abs(d - radius) <= half)
                for (int ch = 0; ch < 3; ++ch)
                    frame.at(x, y, ch) = color[static_cast<std::size_t>(ch)];
        }
}

ProjectorFrame compose_projector_frame(const TileLayer& tiles, const Field& field,
                                       const std::vector<VirtualObject>& objects,
                                       const std::vector<Track>& tracks,
                                       const Homography& camera_to_projector,
                                       const OverlayStyle& style, const RenderConfig& cfg,
                                       std::uint64_t t) {
    const int w = cfg.projector_width, h = cfg.projector_height;
    ProjectorFrame frame(w, h, 3);

    // tile background
    const auto tile_colors = make_tile_layer_frame(tiles, t);
    const double px_per_tile = tiles.tile_size / cfg.mm_per_projector_px;
    for (int y = 0; y < h; ++y) {
        const int tj = std::clamp(static_cast<int>(y / px_per_tile), 0, tiles.th - 1);
        for (int x = 0; x < w; ++x) {
            const int ti = std::clamp(static_cast<int>(x / px_per_tile), 0, tiles.tw - 1);
            const Rgb& c = tile_colors[static_cast<std::size_t>(tj) * tiles.tw + ti];
            for (int ch = 0; ch < 3; ++ch) frame.at(x, y, ch) = c[static_cast<std::size_t>(ch)];
        }
    }

    // field layer; per-pixel alpha scales with normalized intensity so empty
    // ground leaves the tiles untouched
    if (cfg.field_opacity > 0.0 && field.gw > 0 && field.gh > 0) {
        const Colormap cm = default_colormap();
        double lo, hi;
        if (cfg.field_fixed_scale) {
            lo = 0.0;
            hi = cfg.field_scale_max;
        } else {
            field_range(field, lo, hi);
        }
        const double span = hi - lo;
        if (span > 0.0) {
            const double px_per_cell = field.cell_size / cfg.mm_per_projector_px;
            for (int y = 0; y < h; ++y) {
                const int j = std::clamp(static_cast<int>(y / px_per_cell), 0, field.gh - 1);
                for (int x = 0; x < w; ++x) {
                    const int i = std::clamp(static_cast<int>(x / px_per_cell), 0, field.gw - 1);
                    const double norm = std::clamp((field.cell(i, j) - lo) / span, 0.0, 1.0);
                    if (norm <= 0.0) continue;
                    const Rgb& c = cm[static_cast<std::size_t>(std::lround(norm * 255.0))];
                    const double a = cfg.field_opacity * norm;
                    for (int ch = 0; ch < 3; ++ch) {
                        const auto s = static_cast<std::size_t>(ch);
                        frame.at(x, y, ch) = static_cast<std::uint8_t>(
                            std::lround((1.0 - a) * frame.at(x, y, ch) + a * c[s]));
                    }
                }
            }
        }
    }

    // visible objects (blockers are physics-only)
    const double inv_mm = 1.0 / cfg.mm_per_projector_px;
    for (const auto& obj : objects) {
        Rgb color;
        if (const auto* d = std::get_if<DisplayOnlyEffect>(&obj.effect))
            color = d->color;
        else if (std::holds_alternative<DepositSourceEffect>(obj.effect))
            color = Rgb{200, 120, 40};
        else
            continue;
        double mnx, mny, mxx, mxy;
        if (const auto* disc = std::get_if<DiscShape>(&obj.shape)) {
            mnx = disc->center.x - disc->radius;
            mny = disc->center.y - disc->radius;
            mxx = disc->center.x + disc->radius;
            mxy = disc->center.y + disc->radius;
        } else {
            const auto& r = std::get<RectShape>(obj.shape);
            mnx = r.min.x;
            mny = r.min.y;
            mxx = r.max.x;
            mxy = r.max.y;
        }
        const int x0 = std::max(0, static_cast<int>(std::floor(mnx * inv_mm)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(mxx * inv_mm)));
        const int y0 = std::max(0, static_cast<int>(std::floor(mny * inv_mm)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(mxy * inv_mm)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                if (obj.contains({x * cfg.mm_per_projector_px, y * cfg.mm_per_projector_px}))
                    for (int ch = 0; ch < 3; ++ch)
                        frame.at(x, y, ch) = color[static_cast<std::size_t>(ch)];
    }

    // one ring per Confirmed track
    for (const auto& tr : tracks) {
        if (tr.state != TrackState::Confirmed) continue;
        const Point2 c = map_point(camera_to_projector, {tr.cx, tr.cy});
        const Point2 e = map_point(camera_to_projector, {tr.cx + tr.r, tr.cy});
        const double radius = std::hypot(e.x - c.x, e.y - c.y);
        Rgb color;
        if (style.color_key == ColorKey::ByTrackId)
            color = style.palette[tr.id % style.palette.size()];
        else
            color = style.palette[static_cast<std::size_t>(tr.state) % style.palette.size()];
        draw_ring(frame, c, radius, color, style.ring_thickness);
    }
    return frame;
}

}  // namespace arena
