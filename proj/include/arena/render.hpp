#pragma once

#include <cstdint>
#include <vector>

#include "arena/field.hpp"
#include "arena/image.hpp"
#include "arena/track.hpp"

// Projector frame composition: tile background, field colormap, virtual
// objects, and per-track ring overlays.

namespace arena {

using ProjectorFrame = ImageBuffer;  // 3-channel, projector resolution

using Colormap = std::array<Rgb, 256>;

enum class ColorKey { ByTrackId, ByRobotState };

struct OverlayStyle {
    int ring_thickness = 3;  // px
    std::vector<Rgb> palette{{Rgb{230, 40, 40}, Rgb{40, 90, 230}, Rgb{40, 200, 90},
                              Rgb{230, 200, 40}, Rgb{200, 60, 220}, Rgb{60, 210, 210}}};
    ColorKey color_key = ColorKey::ByTrackId;
};

struct RenderConfig {
    int projector_width = 1024;
    int projector_height = 768;
    double mm_per_projector_px = 1.0;  // world = projector frame scaled by this
    double field_opacity = 0.6;        // [0,1]
    bool field_fixed_scale = false;    // fixed [0, field_scale_max] instead of per-frame min/max
    double field_scale_max = 1.0;
};

// black -> green ramp; any monotone 256-entry table works
Colormap default_colormap();

// Normalizes by the snapshot's (min,max) -- constant fields map to entry 0 --
// and fills each cell's projector-space rectangle nearest-cell.
ImageBuffer field_colormap(const Field& field, const Colormap& colormap, int out_width,
                           int out_height);

// Annulus |d - radius| <= thickness/2, clipped at frame edges.
void draw_ring(ProjectorFrame& frame, Point2 center_px, double radius, Rgb color, int thickness);

// Layer order: tiles, field (alpha-blended), display objects, one ring per
// Confirmed track mapped through camera->projector. Pure in its inputs.
ProjectorFrame compose_projector_frame(const TileLayer& tiles, const Field& field,
                                       const std::vector<VirtualObject>& objects,
                                       const std::vector<Track>& tracks,
                                       const Homography& camera_to_projector,
                                       const OverlayStyle& style, const RenderConfig& cfg,
                                       std::uint64_t t);

}  // namespace arena
