#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "arena/image.hpp"

// Marker-free circle detection: two-stage gradient Hough. Edge pixels vote
// for centers along both gradient polarities; radii come from a second-stage
// distance histogram around each accepted center peak.

namespace arena {

struct HoughParams {
    int r_min = 10;
    int r_max = 30;
    double dp = 2.0;              // accumulator downscale, >= 1
    double edge_threshold = 60.0; // Sobel magnitude cutoff on 8-bit input
    std::uint32_t center_threshold = 100;
    double min_center_dist = 20.0;  // full-resolution px
    std::size_t max_circles = 1024;

    void validate() const;
};

struct Detection {
    double cx = 0.0;  // camera px, sub-pixel
    double cy = 0.0;
    double r = 0.0;
    std::uint32_t score = 0;  // center vote count
};

struct Accumulator {
    int width = 0;   // ceil(image dims / dp)
    int height = 0;
    std::vector<std::uint32_t> votes;
};

struct CenterPeak {
    double cx = 0.0;  // full-resolution px
    double cy = 0.0;
    std::uint32_t votes = 0;
};

struct RadiusEstimate {
    double r = 0.0;
    std::uint32_t support = 0;
};

Accumulator hough_vote_centers(const GradientField& grad, const HoughParams& params);

// Strict 3x3 maxima above center_threshold, greedy suppression within
// min_center_dist, vote-weighted 3x3 centroid refinement. Ties broken by
// ascending (cy, cx).
std::vector<CenterPeak> extract_center_peaks(const Accumulator& acc, const HoughParams& params);

// Mode of the edge-distance histogram over integer radii in [r_min, r_max];
// empty annulus yields nullopt. Ties go to the smaller radius.
std::optional<RadiusEstimate> estimate_radius(double cx, double cy, const GradientField& grad,
                                              const HoughParams& params);

// blur -> gradients -> vote -> peaks -> radius; sorted by descending score
// then ascending (cy, cx).
std::vector<Detection> detect_circles(const ImageBuffer& img, const HoughParams& params,
                                      double blur_sigma = 1.0, int blur_ksize = 5);

}  // namespace arena
