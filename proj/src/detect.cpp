#include "arena/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arena {

void HoughParams::validate() const {
    if (r_min <= 0 || r_min >= r_max)
        throw std::invalid_argument("hough: require 0 < r_min < r_max");
    if (dp < 1.0) throw std::invalid_argument("hough: dp must be >= 1");
    if (min_center_dist < 1.0) throw std::invalid_argument("hough: min_center_dist must be >= 1");
}

Accumulator hough_vote_centers(const GradientField& grad, const HoughParams& params) {
    params.validate();
    if (grad.width < 3 || grad.height < 3)
        throw std::invalid_argument("hough_vote_centers: gradient field must be at least 3x3");

    Accumulator acc;
    acc.width = static_cast<int>(std::ceil(grad.width / params.dp));
    acc.height = static_cast<int>(std::ceil(grad.height / params.dp));
    acc.votes.assign(static_cast<std::size_t>(acc.width) * acc.height, 0);

    const double inv_dp = 1.0 / params.dp;
    const float thresh = static_cast<float>(params.edge_threshold);
    for (int y = 0; y < grad.height; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * grad.width;
        for (int x = 0; x < grad.width; ++x) {
            const float m = grad.mag[row + x];
            if (m < thresh) continue;
            const double ux = grad.gx[row + x] / m * inv_dp;
            const double uy = grad.gy[row + x] / m * inv_dp;
            const double bx = x * inv_dp, by = y * inv_dp;
            for (int r = params.r_min; r <= params.r_max; ++r) {
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    // truncate(c + 0.5) == lround(c) for every c > -0.5, and
                    // c <= -0.5 can never land in the accumulator anyway
                    const double tx = bx + sgn * r * ux + 0.5;
                    const double ty = by + sgn * r * uy + 0.5;
                    if (tx < 0.0 || ty < 0.0) continue;
                    const int ax = static_cast<int>(tx);
                    const int ay = static_cast<int>(ty);
                    if (ax < acc.width && ay < acc.height)
                        ++acc.votes[static_cast<std::size_t>(ay) * acc.width + ax];
                }
            }
        }
    }
    return acc;
}

std::vector<CenterPeak> extract_center_peaks(const Accumulator& acc, const HoughParams& params) {
    struct Candidate {
        int ax, ay;
        std::uint32_t votes;
        double cx, cy;  // refined, full-resolution px
    };
    auto vote_at = [&](int x, int y) -> std::uint32_t {
        if (x < 0 || y < 0 || x >= acc.width || y >= acc.height) return 0;
        return acc.votes[static_cast<std::size_t>(y) * acc.width + x];
    };

    std::vector<Candidate> cands;
    for (int y = 0; y < acc.height; ++y) {
        for (int x = 0; x < acc.width; ++x) {
            const std::uint32_t v = vote_at(x, y);
            if (v < params.center_threshold) continue;
            bool strict_max = true;
            for (int dy = -1; dy <= 1 && strict_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (vote_at(x + dx, y + dy) >= v) {
                        strict_max = false;
                        break;
                    }
                }
            if (!strict_max) continue;

            // vote-weighted centroid over the 3x3 neighborhood, then undo dp
            double wsum = 0.0, xsum = 0.0, ysum = 0.0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const double wv = vote_at(x + dx, y + dy);
                    wsum += wv;
                    xsum += wv * (x + dx);
                    ysum += wv * (y + dy);
                }
            cands.push_back({x, y, v, (xsum / wsum) * params.dp, (ysum / wsum) * params.dp});
        }
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.votes != b.votes) return a.votes > b.votes;
        if (a.ay != b.ay) return a.ay < b.ay;
        return a.ax < b.ax;
    });

    std::vector<CenterPeak> peaks;
    const double min_d2 = params.min_center_dist * params.min_center_dist;
    for (const auto& c : cands) {
        if (peaks.size() >= params.max_circles) break;
        bool suppressed = false;
        for (const auto& p : peaks) {
            const double dx = p.cx - c.cx, dy = p.cy - c.cy;
            if (dx * dx + dy * dy < min_d2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) peaks.push_back({c.cx, c.cy, c.votes});
    }
    return peaks;
}

std::optional<RadiusEstimate> estimate_radius(double cx, double cy, const GradientField& grad,
                                              const HoughParams& params) {
    params.validate();
    if (cx < 0 || cy < 0 || cx >= grad.width || cy >= grad.height)
        throw std::invalid_argument("estimate_radius: center outside image");

    std::vector<std::uint32_t> hist(static_cast<std::size_t>(params.r_max - params.r_min + 1), 0);
    const float thresh = static_cast<float>(params.edge_threshold);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - params.r_max - 1);
    const int x1 = std::min(grad.width - 1, static_cast<int>(std::ceil(cx)) + params.r_max + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - params.r_max - 1);
    const int y1 = std::min(grad.height - 1, static_cast<int>(std::ceil(cy)) + params.r_max + 1);
    for (int y = y0; y <= y1; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * grad.width;
        for (int x = x0; x <= x1; ++x) {
            if (grad.mag[row + x] < thresh) continue;
            const double dx = x - cx, dy = y - cy;
            const int bin = static_cast<int>(std::lround(std::sqrt(dx * dx + dy * dy)));
            if (bin >= params.r_min && bin <= params.r_max)
                ++hist[static_cast<std::size_t>(bin - params.r_min)];
        }
    }

    std::uint32_t best = 0;
    int best_r = -1;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (hist[i] > best) {  // strict: ties resolve toward the smaller radius
            best = hist[i];
            best_r = params.r_min + static_cast<int>(i);
        }
    }
    if (best == 0) return std::nullopt;
    return RadiusEstimate{static_cast<double>(best_r), best};
}

std::vector<Detection> detect_circles(const ImageBuffer& img, const HoughParams& params,
                                      double blur_sigma, int blur_ksize) {
    if (img.width < 3 || img.height < 3)
        throw std::invalid_argument("detect_circles: image must be at least 3x3");
    const ImageBuffer smoothed =
        blur_ksize > 1 ? gaussian_blur(img, blur_sigma, blur_ksize) : img;
    const GradientField grad = sobel_gradients(smoothed);
    const Accumulator acc = hough_vote_centers(grad, params);
    const auto peaks = extract_center_peaks(acc, params);

    std::vector<Detection> out;
    out.reserve(peaks.size());
    for (const auto& p : peaks) {
        const auto rad = estimate_radius(p.cx, p.cy, grad, params);
        if (!rad) continue;
        out.push_back({p.cx, p.cy, rad->r, p.votes});
    }
    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.cy != b.cy) return a.cy < b.cy;
        return a.cx < b.cx;
    });
    return out;
}

}  // namespace arena
