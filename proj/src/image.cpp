#include "arena/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "arena/rng.hpp"

namespace arena {

namespace {

// PNM header token: skip whitespace and '#' comments, then read one word.
std::string next_token(std::istream& in) {
    int c = in.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        }
        c = in.get();
    }
    std::string tok;
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

int parse_dim(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw PnmFormatError(std::string("pnm: bad ") + what + " token \"" + tok + "\"");
    return std::stoi(tok);
}

}  // namespace

ImageBuffer load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PnmFormatError("pnm: cannot open " + path);

    const std::string magic = next_token(in);
    int channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw PnmFormatError("pnm: unsupported magic \"" + magic + "\"");

    const int w = parse_dim(next_token(in), "width");
    const int h = parse_dim(next_token(in), "height");
    const std::string maxval = next_token(in);
    if (maxval != "255")
        throw PnmFormatError("pnm: unsupported maxval \"" + maxval + "\"");
    if (w < 1 || h < 1) throw PnmFormatError("pnm: bad dimensions");

    ImageBuffer img(w, h, channels);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw PnmFormatError("pnm: truncated payload in " + path);
    return img;
}

void save_pnm(const ImageBuffer& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("save_pnm: channels must be 1 or 3");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_pnm: cannot open " + path);
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw std::runtime_error("save_pnm: write failed for " + path);
}

std::vector<double> gaussian_kernel(double sigma, int ksize) {
    if (ksize < 1 || ksize % 2 == 0)
        throw std::invalid_argument("gaussian_kernel: ksize must be odd and >= 1");
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
    std::vector<double> k(ksize);
    const int half = ksize / 2;
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double x = i - half;
        k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma, int ksize) {
    if (img.channels != 1) throw std::invalid_argument("gaussian_blur: 1-channel input required");
    const auto kernel = gaussian_kernel(sigma, ksize);
    const int half = ksize / 2;
    const int w = img.width, h = img.height;

    // horizontal pass into float plane, clamp-to-edge on the borders only
    std::vector<float> tmp(static_cast<std::size_t>(w) * h);
    const int xin0 = std::min(half, w), xin1 = std::max(xin0, w - half);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = &img.data[static_cast<std::size_t>(y) * w];
        float* trow = &tmp[static_cast<std::size_t>(y) * w];
        auto clamped = [&](int x) {
            double acc = 0.0;
            for (int i = -half; i <= half; ++i)
                acc += kernel[i + half] * row[std::clamp(x + i, 0, w - 1)];
            trow[x] = static_cast<float>(acc);
        };
        for (int x = 0; x < xin0; ++x) clamped(x);
        for (int x = xin0; x < xin1; ++x) {
            double acc = 0.0;
            const std::uint8_t* p = row + (x - half);
            for (int i = 0; i < ksize; ++i) acc += kernel[i] * p[i];
            trow[x] = static_cast<float>(acc);
        }
        for (int x = xin1; x < w; ++x) clamped(x);
    }
    // vertical pass, rounded at the buffer boundary
    ImageBuffer out(w, h, 1);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* orow = &out.data[static_cast<std::size_t>(y) * w];
        if (y >= half && y + half < h) {
            const float* base = &tmp[static_cast<std::size_t>(y - half) * w];
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                const float* p = base + x;
                for (int i = 0; i < ksize; ++i) acc += kernel[i] * p[static_cast<std::size_t>(i) * w];
                orow[x] = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0l, 255l));
            }
        } else {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -half; i <= half; ++i) {
                    const int yi = std::clamp(y + i, 0, h - 1);
                    acc += kernel[i + half] * tmp[static_cast<std::size_t>(yi) * w + x];
                }
                orow[x] = static_cast<std::uint8_t>(std::clamp(std::lround(acc), 0l, 255l));
            }
        }
    }
    return out;
}

GradientField sobel_gradients(const ImageBuffer& img) {
    if (img.channels != 1) throw std::invalid_argument("sobel_gradients: 1-channel input required");
    if (img.width < 3 || img.height < 3)
        throw std::invalid_argument("sobel_gradients: image must be at least 3x3");
    const int w = img.width, h = img.height;
    GradientField g;
    g.width = w;
    g.height = h;
    g.gx.resize(static_cast<std::size_t>(w) * h);
    g.gy.resize(static_cast<std::size_t>(w) * h);
    g.mag.resize(static_cast<std::size_t>(w) * h);

    auto px = [&](int x, int y) -> int {
        return img.data[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w +
                        std::clamp(x, 0, w - 1)];
    };
    auto clamped = [&](int x, int y) {
        const int p00 = px(x - 1, y - 1), p10 = px(x, y - 1), p20 = px(x + 1, y - 1);
        const int p01 = px(x - 1, y), p21 = px(x + 1, y);
        const int p02 = px(x - 1, y + 1), p12 = px(x, y + 1), p22 = px(x + 1, y + 1);
        const float gx = static_cast<float>((p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02));
        const float gy = static_cast<float>((p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20));
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        g.gx[i] = gx;
        g.gy[i] = gy;
        g.mag[i] = std::sqrt(gx * gx + gy * gy);
    };
    for (int x = 0; x < w; ++x) clamped(x, 0);
    for (int y = 1; y < h - 1; ++y) {
        clamped(0, y);
        const std::uint8_t* up = &img.data[static_cast<std::size_t>(y - 1) * w];
        const std::uint8_t* mid = up + w;
        const std::uint8_t* dn = mid + w;
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 1; x < w - 1; ++x) {
            const int p00 = up[x - 1], p10 = up[x], p20 = up[x + 1];
            const int p01 = mid[x - 1], p21 = mid[x + 1];
            const int p02 = dn[x - 1], p12 = dn[x], p22 = dn[x + 1];
            const float gx = static_cast<float>((p20 + 2 * p21 + p22) - (p00 + 2 * p01 + p02));
            const float gy = static_cast<float>((p02 + 2 * p12 + p22) - (p00 + 2 * p10 + p20));
            g.gx[row + x] = gx;
            g.gy[row + x] = gy;
            g.mag[row + x] = std::sqrt(gx * gx + gy * gy);
        }
        clamped(w - 1, y);
    }
    for (int x = 0; x < w; ++x) clamped(x, h - 1);
    return g;
}

ImageBuffer render_camera_view(const std::vector<SimRobotDisc>& robots, const CameraModel& cam,
                               std::uint64_t rng_seed) {
    const int w = cam.width, h = cam.height;
    std::vector<float> canvas(static_cast<std::size_t>(w) * h,
                              static_cast<float>(cam.background_level));

    for (std::size_t i = 0; i < robots.size(); ++i) {
        const auto& r = robots[i];
        if (r.radius_mm <= 0.0)
            throw std::invalid_argument("render_camera_view: robot " + std::to_string(i) +
                                        " has non-positive radius");
        const Point2 c = map_point(cam.world_to_camera, r.pos_mm);
        if (c.x < 0.0 || c.y < 0.0 || c.x >= w || c.y >= h)
            throw std::invalid_argument("render_camera_view: robot " + std::to_string(i) +
                                        " outside world bounds");
        // local scale of the projective map sets the pixel radius
        const Point2 edge = map_point(cam.world_to_camera, {r.pos_mm.x + r.radius_mm, r.pos_mm.y});
        const double rad = std::hypot(edge.x - c.x, edge.y - c.y);

        const int x0 = std::max(0, static_cast<int>(std::floor(c.x - rad - 1.0)));
        const int x1 = std::min(w - 1, static_cast<int>(std::ceil(c.x + rad + 1.0)));
        const int y0 = std::max(0, static_cast<int>(std::floor(c.y - rad - 1.0)));
        const int y1 = std::min(h - 1, static_cast<int>(std::ceil(c.y + rad + 1.0)));
        const float body = static_cast<float>(cam.robot_body_level);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double d = std::hypot(x - c.x, y - c.y);
                // linear coverage over a 1 px rim
                const double cov = std::clamp(rad + 0.5 - d, 0.0, 1.0);
                if (cov > 0.0) {
                    float& p = canvas[static_cast<std::size_t>(y) * w + x];
                    p = static_cast<float>(p + cov * (body - p));
                }
            }
        }
    }

    if (cam.vignette_strength > 0.0) {
        const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
        const double inv_r2 = 1.0 / (cx * cx + cy * cy);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) * inv_r2;
                canvas[static_cast<std::size_t>(y) * w + x] *=
                    static_cast<float>(1.0 - cam.vignette_strength * d2);
            }
    }

    ImageBuffer out(w, h, 1);
    if (cam.pixel_noise_sigma > 0.0) {
        rng::Stream noise(rng::key(rng_seed, 0x6361'6d65'7261ull));
        const float sigma = static_cast<float>(cam.pixel_noise_sigma);
        for (std::size_t i = 0; i < canvas.size(); ++i) {
            const float v = canvas[i] + sigma * static_cast<float>(noise.gauss());
            out.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
        }
    } else {
        for (std::size_t i = 0; i < canvas.size(); ++i)
            out.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(canvas[i]), 0l, 255l));
    }
    return out;
}

}  // namespace arena
