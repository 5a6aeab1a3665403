#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arena/homography.hpp"

// Raster buffers, bit-exact PNM I/O, the filtering front end of the detector,
// and the synthetic overhead camera that closes the loop in software.

namespace arena {

struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 1;  // 1 (gray) or 3 (rgb)
    std::vector<std::uint8_t> data;  // row-major, channel-interleaved

    ImageBuffer() = default;
    ImageBuffer(int w, int h, int ch, std::uint8_t fill = 0)
        : width(w), height(h), channels(ch),
          data(static_cast<std::size_t>(w) * h * ch, fill) {}

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool operator==(const ImageBuffer&) const = default;
};

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<float> gx;
    std::vector<float> gy;
    std::vector<float> mag;  // sqrt(gx^2+gy^2), >= 0
};

struct CameraModel {
    int width = 1024;
    int height = 768;
    Homography world_to_camera;     // world mm -> camera px
    double background_level = 30;   // [0,255]
    double robot_body_level = 200;  // [0,255], != background
    double pixel_noise_sigma = 0.0;
    double vignette_strength = 0.0;  // [0,1]
};

struct SimRobotDisc {
    Point2 pos_mm;
    double radius_mm = 0.0;
};

class PnmFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Binary PGM (P5) / PPM (P6), maxval 255, header "P5\n<w> <h>\n255\n".
ImageBuffer load_pnm(const std::string& path);
void save_pnm(const ImageBuffer& img, const std::string& path);

// Separable Gaussian, clamp-to-edge borders, float intermediates, rounded on
// output. ksize must be odd.
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma, int ksize);
std::vector<double> gaussian_kernel(double sigma, int ksize);

// 3x3 Sobel, clamp-to-edge. Requires at least 3x3 input.
GradientField sobel_gradients(const ImageBuffer& img);

// Renders robots as anti-aliased filled discs over a flat background, with
// optional radial vignette and additive Gaussian pixel noise. Deterministic
// under rng_seed.
ImageBuffer render_camera_view(const std::vector<SimRobotDisc>& robots, const CameraModel& cam,
                               std::uint64_t rng_seed);

}  // namespace arena
