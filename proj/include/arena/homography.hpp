#pragma once

#include <array>
#include <stdexcept>
#include <utility>

// 3x3 projective maps linking camera pixels, projector pixels, and world
// millimeters. Estimation lives in calib.hpp; this header is just the value
// type and the exact-arithmetic operations on it.

namespace arena {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Homography {
    // row-major, normalized so h[8] == 1 whenever that entry is nonzero
    std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Homography identity() { return Homography{}; }

    static Homography translation(double tx, double ty) {
        return Homography{{1, 0, tx, 0, 1, ty, 0, 0, 1}};
    }

    static Homography scale(double s) {
        return Homography{{s, 0, 0, 0, s, 0, 0, 0, 1}};
    }

    double det() const {
        return h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
               h[2] * (h[3] * h[7] - h[4] * h[6]);
    }

    Homography& normalize() {
        if (h[8] != 0.0) {
            const double inv = 1.0 / h[8];
            for (double& v : h) v *= inv;
        }
        return *this;
    }
};

class PointAtInfinityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class SingularHomographyError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline Point2 map_point(const Homography& H, Point2 p) {
    const auto& h = H.h;
    const double w = h[6] * p.x + h[7] * p.y + h[8];
    if (std::abs(w) < 1e-12)
        throw PointAtInfinityError("map_point: point maps to infinity");
    return {(h[0] * p.x + h[1] * p.y + h[2]) / w, (h[3] * p.x + h[4] * p.y + h[5]) / w};
}

inline Homography invert_homography(const Homography& H) {
    const double d = H.det();
    if (std::abs(d) < 1e-12)
        throw SingularHomographyError("invert_homography: singular matrix");
    const auto& h = H.h;
    Homography out;
    out.h = {
        (h[4] * h[8] - h[5] * h[7]) / d, (h[2] * h[7] - h[1] * h[8]) / d,
        (h[1] * h[5] - h[2] * h[4]) / d, (h[5] * h[6] - h[3] * h[8]) / d,
        (h[0] * h[8] - h[2] * h[6]) / d, (h[2] * h[3] - h[0] * h[5]) / d,
        (h[3] * h[7] - h[4] * h[6]) / d, (h[1] * h[6] - h[0] * h[7]) / d,
        (h[0] * h[4] - h[1] * h[3]) / d,
    };
    return out.normalize();
}

inline Homography compose(const Homography& a, const Homography& b) {
    // returns a*b, i.e. apply b first
    Homography out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a.h[3 * r + k] * b.h[3 * k + c];
            out.h[3 * r + c] = s;
        }
    return out.normalize();
}

}  // namespace arena
