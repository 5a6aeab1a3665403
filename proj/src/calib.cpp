#include "arena/calib.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace arena {

CountMismatchError::CountMismatchError(std::size_t detected_, std::size_t expected_)
    : CalibrationError("calibration: detected " + std::to_string(detected_) +
                       " fiducials, expected " + std::to_string(expected_)),
      detected(detected_),
      expected(expected_) {}

namespace {

struct Normalization {
    double cx = 0.0, cy = 0.0, scale = 1.0;  // translate to centroid, mean dist sqrt(2)

    Point2 apply(Point2 p) const { return {(p.x - cx) * scale, (p.y - cy) * scale}; }

    Homography as_homography() const {
        return Homography{{scale, 0, -cx * scale, 0, scale, -cy * scale, 0, 0, 1}};
    }
};

Normalization make_normalization(const std::vector<Correspondence>& corr, bool src) {
    Normalization n;
    for (const auto& c : corr) {
        const Point2& p = src ? c.src : c.dst;
        n.cx += p.x;
        n.cy += p.y;
    }
    n.cx /= static_cast<double>(corr.size());
    n.cy /= static_cast<double>(corr.size());
    double mean_dist = 0.0;
    for (const auto& c : corr) {
        const Point2& p = src ? c.src : c.dst;
        mean_dist += std::hypot(p.x - n.cx, p.y - n.cy);
    }
    mean_dist /= static_cast<double>(corr.size());
    n.scale = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
    return n;
}

}  // namespace

HomographyFit estimate_homography(const std::vector<Correspondence>& corr) {
    const std::size_t n = corr.size();
    if (n < 4)
        throw CalibrationError("estimate_homography: need >= 4 correspondences, got " +
                               std::to_string(n));
    for (const auto& c : corr)
        if (!std::isfinite(c.src.x) || !std::isfinite(c.src.y) || !std::isfinite(c.dst.x) ||
            !std::isfinite(c.dst.y))
            throw CalibrationError("estimate_homography: non-finite correspondence");

    const Normalization ns = make_normalization(corr, true);
    const Normalization nd = make_normalization(corr, false);

    Eigen::MatrixXd A(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 s = ns.apply(corr[i].src);
        const Point2 d = nd.apply(corr[i].dst);
        A.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
        A.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // more than a 1-D null space means the configuration does not pin down H
    if (sv(7) < 1e-8 * sv(0))
        throw DegenerateConfigurationError(
            "estimate_homography: degenerate configuration (rank-deficient design matrix)");
    const Eigen::VectorXd hvec = svd.matrixV().col(8);

    Homography Hn;
    for (int i = 0; i < 9; ++i) Hn.h[static_cast<std::size_t>(i)] = hvec(i);
    Homography H = compose(invert_homography(nd.as_homography()), compose(Hn, ns.as_homography()));
    H.normalize();

    double sq = 0.0;
    for (const auto& c : corr) {
        const Point2 p = map_point(H, c.src);
        const double dx = p.x - c.dst.x, dy = p.y - c.dst.y;
        sq += dx * dx + dy * dy;
    }
    return {H, std::sqrt(sq / static_cast<double>(n))};
}

std::vector<Point2> grid_sort(std::vector<Point2> points) {
    if (points.size() < 2) return points;
    const std::size_t n = points.size();

    double cx = 0.0, cy = 0.0;
    for (const auto& p : points) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);

    // 2x2 covariance -> principal axis
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = p.x - cx, dy = p.y - cy;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    double ax = std::cos(theta), ay = std::sin(theta);
    // fix orientation so orderings agree across frames related by < 90 deg
    if (ax < 0.0 || (ax == 0.0 && ay < 0.0)) {
        ax = -ax;
        ay = -ay;
    }
    double bx = -ay, by = ax;
    if (by < 0.0) {
        bx = -bx;
        by = -by;
    }

    struct Rotated {
        double u, v;
        Point2 p;
    };
    std::vector<Rotated> rot(n);
    double vmin = 1e300, vmax = -1e300, umin = 1e300, umax = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = points[i].x - cx, dy = points[i].y - cy;
        rot[i] = {dx * ax + dy * ay, dx * bx + dy * by, points[i]};
        vmin = std::min(vmin, rot[i].v);
        vmax = std::max(vmax, rot[i].v);
        umin = std::min(umin, rot[i].u);
        umax = std::max(umax, rot[i].u);
    }
    std::sort(rot.begin(), rot.end(), [](const Rotated& a, const Rotated& b) { return a.v < b.v; });

    // rows split at the largest v-gaps; floor keeps jitter in a single band
    double max_gap = 0.0;
    for (std::size_t i = 1; i < n; ++i) max_gap = std::max(max_gap, rot[i].v - rot[i - 1].v);
    const double diag = std::hypot(umax - umin, vmax - vmin);
    const double row_gap = std::max(0.5 * max_gap, 0.02 * diag);

    std::vector<Point2> out;
    out.reserve(n);
    std::size_t row_start = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || rot[i].v - rot[i - 1].v > row_gap) {
            std::sort(rot.begin() + static_cast<std::ptrdiff_t>(row_start),
                      rot.begin() + static_cast<std::ptrdiff_t>(i),
                      [](const Rotated& a, const Rotated& b) { return a.u < b.u; });
            for (std::size_t j = row_start; j < i; ++j) out.push_back(rot[j].p);
            row_start = i;
        }
    }
    return out;
}

HomographyFit calibrate_from_fiducials(const std::vector<Point2>& projector_dots,
                                       const ImageBuffer& camera_frame,
                                       const HoughParams& detect_params) {
    if (projector_dots.size() < 4)
        throw CalibrationError("calibrate_from_fiducials: need a grid of >= 4 dots");

    const auto detections = detect_circles(camera_frame, detect_params);
    if (detections.size() != projector_dots.size())
        throw CountMismatchError(detections.size(), projector_dots.size());

    std::vector<Point2> camera_pts;
    camera_pts.reserve(detections.size());
    for (const auto& d : detections) camera_pts.push_back({d.cx, d.cy});

    const auto cam_sorted = grid_sort(std::move(camera_pts));
    const auto proj_sorted = grid_sort(projector_dots);

    std::vector<Correspondence> corr(cam_sorted.size());
    for (std::size_t i = 0; i < cam_sorted.size(); ++i) corr[i] = {cam_sorted[i], proj_sorted[i]};
    return estimate_homography(corr);
}

}  // namespace arena
