#pragma once

#include <vector>

#include "arena/detect.hpp"
#include "arena/homography.hpp"

// Projective calibration among camera, projector, and world frames.
// Hartley-normalized DLT plus a fiducial routine that reuses the circle
// detector on a projected dot grid.

namespace arena {

struct Correspondence {
    Point2 src;
    Point2 dst;
};

struct HomographyFit {
    Homography H;
    double rms = 0.0;  // reprojection RMS in dst units
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateConfigurationError : public CalibrationError {
public:
    using CalibrationError::CalibrationError;
};

class CountMismatchError : public CalibrationError {
public:
    CountMismatchError(std::size_t detected, std::size_t expected);
    std::size_t detected;
    std::size_t expected;
};

// Needs >= 4 correspondences in general position. Throws
// DegenerateConfigurationError when the design matrix has more than a 1-D
// null space (e.g. 3 collinear source points out of 4).
HomographyFit estimate_homography(const std::vector<Correspondence>& corr);

// Sorts a grid of points row-major after rotating to its principal axes, so
// camera-side and projector-side orderings agree under moderate projective
// distortion.
std::vector<Point2> grid_sort(std::vector<Point2> points);

// Detects the projected dots in the camera frame and pairs them with the
// projector-space dot positions by grid sort; returns camera -> projector.
HomographyFit calibrate_from_fiducials(const std::vector<Point2>& projector_dots,
                                       const ImageBuffer& camera_frame,
                                       const HoughParams& detect_params);

}  // namespace arena
