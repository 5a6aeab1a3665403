#pragma once

#include <cstdint>
#include <vector>

#include "arena/detect.hpp"

// Persistent identities over per-frame detections: constant-velocity
// prediction, gated greedy nearest-neighbor association, and the
// Tentative -> Confirmed -> Lost lifecycle.

namespace arena {

enum class TrackState { Tentative, Confirmed, Lost };

const char* to_string(TrackState s);

struct Track {
    std::uint64_t id = 0;  // unique, never reused within a run
    double cx = 0.0, cy = 0.0;  // camera px
    double vx = 0.0, vy = 0.0;  // px/s
    double r = 0.0;             // exponentially smoothed
    TrackState state = TrackState::Tentative;
    std::uint32_t hits = 0;    // consecutive matches
    std::uint32_t misses = 0;  // consecutive misses
    std::uint64_t last_update = 0;
};

struct TrackerParams {
    double gate_radius = 30.0;  // px; default 1.5x expected robot radius
    std::uint32_t confirm_hits = 3;
    std::uint32_t max_misses = 5;
    double radius_smoothing_alpha = 0.3;
    double velocity_smoothing_beta = 0.5;

    void validate() const;
};

struct Association {
    std::vector<std::pair<std::uint64_t, std::size_t>> matches;  // (track id, detection index)
    std::vector<std::uint64_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;
};

// Advances non-Lost tracks by velocity * dt; everything else untouched.
std::vector<Track> predict_tracks(const std::vector<Track>& tracks, double dt);

// Gated greedy matching: pairs within the gate sorted by ascending distance
// (ties: track id, then detection index), accepted while both sides are free.
Association associate(const std::vector<Track>& predicted,
                      const std::vector<Detection>& detections, double gate);

class Tracker {
public:
    explicit Tracker(TrackerParams params) : params_(params) { params_.validate(); }

    // predict -> associate -> update/spawn/retire; Lost tracks stay in the
    // output for logging but never associate again.
    const std::vector<Track>& step(const std::vector<Detection>& detections, double dt,
                                   std::uint64_t tick);

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerParams& params() const { return params_; }

private:
    TrackerParams params_;
    std::vector<Track> tracks_;
    std::uint64_t next_id_ = 0;
};

}  // namespace arena
