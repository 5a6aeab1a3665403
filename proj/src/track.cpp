#include "arena/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arena {

const char* to_string(TrackState s) {
    switch (s) {
        case TrackState::Tentative: return "Tentative";
        case TrackState::Confirmed: return "Confirmed";
        case TrackState::Lost: return "Lost";
    }
    return "?";
}

void TrackerParams::validate() const {
    if (gate_radius <= 0.0) throw std::invalid_argument("tracker: gate_radius must be > 0");
    if (confirm_hits < 1) throw std::invalid_argument("tracker: confirm_hits must be >= 1");
    if (max_misses < 1) throw std::invalid_argument("tracker: max_misses must be >= 1");
    if (radius_smoothing_alpha < 0.0 || radius_smoothing_alpha > 1.0 ||
        velocity_smoothing_beta < 0.0 || velocity_smoothing_beta > 1.0)
        throw std::invalid_argument("tracker: smoothing factors must lie in [0,1]");
}

std::vector<Track> predict_tracks(const std::vector<Track>& tracks, double dt) {
    if (dt < 0.0) throw std::invalid_argument("predict_tracks: dt must be >= 0");
    std::vector<Track> out = tracks;
    for (Track& t : out) {
        if (t.state == TrackState::Lost) continue;
        t.cx += t.vx * dt;
        t.cy += t.vy * dt;
    }
    return out;
}

Association associate(const std::vector<Track>& predicted,
                      const std::vector<Detection>& detections, double gate) {
    if (gate <= 0.0) throw std::invalid_argument("associate: gate must be > 0");

    struct Pair {
        double dist;
        std::size_t ti, di;
    };
    std::vector<Pair> pairs;
    for (std::size_t ti = 0; ti < predicted.size(); ++ti) {
        if (predicted[ti].state == TrackState::Lost) continue;
        for (std::size_t di = 0; di < detections.size(); ++di) {
            const double d =
                std::hypot(predicted[ti].cx - detections[di].cx, predicted[ti].cy - detections[di].cy);
            if (d <= gate) pairs.push_back({d, ti, di});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (predicted[a.ti].id != predicted[b.ti].id) return predicted[a.ti].id < predicted[b.ti].id;
        return a.di < b.di;
    });

    Association out;
    std::vector<bool> track_used(predicted.size(), false), det_used(detections.size(), false);
    for (const Pair& p : pairs) {
        if (track_used[p.ti] || det_used[p.di]) continue;
        track_used[p.ti] = det_used[p.di] = true;
        out.matches.emplace_back(predicted[p.ti].id, p.di);
    }
    for (std::size_t ti = 0; ti < predicted.size(); ++ti)
        if (!track_used[ti] && predicted[ti].state != TrackState::Lost)
            out.unmatched_tracks.push_back(predicted[ti].id);
    for (std::size_t di = 0; di < detections.size(); ++di)
        if (!det_used[di]) out.unmatched_detections.push_back(di);
    return out;
}

const std::vector<Track>& Tracker::step(const std::vector<Detection>& detections, double dt,
                                        std::uint64_t tick) {
    // Lost tracks appeared in the previous output for logging; drop them now
    // so they never associate again and state stays bounded.
    std::erase_if(tracks_, [](const Track& t) { return t.state == TrackState::Lost; });

    std::vector<Track> predicted = predict_tracks(tracks_, dt);
    const Association assoc = associate(predicted, detections, params_.gate_radius);

    for (const auto& [tid, di] : assoc.matches) {
        auto it = std::find_if(predicted.begin(), predicted.end(),
                               [&](const Track& t) { return t.id == tid; });
        Track& t = *it;
        const Detection& d = detections[di];
        if (dt > 0.0) {
            const double beta = params_.velocity_smoothing_beta;
            t.vx = (1.0 - beta) * t.vx + beta * (d.cx - t.cx) / dt;
            t.vy = (1.0 - beta) * t.vy + beta * (d.cy - t.cy) / dt;
        }
        t.cx = d.cx;
        t.cy = d.cy;
        const double alpha = params_.radius_smoothing_alpha;
        t.r = (1.0 - alpha) * t.r + alpha * d.r;
        ++t.hits;
        t.misses = 0;
        t.last_update = tick;
        if (t.state == TrackState::Tentative && t.hits >= params_.confirm_hits)
            t.state = TrackState::Confirmed;
    }

    for (std::uint64_t tid : assoc.unmatched_tracks) {
        auto it = std::find_if(predicted.begin(), predicted.end(),
                               [&](const Track& t) { return t.id == tid; });
        Track& t = *it;
        ++t.misses;
        t.hits = 0;
        if (t.misses >= params_.max_misses) t.state = TrackState::Lost;
    }

    for (std::size_t di : assoc.unmatched_detections) {
        const Detection& d = detections[di];
        Track t;
        t.id = next_id_++;
        t.cx = d.cx;
        t.cy = d.cy;
        t.r = d.r;
        t.state = TrackState::Tentative;
        t.hits = 1;
        t.last_update = tick;
        predicted.push_back(t);
    }

    tracks_ = std::move(predicted);
    return tracks_;
}

}  // namespace arena
