#include <algorithm>
#include <cmath>
#include <map>

#include "arena/rng.hpp"
#include "arena/track.hpp"
#include "doctest.h"

using namespace arena;

namespace {

Track make_track(std::uint64_t id, double cx, double cy, double vx = 0.0, double vy = 0.0) {
    Track t;
    t.id = id;
    t.cx = cx;
    t.cy = cy;
    t.vx = vx;
    t.vy = vy;
    t.state = TrackState::Confirmed;
    return t;
}

Detection det(double cx, double cy, double r = 10.0) { return {cx, cy, r, 100}; }

// brute force over all gated assignments: minimal cost among those of maximal
// cardinality; used as the oracle for the greedy matcher
struct BruteResult {
    std::size_t cardinality = 0;
    double cost = 0.0;
};

void brute_rec(const std::vector<std::vector<double>>& d, double gate, std::size_t ti,
               std::vector<bool>& used, std::size_t card, double cost, BruteResult& best) {
    if (ti == d.size()) {
        if (card > best.cardinality || (card == best.cardinality && cost < best.cost))
            best = {card, cost};
        return;
    }
    brute_rec(d, gate, ti + 1, used, card, cost, best);  // leave track ti unmatched
    for (std::size_t di = 0; di < used.size(); ++di) {
        if (used[di] || d[ti][di] > gate) continue;
        used[di] = true;
        brute_rec(d, gate, ti + 1, used, card + 1, cost + d[ti][di], best);
        used[di] = false;
    }
}

}  // namespace

TEST_SUITE_BEGIN("track");

TEST_CASE("prediction advances by velocity times dt") {
    const auto out = predict_tracks({make_track(0, 10.0, 10.0, 2.0, -1.0)}, 0.5);
    CHECK(out[0].cx == doctest::Approx(11.0));
    CHECK(out[0].cy == doctest::Approx(9.5));
}

TEST_CASE("prediction with dt=0 is the identity; Lost tracks never move") {
    Track lost = make_track(1, 5.0, 5.0, 3.0, 3.0);
    lost.state = TrackState::Lost;
    const auto out = predict_tracks({make_track(0, 10.0, 10.0, 2.0, -1.0), lost}, 0.0);
    CHECK(out[0].cx == 10.0);
    const auto out2 = predict_tracks({lost}, 2.0);
    CHECK(out2[0].cx == 5.0);
    CHECK_THROWS_AS(predict_tracks({}, -0.1), std::invalid_argument);
}

TEST_CASE("association within and outside the gate") {
    const auto a = associate({make_track(0, 0.0, 0.0)}, {det(3.0, 0.0)}, 10.0);
    CHECK(a.matches.size() == 1);
    const auto b = associate({make_track(0, 0.0, 0.0)}, {det(12.0, 0.0)}, 10.0);
    CHECK(b.matches.empty());
    CHECK(b.unmatched_tracks.size() == 1);
    CHECK(b.unmatched_detections.size() == 1);
}

TEST_CASE("greedy picks locally cheapest pairs on the 2x2 example") {
    // distance matrix [[1,5],[2,10]]: greedy picks A->d0 (1) then B->d1 (10),
    // total 11. The globally optimal assignment is A->d1 + B->d0, total 7;
    // greedy trades that optimality for speed, which the tracker accepts.
    const std::vector<std::vector<double>> dist{{1.0, 5.0}, {2.0, 10.0}};
    struct Pair {
        double d;
        std::size_t ti, di;
    };
    std::vector<Pair> pairs{{1.0, 0, 0}, {5.0, 0, 1}, {2.0, 1, 0}, {10.0, 1, 1}};
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
    std::vector<bool> t_used(2, false), d_used(2, false);
    double greedy_cost = 0.0;
    for (const Pair& p : pairs)
        if (!t_used[p.ti] && !d_used[p.di]) {
            t_used[p.ti] = d_used[p.di] = true;
            greedy_cost += p.d;
        }
    CHECK(greedy_cost == doctest::Approx(11.0));

    BruteResult best;
    std::vector<bool> used(2, false);
    brute_rec(dist, 100.0, 0, used, 0, 0.0, best);
    CHECK(best.cardinality == 2);
    CHECK(best.cost == doctest::Approx(7.0));
}

TEST_CASE("greedy association is a valid maximal gated matching on random instances") {
    rng::Stream s(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t nt = 1 + s.next_u64() % 4, nd = 1 + s.next_u64() % 4;
        std::vector<Track> tracks;
        std::vector<Detection> dets;
        for (std::size_t i = 0; i < nt; ++i)
            tracks.push_back(make_track(i, s.uniform01() * 100.0, s.uniform01() * 100.0));
        for (std::size_t i = 0; i < nd; ++i)
            dets.push_back(det(s.uniform01() * 100.0, s.uniform01() * 100.0));
        const double gate = 30.0;
        const auto a = associate(tracks, dets, gate);

        std::vector<bool> t_used(nt, false), d_used(nd, false);
        for (const auto& [tid, di] : a.matches) {
            CHECK_FALSE(t_used[tid]);
            CHECK_FALSE(d_used[di]);
            t_used[tid] = d_used[di] = true;
            CHECK(std::hypot(tracks[tid].cx - dets[di].cx, tracks[tid].cy - dets[di].cy) <= gate);
        }
        // maximal: no free in-gate pair remains
        for (std::size_t ti = 0; ti < nt; ++ti)
            for (std::size_t di = 0; di < nd; ++di)
                if (!t_used[ti] && !d_used[di])
                    CHECK(std::hypot(tracks[ti].cx - dets[di].cx, tracks[ti].cy - dets[di].cy) >
                          gate);
    }
}

TEST_CASE("association is scale symmetric") {
    rng::Stream s(7);
    std::vector<Track> tracks;
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < 4; ++i) {
        tracks.push_back(make_track(i, s.uniform01() * 50.0, s.uniform01() * 50.0));
        dets.push_back(det(s.uniform01() * 50.0, s.uniform01() * 50.0));
    }
    const auto base = associate(tracks, dets, 20.0);
    for (auto& t : tracks) {
        t.cx *= 3.0;
        t.cy *= 3.0;
    }
    for (auto& d : dets) {
        d.cx *= 3.0;
        d.cy *= 3.0;
    }
    const auto scaled = associate(tracks, dets, 60.0);
    CHECK(base.matches == scaled.matches);
}

TEST_CASE("a steady detection confirms after confirm_hits ticks with one id") {
    TrackerParams p;
    p.confirm_hits = 3;
    Tracker tracker(p);
    for (std::uint64_t tick = 1; tick <= 4; ++tick) {
        const auto& tracks = tracker.step({det(50.0, 50.0)}, 1.0 / 30.0, tick);
        REQUIRE(tracks.size() == 1);
        CHECK(tracks[0].id == 0);
        CHECK(tracks[0].state ==
              (tick >= 3 ? TrackState::Confirmed : TrackState::Tentative));
    }
}

TEST_CASE("a track is Lost after exactly max_misses empty frames") {
    TrackerParams p;
    p.max_misses = 5;
    Tracker tracker(p);
    tracker.step({det(50.0, 50.0)}, 0.033, 0);
    for (std::uint64_t tick = 1; tick <= 5; ++tick) {
        const auto& tracks = tracker.step({}, 0.033, tick);
        REQUIRE(tracks.size() == 1);
        CHECK(tracks[0].state == (tick == 5 ? TrackState::Lost : TrackState::Tentative));
    }
    // retained once for logging, pruned afterwards
    CHECK(tracker.step({}, 0.033, 6).empty());
}

TEST_CASE("ids are unique and monotonically increasing") {
    Tracker tracker(TrackerParams{});
    tracker.step({det(10.0, 10.0), det(200.0, 10.0)}, 0.033, 0);
    tracker.step({det(10.0, 10.0), det(200.0, 10.0), det(400.0, 10.0)}, 0.033, 1);
    std::vector<std::uint64_t> ids;
    for (const auto& t : tracker.tracks()) ids.push_back(t.id);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::uint64_t>{0, 1, 2});
}

TEST_CASE("no identity switches while robots drift slowly") {
    TrackerParams p;
    p.gate_radius = 15.0;
    Tracker tracker(p);
    rng::Stream s(11);
    std::vector<Point2> truth;
    for (int i = 0; i < 5; ++i) truth.push_back({60.0 + 90.0 * i, 50.0});

    std::map<std::size_t, std::uint64_t> identity;  // truth index -> track id
    for (std::uint64_t tick = 0; tick < 50; ++tick) {
        std::vector<Detection> dets;
        for (auto& pos : truth) {
            pos.x += (s.uniform01() - 0.5) * 4.0;
            pos.y += (s.uniform01() - 0.5) * 4.0;
            dets.push_back(det(pos.x, pos.y));
        }
        const auto& tracks = tracker.step(dets, 1.0, tick);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            double best = 1e9;
            std::uint64_t best_id = 0;
            for (const auto& t : tracks) {
                const double d = std::hypot(t.cx - truth[i].x, t.cy - truth[i].y);
                if (d < best) {
                    best = d;
                    best_id = t.id;
                }
            }
            if (tick == 0)
                identity[i] = best_id;
            else
                CHECK(identity[i] == best_id);
        }
    }
}

TEST_SUITE_END();
