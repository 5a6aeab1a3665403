// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Runs entirely headless.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "arena/calib.hpp"
#include "arena/engine.hpp"
#include "arena/rng.hpp"

using namespace arena;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
    std::printf("%s: %s (%s)\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string tmp(const std::string& name) {
    return (fs::temp_directory_path() / ("arena_accept_" + name)).string();
}

// non-overlapping robot placements with a minimum center separation
std::vector<Point2> scatter(rng::Stream& s, std::size_t n, double w, double h, double min_dist,
                            double margin) {
    std::vector<Point2> pts;
    while (pts.size() < n) {
        const Point2 p{margin + s.uniform01() * (w - 2.0 * margin),
                       margin + s.uniform01() * (h - 2.0 * margin)};
        bool ok = true;
        for (const Point2& q : pts)
            if (std::hypot(p.x - q.x, p.y - q.y) < min_dist) {
                ok = false;
                break;
            }
        if (ok) pts.push_back(p);
    }
    return pts;
}

void criterion_throughput() {
    const auto t0 = Clock::now();
    const char* scenario = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "uniform", "count": 109},
      "run": {"duration": 500, "master_seed": 42, "mode": "headless"}
    })";
    Engine engine(parse_scenario(scenario));
    const ExperimentSummary s = run_experiment(engine);
    const double dt_ms = engine.detect_track_mean_ms();
    const bool pass = s.ticks_run == 500 && (s.mean_fps >= 38.0 || dt_ms <= 26.0);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "mean_fps=%.1f, detect+track=%.1f ms/frame, %.1f s", s.mean_fps, dt_ms,
                  seconds_since(t0));
    report("throughput: 1024x768, 109 robots, 500 ticks; 38 fps or detect+track <= 26 ms", pass,
           buf);
}

void criterion_detection_quality() {
    const auto t0 = Clock::now();
    CameraModel cam;  // 1024x768, identity registration: world == camera px
    cam.pixel_noise_sigma = 4.0;
    const HoughParams params;  // defaults
    rng::Stream s(7);
    std::uint64_t tp = 0, fp = 0, fn = 0;
    std::vector<double> errors;
    for (int frame = 0; frame < 100; ++frame) {
        const auto centers = scatter(s, 109, 1024.0, 768.0, 50.0, 25.0);
        std::vector<SimRobotDisc> discs;
        for (const Point2& c : centers) discs.push_back({c, 20.0});
        const ImageBuffer img =
            render_camera_view(discs, cam, rng::key(1234, frame));
        const auto dets = detect_circles(img, params);
        std::vector<bool> used(dets.size(), false);
        for (const Point2& c : centers) {
            double best = 5.0;
            std::size_t bj = dets.size();
            for (std::size_t j = 0; j < dets.size(); ++j) {
                if (used[j]) continue;
                const double d = std::hypot(dets[j].cx - c.x, dets[j].cy - c.y);
                if (d < best) {
                    best = d;
                    bj = j;
                }
            }
            if (bj < dets.size()) {
                used[bj] = true;
                ++tp;
                errors.push_back(best);
            } else {
                ++fn;
            }
        }
        for (std::size_t j = 0; j < dets.size(); ++j)
            if (!used[j]) ++fp;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    std::sort(errors.begin(), errors.end());
    double mean_err = 0.0;
    for (double e : errors) mean_err += e;
    mean_err /= errors.empty() ? 1.0 : static_cast<double>(errors.size());
    const double p95 = errors.empty() ? 1e9 : errors[errors.size() * 95 / 100];
    const double secs = seconds_since(t0);
    const bool pass =
        precision >= 0.99 && recall >= 0.99 && mean_err <= 1.0 && p95 <= 1.5 && secs <= 10.0;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "precision=%.4f recall=%.4f mean_err=%.3f px p95=%.3f px, %.1f s", precision,
                  recall, mean_err, p95, secs);
    report("detection quality: 100 frames, 109 robots, noise sigma 4", pass, buf);
}

void criterion_tracking_identity() {
    const auto t0 = Clock::now();
    rng::Stream s(11);
    std::vector<Point2> truth = scatter(s, 63, 1024.0, 768.0, 40.0, 20.0);
    Tracker tracker(TrackerParams{});
    std::vector<std::int64_t> identity(truth.size(), -1);
    std::uint64_t switches = 0;
    for (std::uint64_t tick = 0; tick < 500; ++tick) {
        for (Point2& p : truth) {
            p.x = std::clamp(p.x + (s.uniform01() * 2.0 - 1.0) * 2.0, 10.0, 1014.0);
            p.y = std::clamp(p.y + (s.uniform01() * 2.0 - 1.0) * 2.0, 10.0, 758.0);
        }
        std::vector<Detection> dets;
        for (const Point2& p : truth) dets.push_back({p.x, p.y, 20.0, 500});
        // feed in a scrambled order so association cannot rely on indices
        for (std::size_t i = 0; i + 1 < dets.size(); i += 2) std::swap(dets[i], dets[i + 1]);
        const auto& tracks = tracker.step(dets, 1.0, tick);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            double best = 5.0;
            std::int64_t tid = -1;
            for (const Track& t : tracks)
                if (t.state == TrackState::Confirmed) {
                    const double d = std::hypot(t.cx - truth[i].x, t.cy - truth[i].y);
                    if (d < best) {
                        best = d;
                        tid = static_cast<std::int64_t>(t.id);
                    }
                }
            if (tid >= 0) {
                if (identity[i] >= 0 && identity[i] != tid) ++switches;
                identity[i] = tid;
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = switches == 0 && secs <= 10.0;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "id_switches=%llu, %.1f s",
                  static_cast<unsigned long long>(switches), secs);
    report("tracking identity: 63 robots, <= 2 px/tick, 500 ticks, 0 switches", pass, buf);
}

void criterion_calibration() {
    const auto t0 = Clock::now();
    rng::Stream s(17);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        Homography H;
        H.h = {1.0 + 0.2 * (s.uniform01() - 0.5), 0.2 * (s.uniform01() - 0.5),
               100.0 * (s.uniform01() - 0.5),      0.2 * (s.uniform01() - 0.5),
               1.0 + 0.2 * (s.uniform01() - 0.5), 100.0 * (s.uniform01() - 0.5),
               2e-4 * (s.uniform01() - 0.5),      2e-4 * (s.uniform01() - 0.5), 1.0};
        std::vector<Correspondence> corr;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) {
                const Point2 src{50.0 + 150.0 * i, 40.0 + 150.0 * j};
                corr.push_back({src, map_point(H, src)});
            }
        const Homography est = estimate_homography(corr).H;
        for (int k = 0; k < 20; ++k) {
            const Point2 p{s.uniform01() * 400.0, s.uniform01() * 400.0};
            const Point2 a = map_point(H, p), b = map_point(est, p);
            worst = std::max(worst, std::hypot(a.x - b.x, a.y - b.y));
        }
    }

    // fiducial pipeline: 3x3 projected dot grid, zero-noise camera
    Homography cam_to_proj;
    cam_to_proj.h = {1.05, 0.02, 30.0, -0.01, 0.98, 20.0, 1e-5, -1e-5, 1.0};
    const Homography proj_to_cam = invert_homography(cam_to_proj);
    CameraModel cam;
    cam.width = 640;
    cam.height = 480;
    cam.background_level = 20;
    cam.robot_body_level = 220;
    std::vector<Point2> dots;
    std::vector<SimRobotDisc> discs;
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const Point2 proj{180.0 + 140.0 * i, 130.0 + 110.0 * j};
            dots.push_back(proj);
            discs.push_back({map_point(proj_to_cam, proj), 20.0});
        }
    HoughParams fp;
    fp.r_min = 15;
    fp.r_max = 25;
    fp.dp = 1.0;
    fp.center_threshold = 100;
    fp.min_center_dist = 30.0;
    const auto fit = calibrate_from_fiducials(dots, render_camera_view(discs, cam, 3), fp);
    double fid_worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Point2 p{50.0 + s.uniform01() * 500.0, 50.0 + s.uniform01() * 380.0};
        const Point2 a = map_point(cam_to_proj, p), b = map_point(fit.H, p);
        fid_worst = std::max(fid_worst, std::hypot(a.x - b.x, a.y - b.y));
    }
    const double secs = seconds_since(t0);
    const bool pass = worst < 1e-8 && fid_worst < 0.5 && secs <= 5.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "exact max err=%.2e px, fiducial max err=%.3f px, %.1f s",
                  worst, fid_worst, secs);
    report("calibration: exact recovery < 1e-8 over 1000 trials, fiducial < 0.5 px", pass, buf);
}

void criterion_field_physics() {
    const auto t0 = Clock::now();
    // mass conservation, rho = 0
    Field cons(64, 48, 10.0, 20.0, 0.0);
    rng::Stream s(23);
    for (int k = 0; k < 200; ++k)
        deposit(cons, {s.uniform01() * cons.width_mm(), s.uniform01() * cons.height_mm()},
                s.uniform01());
    const double m0 = cons.total_mass();
    for (int k = 0; k < 10000; ++k) step_field(cons, 1.0);
    const double mass_rel = std::abs(cons.total_mass() - m0) / m0;

    // evaporation-only decay
    Field evap(32, 32, 10.0, 0.0, 0.07);
    deposit(evap, {155.0, 155.0}, 2.5);
    const double dt = 0.5;
    double decay_err = 0.0;
    for (int k = 1; k <= 200; ++k) {
        step_field(evap, dt);
        const double expect = 2.5 * std::exp(-0.07 * dt * k);
        decay_err = std::max(decay_err, std::abs(evap.total_mass() - expect));
    }

    // impulse stencil: d*dt/cell^2 = 0.1 spreads 1.0 into 0.6 + 4x0.1
    Field imp(11, 11, 1.0, 0.1, 0.0);
    deposit(imp, {5.5, 5.5}, 1.0);
    step_field(imp, 1.0);
    const bool stencil_exact = imp.cell(5, 5) == 0.6 && imp.cell(4, 5) == 0.1 &&
                               imp.cell(6, 5) == 0.1 && imp.cell(5, 4) == 0.1 &&
                               imp.cell(5, 6) == 0.1;
    const double secs = seconds_since(t0);
    const bool pass = mass_rel <= 1e-9 && decay_err <= 1e-9 && stencil_exact && secs <= 5.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "mass drift=%.2e rel, decay err=%.2e, stencil %s, %.1f s", mass_rel, decay_err,
                  stencil_exact ? "exact" : "WRONG", secs);
    report("field physics: conservation 1e-9 / exp decay 1e-9 / stencil exact", pass, buf);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string decision_scenario(const std::string& csv, const std::string& evt) {
    std::ostringstream ss;
    ss << R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "uniform", "count": 63},
      "behavior": {"type": "tile_vote"},
      "tiles": {"noise_amplitude": 0.2, "noise_mode": "flip"},
      "run": {"duration": 120, "master_seed": 99, "mode": "headless",
              "track_csv": ")"
       << csv << R"(", "event_log": ")" << evt << R"("}
    })";
    return ss.str();
}

void criterion_determinism() {
    const auto t0 = Clock::now();
    const std::string csv_a = tmp("det_a.csv"), evt_a = tmp("det_a.ndjson");
    const std::string csv_b = tmp("det_b.csv"), evt_b = tmp("det_b.ndjson");
    {
        Engine e(parse_scenario(decision_scenario(csv_a, evt_a)));
        run_experiment(e);
    }
    {
        Engine e(parse_scenario(decision_scenario(csv_b, evt_b)));
        run_experiment(e);
    }
    const std::regex wall(",\"wall_ms\":[^,}]*");
    const bool csv_same = read_file(csv_a) == read_file(csv_b);
    const bool evt_same = std::regex_replace(read_file(evt_a), wall, "") ==
                          std::regex_replace(read_file(evt_b), wall, "");
    const bool nonempty = !read_file(csv_a).empty() && !read_file(evt_a).empty();
    const double secs = seconds_since(t0);
    const bool pass = csv_same && evt_same && nonempty && secs <= 20.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "track log %s, event log %s, %.1f s",
                  csv_same ? "identical" : "DIFFERS", evt_same ? "identical" : "DIFFERS", secs);
    report("determinism: 63-robot decision scenario replays byte-identically", pass, buf);
    for (const auto& p : {csv_a, evt_a, csv_b, evt_b}) fs::remove(p);
}

void criterion_phenomenology() {
    const auto t0 = Clock::now();

    // (a) two random walkers leave a persistent trail
    const char* trail_scenario = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "uniform", "count": 2},
      "behavior": {"type": "random_walk_deposit"},
      "run": {"duration": 300, "master_seed": 5, "mode": "headless"}
    })";
    Engine trail(parse_scenario(trail_scenario));
    while (trail.tick()) {
    }
    std::size_t support = 0;
    for (double v : trail.field().values)
        if (v > 1e-9) ++support;
    const bool trail_ok = trail.field().total_mass() > 0.0 && support >= 100;

    // (b) 109 dispersing robots spread monotonically (20-tick moving average)
    const char* disperse_scenario = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "cluster", "count": 109, "cluster_center": [512, 384],
                 "cluster_radius": 150},
      "behavior": {"type": "disperse"},
      "run": {"duration": 300, "master_seed": 6, "mode": "headless"}
    })";
    Engine disp(parse_scenario(disperse_scenario));
    std::vector<double> nn_mean;
    bool more = true;
    while (more) {
        more = disp.tick();
        const auto& robots = disp.robots();
        double sum = 0.0;
        for (std::size_t i = 0; i < robots.size(); ++i) {
            double best = 1e300;
            for (std::size_t j = 0; j < robots.size(); ++j)
                if (j != i)
                    best = std::min(best, std::hypot(robots[i].pos.x - robots[j].pos.x,
                                                     robots[i].pos.y - robots[j].pos.y));
            sum += best;
        }
        nn_mean.push_back(sum / static_cast<double>(robots.size()));
    }
    std::vector<double> ma;
    for (std::size_t t = 19; t < nn_mean.size(); ++t) {
        double acc = 0.0;
        for (std::size_t k = t + 1 - 20; k <= t; ++k) acc += nn_mean[k];
        ma.push_back(acc / 20.0);
    }
    bool disperse_ok = true;
    double worst_drop = 0.0;
    for (std::size_t t = 50 - 19; t + 1 < ma.size(); ++t) {
        worst_drop = std::max(worst_drop, ma[t] - ma[t + 1]);
        if (ma[t + 1] < ma[t] - 1e-9) disperse_ok = false;
    }

    // (c) noise-free tile vote agrees with the ground truth after one tick
    const char* vote_scenario = R"({
      "arena": {"width_mm": 1024, "height_mm": 768},
      "robots": {"placement": "uniform", "count": 63},
      "behavior": {"type": "tile_vote"},
      "run": {"duration": 2, "master_seed": 8, "mode": "headless"}
    })";
    Engine vote(parse_scenario(vote_scenario));
    const std::vector<Robot> before = vote.robots();
    const auto labels = vote.tiles().labels_at(0);
    vote.tick();
    std::size_t agree = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        const TileLayer& tiles = vote.tiles();
        const int ti = std::clamp(static_cast<int>(before[i].pos.x / tiles.tile_size), 0,
                                  tiles.tw - 1);
        const int tj = std::clamp(static_cast<int>(before[i].pos.y / tiles.tile_size), 0,
                                  tiles.th - 1);
        if (vote.robots()[i].opinion == labels[static_cast<std::size_t>(tj) * tiles.tw + ti])
            ++agree;
    }
    const bool vote_ok = agree == before.size();

    const double secs = seconds_since(t0);
    const bool pass = trail_ok && disperse_ok && vote_ok;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "trail support=%zu cells, disperse worst MA drop=%.2e mm, vote agreement=%zu/63,"
                  " %.1f s",
                  support, worst_drop, agree, secs);
    report("phenomenology: trail / disperse monotone spread / one-tick consensus", pass, buf);
}

}  // namespace

int main() {
    criterion_throughput();
    criterion_detection_quality();
    criterion_tracking_identity();
    criterion_calibration();
    criterion_field_physics();
    criterion_determinism();
    criterion_phenomenology();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
