#include "arena/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include <nlohmann/json.hpp>

#include "arena/rng.hpp"

namespace arena {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using ojson = nlohmann::ordered_json;

namespace {

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

void push_capped(std::vector<double>& v, double x) {
    v.push_back(x);
    if (v.size() > 100) v.erase(v.begin());
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

Engine::Engine(ScenarioConfig cfg)
    : cfg_(std::move(cfg)), dt_(1.0 / cfg_.run.tick_rate),
      field_(cfg_.make_field()), tiles_(cfg_.tiles), tracker_(cfg_.tracker) {
    world_to_camera_ = cfg_.camera.world_to_camera;
    camera_to_world_ = invert_homography(world_to_camera_);
    if (cfg_.camera_to_projector) {
        Homography h;
        h.h = *cfg_.camera_to_projector;
        camera_to_projector_ = h;
    } else {
        // derive from registration: camera -> world -> projector
        camera_to_projector_ = compose(
            Homography::scale(1.0 / cfg_.render.mm_per_projector_px), camera_to_world_);
    }
    if (tiles_.noise_seed == 0)
        tiles_.noise_seed = rng::substream_seed(cfg_.run.master_seed, "tiles", 0);

    if (cfg_.run.mode != RunMode::FramesIn) {
        robots_ = cfg_.make_robots();
        truth_identity_.assign(robots_.size(), -1);
    } else {
        for (const auto& e : fs::directory_iterator(cfg_.run.frames_dir)) {
            const std::string ext = e.path().extension().string();
            if (ext == ".pgm" || ext == ".ppm") frame_files_.push_back(e.path().string());
        }
        std::sort(frame_files_.begin(), frame_files_.end());
    }

    if (!cfg_.run.track_csv.empty()) {
        track_csv_.open(cfg_.run.track_csv, std::ios::trunc);
        if (!track_csv_) throw EngineError("cannot open track log " + cfg_.run.track_csv);
        track_csv_ << "tick,track_id,state,cx_px,cy_px,r_px,world_x_mm,world_y_mm\n";
    }
    if (!cfg_.run.event_log.empty()) {
        event_log_.open(cfg_.run.event_log, std::ios::trunc);
        if (!event_log_) throw EngineError("cannot open event log " + cfg_.run.event_log);
    }
    if (cfg_.run.mode == RunMode::ClosedLoop && !cfg_.run.frames_dir.empty()) {
        std::error_code ec;
        fs::create_directories(cfg_.run.frames_dir, ec);
        if (ec) throw EngineError("cannot create frames dir " + cfg_.run.frames_dir);
    }
}

Engine::~Engine() {
    if (track_csv_.is_open()) track_csv_.flush();
    if (event_log_.is_open()) event_log_.flush();
}

void Engine::enqueue_command(const Command& cmd) { pending_commands_.push_back(cmd); }

ImageBuffer Engine::render_stage() {
    if (cfg_.run.mode == RunMode::FramesIn) {
        if (frame_cursor_ >= frame_files_.size()) {
            stopped_ = true;  // clean end of input
            return ImageBuffer();
        }
        return load_pnm(frame_files_[frame_cursor_++]);
    }
    std::vector<SimRobotDisc> discs;
    discs.reserve(robots_.size());
    for (const Robot& r : robots_) discs.push_back({r.pos, r.radius});
    ImageBuffer frame = render_camera_view(
        discs, cfg_.camera, rng::substream_seed(cfg_.run.master_seed, "camera", tick_));
    if (cfg_.run.mode == RunMode::ClosedLoop && !cfg_.run.frames_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06llu.pgm",
                      static_cast<unsigned long long>(tick_));
        save_pnm(frame, (fs::path(cfg_.run.frames_dir) / name).string());
    }
    return frame;
}

void Engine::apply_command(const Command& cmd) {
    struct Apply {
        Engine& e;
        void operator()(RunControl rc) {
            if (rc == RunControl::Pause) e.paused_ = true;
            if (rc == RunControl::Resume) e.paused_ = false;
            if (rc == RunControl::Stop) e.stopped_ = true;
        }
        void operator()(const SetNoise& c) { e.tiles_.set_amplitude(c.amplitude, e.tick_); }
        void operator()(const AddObject& c) { e.cfg_.objects.push_back(c.object); }
        void operator()(const RemoveObject& c) {
            std::erase_if(e.cfg_.objects,
                          [&](const VirtualObject& o) { return o.id == c.id; });
        }
        void operator()(const DepositAt& c) { deposit(e.field_, c.pos, c.amount); }
        void operator()(const SetParam& c) {
            if (c.path == "tiles.noise_amplitude") {
                e.tiles_.set_amplitude(c.number, e.tick_);
            } else if (c.path == "field.evaporation_rho") {
                e.field_.evaporation_rho = c.number;
            } else if (c.path == "overlay.palette") {
                e.cfg_.overlay.palette = c.palette;
            } else if (c.path == "run.tick_rate") {
                const double dt = 1.0 / c.number;
                Field probe = e.field_;
                probe.check_stability(dt);  // throws if the new pacing breaks it
                e.cfg_.run.tick_rate = c.number;
                e.dt_ = dt;
            }
        }
    };
    std::visit(Apply{*this}, cmd.action);
}

bool Engine::tick() {
    if (stopped_ || tick_ >= cfg_.run.duration) return false;

    const Clock::time_point t0 = Clock::now();
    Clock::time_point marks[9];
    marks[0] = t0;

    // 1: camera frame
    camera_frame_ = render_stage();
    if (stopped_) return false;  // frames_in exhausted before this tick
    marks[1] = Clock::now();

    // 2: detection
    const std::vector<Detection> dets =
        detect_circles(camera_frame_, cfg_.hough, cfg_.blur.sigma, cfg_.blur.ksize);
    marks[2] = Clock::now();

    // 3: tracking
    std::vector<std::uint64_t> known_ids;
    for (const Track& t : tracker_.tracks()) known_ids.push_back(t.id);
    const std::vector<Track>& tracks = tracker_.step(dets, dt_, tick_);
    marks[3] = Clock::now();

    // 4: map to world
    record_ = TickRecord{};
    record_.tick = tick_;
    record_.detections = dets.size();
    for (const Track& t : tracks) {
        record_.tracks.push_back({t, map_point(camera_to_world_, {t.cx, t.cy})});
        if (std::find(known_ids.begin(), known_ids.end(), t.id) == known_ids.end())
            record_.spawned_ids.push_back(t.id);
        if (t.state == TrackState::Lost) record_.lost_ids.push_back(t.id);
    }
    marks[4] = Clock::now();

    // 5: operator commands, atomic and in arrival order
    record_.applied_seqs = std::move(loop_applied_seqs_);
    loop_applied_seqs_.clear();
    std::vector<std::pair<std::uint64_t, std::string>> command_errors;
    for (const Command& cmd : pending_commands_) {
        try {
            apply_command(cmd);
        } catch (const std::exception& e) {
            command_errors.emplace_back(cmd.seq, e.what());
        }
        record_.applied_seqs.push_back(cmd.seq);
    }
    pending_commands_.clear();
    marks[5] = Clock::now();

    // 6: environment physics
    for (const DepositEvent& d : pending_deposits_) deposit(field_, d.pos, d.amount);
    pending_deposits_.clear();
    apply_deposit_sources(field_, cfg_.objects, dt_);
    step_field(field_, dt_, blocked_mask(field_, cfg_.objects));
    marks[6] = Clock::now();

    // 7: projector frame
    projector_frame_ =
        compose_projector_frame(tiles_, field_, cfg_.objects, tracks, camera_to_projector_,
                                cfg_.overlay, cfg_.render, tick_);
    marks[7] = Clock::now();

    // 8: swarm
    if (cfg_.run.mode != RunMode::FramesIn) {
        // summary bookkeeping against the positions the camera actually saw
        const double gate_px = 10.0;
        std::vector<bool> det_used(dets.size(), false);
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            const Point2 cam = map_point(world_to_camera_, robots_[i].pos);
            double best = gate_px;
            std::size_t best_j = dets.size();
            for (std::size_t j = 0; j < dets.size(); ++j) {
                if (det_used[j]) continue;
                const double d = std::hypot(dets[j].cx - cam.x, dets[j].cy - cam.y);
                if (d < best) {
                    best = d;
                    best_j = j;
                }
            }
            if (best_j < dets.size()) {
                det_used[best_j] = true;
                ++tp_;
            } else {
                ++fn_;
            }
            // identity bookkeeping on Confirmed tracks
            double tbest = gate_px;
            std::int64_t tid = -1;
            for (const Track& t : tracks)
                if (t.state == TrackState::Confirmed) {
                    const double d = std::hypot(t.cx - cam.x, t.cy - cam.y);
                    if (d < tbest) {
                        tbest = d;
                        tid = static_cast<std::int64_t>(t.id);
                    }
                }
            if (tid >= 0) {
                if (truth_identity_[i] >= 0 && truth_identity_[i] != tid) ++id_switches_;
                truth_identity_[i] = tid;
            }
        }
        for (std::size_t j = 0; j < dets.size(); ++j)
            if (!det_used[j]) ++fp_;

        const ArenaBounds bounds = cfg_.arena;
        SwarmStep sw = step_swarm(robots_, field_, tiles_, bounds, tick_, dt_, cfg_.behavior,
                                  rng::substream_seed(cfg_.run.master_seed, "swarm", 0));
        robots_ = std::move(sw.robots);
        pending_deposits_ = std::move(sw.deposits);
    }
    marks[8] = Clock::now();

    // 9: record + logs
    record_.field_mass = field_.total_mass();
    const double tick_ms = ms_between(t0, marks[8]);
    record_.wall_ms = tick_ms;
    fps_instant_ = tick_ms > 0.0 ? 1000.0 / tick_ms : 0.0;
    record_.fps_instant = fps_instant_;
    fps_ema_ = tick_ == 0 ? fps_instant_ : 0.1 * fps_instant_ + 0.9 * fps_ema_;
    fps_sum_ += fps_instant_;
    fps_min_ = tick_ == 0 ? fps_instant_ : std::min(fps_min_, fps_instant_);
    for (int s = 0; s < 8; ++s) push_capped(stage_ms_[s], ms_between(marks[s], marks[s + 1]));
    detect_track_total_ms_ += ms_between(marks[1], marks[3]);

    append_logs();
    for (const auto& [seq, reason] : command_errors) {
        if (event_log_.is_open()) {
            ojson e{{"type", "command_error"}, {"tick", tick_}, {"seq", seq},
                    {"reason", reason}};
            event_log_ << e.dump() << '\n';
        }
    }
    if ((tick_ + 1) % 32 == 0 || tick_ + 1 == cfg_.run.duration || stopped_) {
        if (track_csv_.is_open()) track_csv_.flush();
        if (event_log_.is_open()) event_log_.flush();
    }

    ++tick_;
    return tick_ < cfg_.run.duration && !stopped_;
}

void Engine::append_logs() {
    if (track_csv_.is_open()) {
        char buf[160];
        for (const TrackOutput& t : record_.tracks) {
            std::snprintf(buf, sizeof(buf), "%llu,%llu,%s,%.3f,%.3f,%.3f,%.3f,%.3f\n",
                          static_cast<unsigned long long>(record_.tick),
                          static_cast<unsigned long long>(t.track.id), to_string(t.track.state),
                          t.track.cx, t.track.cy, t.track.r, t.world.x, t.world.y);
            track_csv_ << buf;
        }
        if (!track_csv_) throw EngineError("track log write failure");
    }
    if (event_log_.is_open()) {
        ojson heartbeat{{"type", "tick"},
                        {"tick", record_.tick},
                        {"detections", record_.detections},
                        {"tracks", record_.tracks.size()},
                        {"field_mass", record_.field_mass},
                        {"wall_ms", record_.wall_ms}};
        event_log_ << heartbeat.dump() << '\n';
        for (std::uint64_t id : record_.spawned_ids) {
            ojson e{{"type", "spawn"}, {"tick", record_.tick}, {"id", id}};
            event_log_ << e.dump() << '\n';
        }
        for (std::uint64_t id : record_.lost_ids) {
            ojson e{{"type", "lost"}, {"tick", record_.tick}, {"id", id}};
            event_log_ << e.dump() << '\n';
        }
        for (std::uint64_t seq : record_.applied_seqs) {
            ojson e{{"type", "command"}, {"tick", record_.tick}, {"seq", seq}};
            event_log_ << e.dump() << '\n';
        }
        if (!event_log_) throw EngineError("event log write failure");
    }
}

void Engine::log_overrun(double over_ms) {
    if (!event_log_.is_open()) return;
    ojson e{{"type", "overrun"}, {"tick", tick_}, {"wall_ms", over_ms}};
    event_log_ << e.dump() << '\n';
}

MetricsSnapshot Engine::metrics_snapshot() const {
    MetricsSnapshot m;
    m.fps_instant = fps_instant_;
    m.fps_ema = fps_ema_;
    for (int s = 0; s < 8; ++s) m.stage_mean_ms[static_cast<std::size_t>(s)] = mean_of(stage_ms_[s]);
    return m;
}

double Engine::detect_track_mean_ms() const {
    return tick_ > 0 ? detect_track_total_ms_ / static_cast<double>(tick_) : 0.0;
}

ExperimentSummary Engine::summary() const {
    ExperimentSummary s;
    s.ticks_run = tick_;
    s.mean_fps = tick_ > 0 ? fps_sum_ / static_cast<double>(tick_) : 0.0;
    s.min_fps = fps_min_;
    if (tp_ + fp_ > 0) s.precision = static_cast<double>(tp_) / static_cast<double>(tp_ + fp_);
    if (tp_ + fn_ > 0) s.recall = static_cast<double>(tp_) / static_cast<double>(tp_ + fn_);
    s.id_switches = id_switches_;
    s.final_field_mass = field_.total_mass();
    switch (cfg_.behavior_type) {
        case Behavior::Disperse: {
            // mean nearest-neighbor distance, world mm
            double sum = 0.0;
            for (std::size_t i = 0; i < robots_.size(); ++i) {
                double best = 1e300;
                for (std::size_t j = 0; j < robots_.size(); ++j)
                    if (j != i)
                        best = std::min(best, std::hypot(robots_[i].pos.x - robots_[j].pos.x,
                                                         robots_[i].pos.y - robots_[j].pos.y));
                sum += best;
            }
            s.scenario_metric = robots_.size() > 1 ? sum / static_cast<double>(robots_.size()) : 0.0;
            break;
        }
        case Behavior::TileVote: {
            const auto labels = tiles_.labels_at(tick_ > 0 ? tick_ - 1 : 0);
            std::size_t agree = 0;
            for (const Robot& r : robots_) {
                const int ti = std::clamp(static_cast<int>(r.pos.x / tiles_.tile_size), 0,
                                          tiles_.tw - 1);
                const int tj = std::clamp(static_cast<int>(r.pos.y / tiles_.tile_size), 0,
                                          tiles_.th - 1);
                if (r.opinion == labels[static_cast<std::size_t>(tj) * tiles_.tw + ti]) ++agree;
            }
            s.scenario_metric =
                robots_.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(robots_.size());
            break;
        }
        default:
            s.scenario_metric = s.final_field_mass;
    }
    return s;
}

ExperimentSummary run_experiment(Engine& engine, CommandQueue* commands,
                                 TelemetryQueue* telemetry) {
    const bool pace = engine.config().run.mode != RunMode::Headless;
    Clock::time_point deadline = Clock::now();
    bool more = true;
    while (more) {
        if (commands) {
            while (auto cmd = commands->try_pop()) {
                // control verbs act at the tick boundary so a paused engine
                // can still resume or stop; everything else waits for stage 5
                if (const auto* rc = std::get_if<RunControl>(&cmd->action); rc && engine.paused()) {
                    if (*rc == RunControl::Stop) {
                        engine.enqueue_command(*cmd);  // applied at the wake-up tick
                        engine.set_paused(false);
                    } else {
                        if (*rc == RunControl::Resume || *rc == RunControl::Start)
                            engine.set_paused(false);
                        engine.note_loop_applied(cmd->seq);
                    }
                } else {
                    engine.enqueue_command(*cmd);
                }
            }
        }
        if (engine.paused()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            deadline = Clock::now();
            continue;
        }
        const std::uint64_t before = engine.ticks_run();
        more = engine.tick();
        if (engine.ticks_run() == before) break;  // no work done: stopped or out of frames

        if (telemetry) {
            const TickRecord& rec = engine.last_record();
            std::vector<TelemetryTrack> tt;
            const std::size_t palette = engine.config().overlay.palette.size();
            for (const TrackOutput& t : rec.tracks)
                tt.push_back({t.track.id, t.world, static_cast<int>(t.track.state),
                              static_cast<int>(t.track.id % palette)});
            telemetry->push({rec.tick,
                             telemetry_json(rec.tick, engine.metrics_snapshot().fps_ema, tt,
                                            engine.field(), engine.tiles(), rec.tick,
                                            rec.applied_seqs)});
        }
        if (pace && more) {
            const double dt_s = 1.0 / engine.config().run.tick_rate;
            deadline += std::chrono::duration_cast<Clock::duration>(
                std::chrono::duration<double>(dt_s));
            const Clock::time_point now = Clock::now();
            if (now <= deadline) {
                std::this_thread::sleep_until(deadline);
            } else {
                engine.log_overrun(ms_between(deadline, now));
                deadline = now;
            }
        }
    }
    return engine.summary();
}

}  // namespace arena
