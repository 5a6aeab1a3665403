#pragma once

#include <array>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "arena/config.hpp"
#include "arena/control.hpp"

// The experiment loop: a single-threaded, stage-ordered tick pipeline over
// all modules, with incremental CSV/event logging and soft real-time pacing.
// Given (config, master_seed, command trace) every log byte except wall_ms
// fields is reproducible.

namespace arena {

class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrackOutput {
    Track track;
    Point2 world;  // camera position mapped to world mm
};

struct TickRecord {
    std::uint64_t tick = 0;
    double wall_ms = 0.0;  // excluded from determinism guarantees
    std::size_t detections = 0;
    std::vector<TrackOutput> tracks;
    double fps_instant = 0.0;
    double field_mass = 0.0;
    std::vector<std::uint64_t> spawned_ids;
    std::vector<std::uint64_t> lost_ids;
    std::vector<std::uint64_t> applied_seqs;
};

struct MetricsSnapshot {
    double fps_instant = 0.0;
    double fps_ema = 0.0;  // alpha 0.1
    // mean ms over the last 100 ticks for stages 1-8:
    // render, detect, track, map, commands, field, compose, swarm
    std::array<double, 8> stage_mean_ms{};
};

struct ExperimentSummary {
    std::uint64_t ticks_run = 0;
    double mean_fps = 0.0;
    double min_fps = 0.0;
    double precision = 1.0;  // closed-loop only, vs true robot positions
    double recall = 1.0;
    std::uint64_t id_switches = 0;
    double final_field_mass = 0.0;
    double scenario_metric = 0.0;  // mean NN distance / opinion accuracy / mass
};

class Engine {
public:
    explicit Engine(ScenarioConfig cfg);
    ~Engine();

    // One pipeline pass. False once the run is over (duration reached, stop
    // command applied, or frames_in input exhausted).
    bool tick();

    // Stages commands for stage 5 of the next tick, in arrival order.
    void enqueue_command(const Command& cmd);

    // Seq of a control verb the run loop applied at the tick boundary; it is
    // reported in the next TickRecord's applied list.
    void note_loop_applied(std::uint64_t seq) { loop_applied_seqs_.push_back(seq); }

    void log_overrun(double over_ms);

    const TickRecord& last_record() const { return record_; }
    MetricsSnapshot metrics_snapshot() const;

    std::uint64_t ticks_run() const { return tick_; }
    bool stopped() const { return stopped_; }
    bool paused() const { return paused_; }
    void set_paused(bool p) { paused_ = p; }

    const ScenarioConfig& config() const { return cfg_; }
    const std::vector<Robot>& robots() const { return robots_; }
    const Field& field() const { return field_; }
    const TileLayer& tiles() const { return tiles_; }
    const std::vector<Track>& tracks() const { return tracker_.tracks(); }
    const ImageBuffer& camera_frame() const { return camera_frame_; }
    const ProjectorFrame& projector_frame() const { return projector_frame_; }

    ExperimentSummary summary() const;

    double detect_track_mean_ms() const;  // stages 2+3, all ticks

private:
    ImageBuffer render_stage();
    void apply_command(const Command& cmd);
    void append_logs();

    ScenarioConfig cfg_;
    double dt_;  // 1 / tick_rate, live-tunable
    Homography world_to_camera_, camera_to_world_, camera_to_projector_;
    std::vector<Robot> robots_;
    Field field_;
    TileLayer tiles_;
    Tracker tracker_;
    std::vector<DepositEvent> pending_deposits_;  // from the previous swarm step
    std::vector<Command> pending_commands_;
    std::vector<std::uint64_t> loop_applied_seqs_;  // control verbs applied while paused
    std::vector<std::string> frame_files_;          // frames_in playlist
    std::size_t frame_cursor_ = 0;
    ImageBuffer camera_frame_;
    ProjectorFrame projector_frame_;
    std::uint64_t tick_ = 0;
    bool stopped_ = false;
    bool paused_ = false;
    TickRecord record_;
    std::ofstream track_csv_, event_log_;
    std::array<std::vector<double>, 8> stage_ms_;  // ring buffers, last 100
    double fps_ema_ = 0.0;
    double fps_instant_ = 0.0;
    double detect_track_total_ms_ = 0.0;
    // summary accumulators (closed-loop ground truth)
    double fps_sum_ = 0.0, fps_min_ = 0.0;
    std::uint64_t tp_ = 0, fp_ = 0, fn_ = 0, id_switches_ = 0;
    std::vector<std::int64_t> truth_identity_;  // robot index -> track id, -1 unset
};

// Runs the full experiment: paces to tick_rate in live mode, free-runs when
// headless, drains `commands` (control verbs at the tick boundary, the rest
// into stage 5), and pushes one telemetry frame per tick when `telemetry` is
// given.
ExperimentSummary run_experiment(Engine& engine, CommandQueue* commands = nullptr,
                                 TelemetryQueue* telemetry = nullptr);

}  // namespace arena
