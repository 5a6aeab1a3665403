#include <atomic>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "arena/engine.hpp"

// arena run <config> [--headless] [--ticks N] [--seed S] [--listen <addr>]
//           [--frames-dir <path>]

int main(int argc, char** argv) {
    CLI::App app{"projected-arena swarm experiment runner"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run an experiment from a scenario file");
    std::string config_path, listen_addr, frames_dir;
    bool headless = false;
    std::uint64_t ticks = 0, seed = 0;
    run->add_option("config", config_path, "scenario file")->required();
    run->add_flag("--headless", headless, "free-run without pacing or frame export");
    CLI::Option* ticks_opt = run->add_option("--ticks", ticks, "override run.duration");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override run.master_seed");
    run->add_option("--listen", listen_addr, "host:port for the control/telemetry API");
    run->add_option("--frames-dir", frames_dir, "override run.frames_dir");

    CLI11_PARSE(app, argc, argv);
    const bool have_ticks = ticks_opt->count() > 0, have_seed = seed_opt->count() > 0;

    try {
        arena::ScenarioConfig cfg = arena::load_scenario(config_path);
        if (headless) cfg.run.mode = arena::RunMode::Headless;
        if (have_ticks) cfg.run.duration = ticks;
        if (have_seed) cfg.run.master_seed = seed;
        if (!frames_dir.empty()) cfg.run.frames_dir = frames_dir;
        cfg.validate();

        arena::Engine engine(cfg);

        if (listen_addr.empty()) {
            const arena::ExperimentSummary s = arena::run_experiment(engine);
            std::printf("ticks=%llu mean_fps=%.1f min_fps=%.1f precision=%.4f recall=%.4f "
                        "id_switches=%llu field_mass=%.3f metric=%.3f\n",
                        static_cast<unsigned long long>(s.ticks_run), s.mean_fps, s.min_fps,
                        s.precision, s.recall, static_cast<unsigned long long>(s.id_switches),
                        s.final_field_mass, s.scenario_metric);
            return 0;
        }

        arena::CommandQueue commands(256);
        arena::TelemetryQueue telemetry(16);
        std::atomic<bool> shutdown{false};
        std::exception_ptr server_error;
        std::thread server([&] {
            try {
                arena::serve_control(listen_addr, commands, telemetry, shutdown);
            } catch (...) {
                server_error = std::current_exception();
                shutdown.store(true);
            }
        });
        // give a bind failure the chance to surface before the run starts
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        arena::ExperimentSummary s{};
        if (!shutdown.load()) s = arena::run_experiment(engine, &commands, &telemetry);
        shutdown.store(true);
        server.join();
        if (server_error) std::rethrow_exception(server_error);
        std::printf("ticks=%llu mean_fps=%.1f\n", static_cast<unsigned long long>(s.ticks_run),
                    s.mean_fps);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
