#include "arena/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arena/rng.hpp"

namespace arena {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError(path + "." + key + ": unknown key");
}

template <typename T>
void read(const json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

Rgb read_rgb(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected [r,g,b]");
    Rgb c;
    for (int i = 0; i < 3; ++i) {
        const int v = j[static_cast<std::size_t>(i)].get<int>();
        if (v < 0 || v > 255) throw ConfigError(path + ": channel out of [0,255]");
        c[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    }
    return c;
}

std::array<double, 9> read_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 9) throw ConfigError(path + ": expected 9 numbers");
    std::array<double, 9> m;
    for (std::size_t i = 0; i < 9; ++i) m[i] = j[i].get<double>();
    return m;
}

Point2 read_point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(path + ": expected [x,y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

void parse_camera(const json& j, ScenarioConfig& cfg) {
    check_keys(j, "camera",
               {"width", "height", "background_level", "robot_body_level", "pixel_noise_sigma",
                "vignette_strength", "world_to_camera"});
    read(j, "camera", "width", cfg.camera.width);
    read(j, "camera", "height", cfg.camera.height);
    read(j, "camera", "background_level", cfg.camera.background_level);
    read(j, "camera", "robot_body_level", cfg.camera.robot_body_level);
    read(j, "camera", "pixel_noise_sigma", cfg.camera.pixel_noise_sigma);
    read(j, "camera", "vignette_strength", cfg.camera.vignette_strength);
    if (j.contains("world_to_camera"))
        cfg.camera.world_to_camera.h = read_matrix(j["world_to_camera"], "camera.world_to_camera");
}

void parse_objects(const json& arr, ScenarioConfig& cfg) {
    if (!arr.is_array()) throw ConfigError("objects: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "objects[" + std::to_string(i) + "]";
        const json& j = arr[i];
        check_keys(j, path, {"id", "shape", "effect"});
        VirtualObject obj;
        read(j, path, "id", obj.id);

        const json& sh = j.at("shape");
        const std::string stype = sh.at("type").get<std::string>();
        if (stype == "disc") {
            check_keys(sh, path + ".shape", {"type", "center", "radius"});
            DiscShape d;
            d.center = read_point(sh.at("center"), path + ".shape.center");
            d.radius = sh.at("radius").get<double>();
            if (d.radius <= 0.0) throw ConfigError(path + ".shape.radius: must be > 0");
            obj.shape = d;
        } else if (stype == "rect") {
            check_keys(sh, path + ".shape", {"type", "min", "max"});
            RectShape r;
            r.min = read_point(sh.at("min"), path + ".shape.min");
            r.max = read_point(sh.at("max"), path + ".shape.max");
            if (r.max.x <= r.min.x || r.max.y <= r.min.y)
                throw ConfigError(path + ".shape: rect must have positive extent");
            obj.shape = r;
        } else {
            throw ConfigError(path + ".shape.type: unknown shape \"" + stype + "\"");
        }

        const json& ef = j.at("effect");
        const std::string etype = ef.at("type").get<std::string>();
        if (etype == "deposit_source") {
            check_keys(ef, path + ".effect", {"type", "rate"});
            DepositSourceEffect e;
            e.rate = ef.at("rate").get<double>();
            if (e.rate < 0.0) throw ConfigError(path + ".effect.rate: must be >= 0");
            obj.effect = e;
        } else if (etype == "blocker") {
            check_keys(ef, path + ".effect", {"type"});
            obj.effect = BlockerEffect{};
        } else if (etype == "display_only") {
            check_keys(ef, path + ".effect", {"type", "color"});
            DisplayOnlyEffect e;
            if (ef.contains("color")) e.color = read_rgb(ef["color"], path + ".effect.color");
            obj.effect = e;
        } else {
            throw ConfigError(path + ".effect.type: unknown effect \"" + etype + "\"");
        }
        cfg.objects.push_back(obj);
    }
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"arena", "camera", "projector", "calibration", "hough", "blur", "tracker", "field",
                "tiles", "overlay", "render", "behavior", "robots", "objects", "run"});

    ScenarioConfig cfg;

    if (j.contains("arena")) {
        const json& a = j["arena"];
        check_keys(a, "arena", {"width_mm", "height_mm"});
        read(a, "arena", "width_mm", cfg.arena.width_mm);
        read(a, "arena", "height_mm", cfg.arena.height_mm);
    }
    if (cfg.arena.width_mm <= 0.0 || cfg.arena.height_mm <= 0.0)
        throw ConfigError("arena: dimensions must be > 0");

    bool have_world_to_camera = j.contains("camera") && j["camera"].contains("world_to_camera");
    if (j.contains("camera")) parse_camera(j["camera"], cfg);

    if (j.contains("projector")) {
        const json& p = j["projector"];
        check_keys(p, "projector", {"width", "height", "mm_per_px"});
        read(p, "projector", "width", cfg.render.projector_width);
        read(p, "projector", "height", cfg.render.projector_height);
        read(p, "projector", "mm_per_px", cfg.render.mm_per_projector_px);
    }

    if (!have_world_to_camera) {
        // default registration: arena fills the camera frame
        cfg.camera.world_to_camera.h = {cfg.camera.width / cfg.arena.width_mm, 0, 0,
                                        0, cfg.camera.height / cfg.arena.height_mm, 0,
                                        0, 0, 1};
    }

    if (j.contains("calibration")) {
        const json& c = j["calibration"];
        check_keys(c, "calibration", {"camera_to_projector"});
        if (c.contains("camera_to_projector"))
            cfg.camera_to_projector =
                read_matrix(c["camera_to_projector"], "calibration.camera_to_projector");
    }

    if (j.contains("hough")) {
        const json& hj = j["hough"];
        check_keys(hj, "hough",
                   {"r_min", "r_max", "dp", "edge_threshold", "center_threshold",
                    "min_center_dist", "max_circles"});
        read(hj, "hough", "r_min", cfg.hough.r_min);
        read(hj, "hough", "r_max", cfg.hough.r_max);
        read(hj, "hough", "dp", cfg.hough.dp);
        read(hj, "hough", "edge_threshold", cfg.hough.edge_threshold);
        read(hj, "hough", "center_threshold", cfg.hough.center_threshold);
        read(hj, "hough", "min_center_dist", cfg.hough.min_center_dist);
        read(hj, "hough", "max_circles", cfg.hough.max_circles);
    }

    if (j.contains("blur")) {
        const json& b = j["blur"];
        check_keys(b, "blur", {"sigma", "ksize"});
        read(b, "blur", "sigma", cfg.blur.sigma);
        read(b, "blur", "ksize", cfg.blur.ksize);
    }

    if (j.contains("tracker")) {
        const json& t = j["tracker"];
        check_keys(t, "tracker",
                   {"gate_radius", "confirm_hits", "max_misses", "radius_smoothing_alpha",
                    "velocity_smoothing_beta"});
        read(t, "tracker", "gate_radius", cfg.tracker.gate_radius);
        read(t, "tracker", "confirm_hits", cfg.tracker.confirm_hits);
        read(t, "tracker", "max_misses", cfg.tracker.max_misses);
        read(t, "tracker", "radius_smoothing_alpha", cfg.tracker.radius_smoothing_alpha);
        read(t, "tracker", "velocity_smoothing_beta", cfg.tracker.velocity_smoothing_beta);
    }

    if (j.contains("field")) {
        const json& f = j["field"];
        check_keys(f, "field", {"cell_size_mm", "diffusion_d", "evaporation_rho"});
        read(f, "field", "cell_size_mm", cfg.field.cell_size_mm);
        read(f, "field", "diffusion_d", cfg.field.diffusion_d);
        read(f, "field", "evaporation_rho", cfg.field.evaporation_rho);
    }

    // tile grid defaults to a checkerboard spanning the arena
    cfg.tiles = TileLayer::checkerboard(8, 6, cfg.arena.width_mm / 8.0);
    if (j.contains("tiles")) {
        const json& t = j["tiles"];
        check_keys(t, "tiles",
                   {"tw", "th", "tile_size_mm", "base_colors", "noise_amplitude", "noise_mode",
                    "noise_seed"});
        int tw = cfg.tiles.tw, th = cfg.tiles.th;
        double size = cfg.tiles.tile_size;
        read(t, "tiles", "tw", tw);
        read(t, "tiles", "th", th);
        read(t, "tiles", "tile_size_mm", size);
        if (tw < 1 || th < 1) throw ConfigError("tiles: tile counts must be >= 1");
        cfg.tiles = TileLayer::checkerboard(tw, th, size);
        if (t.contains("base_colors")) {
            const json& bc = t["base_colors"];
            if (!bc.is_array() || bc.size() != 2)
                throw ConfigError("tiles.base_colors: expected 2 colors");
            cfg.tiles.base_colors[0] = read_rgb(bc[0], "tiles.base_colors[0]");
            cfg.tiles.base_colors[1] = read_rgb(bc[1], "tiles.base_colors[1]");
        }
        read(t, "tiles", "noise_amplitude", cfg.tiles.noise_amplitude);
        read(t, "tiles", "noise_seed", cfg.tiles.noise_seed);
        if (t.contains("noise_mode")) {
            const std::string m = t["noise_mode"].get<std::string>();
            if (m == "flicker")
                cfg.tiles.noise_mode = TileNoiseMode::Flicker;
            else if (m == "flip")
                cfg.tiles.noise_mode = TileNoiseMode::Flip;
            else
                throw ConfigError("tiles.noise_mode: unknown mode \"" + m + "\"");
        }
    }

    if (j.contains("overlay")) {
        const json& o = j["overlay"];
        check_keys(o, "overlay", {"ring_thickness", "palette", "color_key"});
        read(o, "overlay", "ring_thickness", cfg.overlay.ring_thickness);
        if (o.contains("palette")) {
            cfg.overlay.palette.clear();
            for (std::size_t i = 0; i < o["palette"].size(); ++i)
                cfg.overlay.palette.push_back(
                    read_rgb(o["palette"][i], "overlay.palette[" + std::to_string(i) + "]"));
        }
        if (o.contains("color_key")) {
            const std::string k = o["color_key"].get<std::string>();
            if (k == "by_track_id")
                cfg.overlay.color_key = ColorKey::ByTrackId;
            else if (k == "by_robot_state")
                cfg.overlay.color_key = ColorKey::ByRobotState;
            else
                throw ConfigError("overlay.color_key: unknown key \"" + k + "\"");
        }
    }

    if (j.contains("render")) {
        const json& r = j["render"];
        check_keys(r, "render", {"field_opacity", "field_fixed_scale", "field_scale_max"});
        read(r, "render", "field_opacity", cfg.render.field_opacity);
        read(r, "render", "field_fixed_scale", cfg.render.field_fixed_scale);
        read(r, "render", "field_scale_max", cfg.render.field_scale_max);
    }

    if (j.contains("behavior")) {
        const json& b = j["behavior"];
        check_keys(b, "behavior",
                   {"type", "sensor_angle", "sensor_offset", "sensor_noise_sigma", "sigma_turn",
                    "k_turn", "deposit_rate", "opinion_noise", "speed_mm_s", "robot_radius_mm"});
        if (b.contains("type")) {
            const std::string t = b["type"].get<std::string>();
            if (t == "random_walk_deposit")
                cfg.behavior_type = Behavior::RandomWalkDeposit;
            else if (t == "gradient_follow")
                cfg.behavior_type = Behavior::GradientFollow;
            else if (t == "disperse")
                cfg.behavior_type = Behavior::Disperse;
            else if (t == "tile_vote")
                cfg.behavior_type = Behavior::TileVote;
            else
                throw ConfigError("behavior.type: unknown behavior \"" + t + "\"");
        }
        read(b, "behavior", "sensor_angle", cfg.behavior.sensor_angle);
        read(b, "behavior", "sensor_offset", cfg.behavior.sensor_offset);
        read(b, "behavior", "sensor_noise_sigma", cfg.behavior.sensor_noise_sigma);
        read(b, "behavior", "sigma_turn", cfg.behavior.sigma_turn);
        read(b, "behavior", "k_turn", cfg.behavior.k_turn);
        read(b, "behavior", "deposit_rate", cfg.behavior.deposit_rate);
        read(b, "behavior", "opinion_noise", cfg.behavior.opinion_noise);
        read(b, "behavior", "speed_mm_s", cfg.robot_speed);
        read(b, "behavior", "robot_radius_mm", cfg.robot_radius_mm);
    }

    if (j.contains("robots")) {
        const json& r = j["robots"];
        check_keys(r, "robots",
                   {"placement", "count", "positions", "cluster_center", "cluster_radius"});
        if (r.contains("placement")) {
            const std::string p = r["placement"].get<std::string>();
            if (p == "explicit")
                cfg.robots.placement = Placement::Explicit;
            else if (p == "uniform")
                cfg.robots.placement = Placement::Uniform;
            else if (p == "cluster")
                cfg.robots.placement = Placement::Cluster;
            else
                throw ConfigError("robots.placement: unknown placement \"" + p + "\"");
        }
        read(r, "robots", "count", cfg.robots.count);
        if (r.contains("positions")) {
            for (std::size_t i = 0; i < r["positions"].size(); ++i)
                cfg.robots.positions.push_back(
                    read_point(r["positions"][i], "robots.positions[" + std::to_string(i) + "]"));
        }
        if (r.contains("cluster_center"))
            cfg.robots.cluster_center = read_point(r["cluster_center"], "robots.cluster_center");
        read(r, "robots", "cluster_radius", cfg.robots.cluster_radius);
        if (cfg.robots.placement == Placement::Explicit) {
            if (cfg.robots.positions.empty())
                throw ConfigError("robots.positions: required for explicit placement");
            cfg.robots.count = cfg.robots.positions.size();
        }
    }

    if (j.contains("objects")) parse_objects(j["objects"], cfg);

    if (j.contains("run")) {
        const json& r = j["run"];
        check_keys(r, "run",
                   {"tick_rate", "duration", "master_seed", "mode", "track_csv", "event_log",
                    "frames_dir"});
        read(r, "run", "tick_rate", cfg.run.tick_rate);
        read(r, "run", "duration", cfg.run.duration);
        read(r, "run", "master_seed", cfg.run.master_seed);
        read(r, "run", "track_csv", cfg.run.track_csv);
        read(r, "run", "event_log", cfg.run.event_log);
        read(r, "run", "frames_dir", cfg.run.frames_dir);
        if (r.contains("mode")) {
            const std::string m = r["mode"].get<std::string>();
            if (m == "closed_loop")
                cfg.run.mode = RunMode::ClosedLoop;
            else if (m == "frames_in")
                cfg.run.mode = RunMode::FramesIn;
            else if (m == "headless")
                cfg.run.mode = RunMode::Headless;
            else
                throw ConfigError("run.mode: unknown mode \"" + m + "\"");
        }
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

void ScenarioConfig::validate() const {
    hough.validate();
    tracker.validate();
    if (blur.ksize < 1 || blur.ksize % 2 == 0)
        throw ConfigError("blur.ksize: must be odd and >= 1");
    if (blur.sigma <= 0.0) throw ConfigError("blur.sigma: must be > 0");
    if (camera.robot_body_level == camera.background_level)
        throw ConfigError("camera.robot_body_level: must differ from background_level");
    if (camera.pixel_noise_sigma < 0.0)
        throw ConfigError("camera.pixel_noise_sigma: must be >= 0");
    if (camera.vignette_strength < 0.0 || camera.vignette_strength > 1.0)
        throw ConfigError("camera.vignette_strength: out of [0,1]");
    if (run.tick_rate <= 0.0) throw ConfigError("run.tick_rate: must be > 0");
    if (run.duration < 1) throw ConfigError("run.duration: must be >= 1");
    if (field.cell_size_mm <= 0.0) throw ConfigError("field.cell_size_mm: must be > 0");
    const double dt = 1.0 / run.tick_rate;
    if (field.diffusion_d * dt / (field.cell_size_mm * field.cell_size_mm) > 0.25)
        throw ConfigError("field.diffusion_d: violates stability bound d*dt/cell^2 <= 0.25");
    if (field.evaporation_rho < 0.0) throw ConfigError("field.evaporation_rho: must be >= 0");
    if (tiles.noise_amplitude < 0.0 || tiles.noise_amplitude > 1.0)
        throw ConfigError("tiles.noise_amplitude: out of [0,1]");
    if (overlay.palette.empty()) throw ConfigError("overlay.palette: must be non-empty");
    if (overlay.ring_thickness < 1) throw ConfigError("overlay.ring_thickness: must be >= 1");
    if (render.field_opacity < 0.0 || render.field_opacity > 1.0)
        throw ConfigError("render.field_opacity: out of [0,1]");
    if (behavior.opinion_noise < 0.0 || behavior.opinion_noise > 1.0)
        throw ConfigError("behavior.opinion_noise: out of [0,1]");
    if (robot_speed < 0.0) throw ConfigError("behavior.speed_mm_s: must be >= 0");
    if (robot_radius_mm <= 0.0) throw ConfigError("behavior.robot_radius_mm: must be > 0");
    if (robots.count < 1) throw ConfigError("robots.count: must be >= 1");
    for (std::size_t i = 0; i < robots.positions.size(); ++i) {
        const Point2& p = robots.positions[i];
        if (p.x < 0.0 || p.y < 0.0 || p.x > arena.width_mm || p.y > arena.height_mm)
            throw ConfigError("robots.positions[" + std::to_string(i) + "]: outside arena");
    }
    if (run.mode == RunMode::FramesIn && run.frames_dir.empty())
        throw ConfigError("run.frames_dir: required for frames_in mode");
}

std::vector<Robot> ScenarioConfig::make_robots() const {
    std::vector<Robot> out;
    out.reserve(robots.count);
    rng::Stream stream = rng::substream(run.master_seed, "placement", 0);
    const double margin = robot_radius_mm;
    for (std::size_t i = 0; i < robots.count; ++i) {
        Robot r;
        r.id = i;
        r.speed = robot_speed;
        r.radius = robot_radius_mm;
        r.behavior = behavior_type;
        r.heading = wrap_angle(stream.uniform01() * 6.283185307179586477);
        switch (robots.placement) {
            case Placement::Explicit:
                r.pos = robots.positions[i];
                break;
            case Placement::Uniform:
                r.pos = {margin + stream.uniform01() * (arena.width_mm - 2.0 * margin),
                         margin + stream.uniform01() * (arena.height_mm - 2.0 * margin)};
                break;
            case Placement::Cluster: {
                const double ang = stream.uniform01() * 6.283185307179586477;
                const double rad = robots.cluster_radius * std::sqrt(stream.uniform01());
                r.pos = {std::clamp(robots.cluster_center.x + rad * std::cos(ang), margin,
                                    arena.width_mm - margin),
                         std::clamp(robots.cluster_center.y + rad * std::sin(ang), margin,
                                    arena.height_mm - margin)};
                break;
            }
        }
        out.push_back(r);
    }
    return out;
}

Field ScenarioConfig::make_field() const {
    const int gw = std::max(1, static_cast<int>(std::ceil(arena.width_mm / field.cell_size_mm)));
    const int gh = std::max(1, static_cast<int>(std::ceil(arena.height_mm / field.cell_size_mm)));
    return Field(gw, gh, field.cell_size_mm, field.diffusion_d, field.evaporation_rho);
}

}  // namespace arena
