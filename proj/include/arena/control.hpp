#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "arena/field.hpp"
#include "arena/render.hpp"

// Operator control and telemetry: command parsing/validation, the bounded
// queues shared with the experiment loop, and a line-delimited JSON TCP
// server. The server never blocks the tick thread; backpressure is handled by
// dropping the oldest telemetry.

namespace arena {

enum class RunControl { Start, Pause, Resume, Stop };

struct SetNoise {
    double amplitude = 0.0;
};
struct AddObject {
    VirtualObject object;
};
struct RemoveObject {
    std::uint64_t id = 0;
};
struct DepositAt {
    Point2 pos;
    double amount = 0.0;
};
// Live-tunable paths only: tiles.noise_amplitude, field.evaporation_rho,
// overlay.palette, run.tick_rate.
struct SetParam {
    std::string path;
    double number = 0.0;
    std::vector<Rgb> palette;  // used when path == "overlay.palette"
};

using CommandAction =
    std::variant<RunControl, SetNoise, AddObject, RemoveObject, DepositAt, SetParam>;

struct Command {
    std::uint64_t seq = 0;
    CommandAction action;
};

const char* verb_name(const CommandAction& action);

// Validates one wire line. Valid input yields the command plus an ack line;
// anything else yields only an error line. Replies carry no trailing newline.
struct CommandParse {
    std::optional<Command> command;
    std::string reply;
};
CommandParse handle_command(const std::string& line);

// Fixed-capacity FIFO; push drops the oldest element when full so producers
// never block.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(T value) {
        std::lock_guard lock(mu_);
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(value));
        cv_.notify_one();
    }

    std::optional<T> try_pop() {
        std::lock_guard lock(mu_);
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        return v;
    }

    // Blocks up to timeout_ms; nullopt on timeout.
    std::optional<T> pop_wait(int timeout_ms) {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms),
                     [&] { return !items_.empty(); });
        if (items_.empty()) return std::nullopt;
        T v = std::move(items_.front());
        items_.pop_front();
        return v;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return items_.size();
    }

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<T> items_;
};

struct TelemetryFrame {
    std::uint64_t tick = 0;
    std::string json_line;  // serialized message, <= 64 KiB, no newline
};

using CommandQueue = BoundedQueue<Command>;
using TelemetryQueue = BoundedQueue<TelemetryFrame>;

struct TelemetryTrack {
    std::uint64_t id = 0;
    Point2 world;
    int state = 0;  // TrackState as int
    int color_index = 0;
};

// Builds the telemetry wire line: tracks, area-averaged field thumbnail
// (<= 64x64, 8-bit + min/max, base64), tile labels, fps, applied seqs.
std::string telemetry_json(std::uint64_t tick, double fps,
                           const std::vector<TelemetryTrack>& tracks, const Field& field,
                           const TileLayer& tiles, std::uint64_t t,
                           const std::vector<std::uint64_t>& applied_seqs);

std::string base64_encode(const std::uint8_t* data, std::size_t len);

// Listens on "host:port"; accepts multiple clients, parses one command per
// line (replying ack/err), and fans every telemetry frame out to all clients.
// Clients that fall 64 frames behind are dropped. Returns when `shutdown`
// becomes true; throws on bind failure.
void serve_control(const std::string& addr, CommandQueue& commands, TelemetryQueue& telemetry,
                   std::atomic<bool>& shutdown);

}  // namespace arena
