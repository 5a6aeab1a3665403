#include "arena/control.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace arena {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

const char* verb_name(const CommandAction& action) {
    struct Name {
        const char* operator()(RunControl rc) const {
            switch (rc) {
                case RunControl::Start: return "start";
                case RunControl::Pause: return "pause";
                case RunControl::Resume: return "resume";
                case RunControl::Stop: return "stop";
            }
            return "?";
        }
        const char* operator()(const SetNoise&) const { return "set_noise"; }
        const char* operator()(const AddObject&) const { return "add_object"; }
        const char* operator()(const RemoveObject&) const { return "remove_object"; }
        const char* operator()(const DepositAt&) const { return "deposit_at"; }
        const char* operator()(const SetParam&) const { return "set_param"; }
    };
    return std::visit(Name{}, action);
}

namespace {

std::string err_reply(std::uint64_t seq, const std::string& reason) {
    return ojson{{"err", seq}, {"reason", reason}}.dump();
}

Rgb parse_rgb(const json& j) {
    if (!j.is_array() || j.size() != 3) throw std::runtime_error("color must be [r,g,b]");
    Rgb c;
    for (int i = 0; i < 3; ++i) {
        const int v = j[static_cast<std::size_t>(i)].get<int>();
        if (v < 0 || v > 255) throw std::runtime_error("color channel out of [0,255]");
        c[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v);
    }
    return c;
}

Point2 parse_point(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2)
        throw std::runtime_error(std::string(what) + " must be [x,y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

VirtualObject parse_object(const json& j) {
    VirtualObject obj;
    obj.id = j.at("id").get<std::uint64_t>();
    const json& sh = j.at("shape");
    const std::string stype = sh.at("type").get<std::string>();
    if (stype == "disc") {
        DiscShape d;
        d.center = parse_point(sh.at("center"), "shape.center");
        d.radius = sh.at("radius").get<double>();
        if (d.radius <= 0.0) throw std::runtime_error("shape.radius must be > 0");
        obj.shape = d;
    } else if (stype == "rect") {
        RectShape r;
        r.min = parse_point(sh.at("min"), "shape.min");
        r.max = parse_point(sh.at("max"), "shape.max");
        if (r.max.x <= r.min.x || r.max.y <= r.min.y)
            throw std::runtime_error("rect must have positive extent");
        obj.shape = r;
    } else {
        throw std::runtime_error("unknown shape \"" + stype + "\"");
    }
    const json& ef = j.at("effect");
    const std::string etype = ef.at("type").get<std::string>();
    if (etype == "deposit_source") {
        DepositSourceEffect e;
        e.rate = ef.at("rate").get<double>();
        if (e.rate < 0.0) throw std::runtime_error("effect.rate must be >= 0");
        obj.effect = e;
    } else if (etype == "blocker") {
        obj.effect = BlockerEffect{};
    } else if (etype == "display_only") {
        DisplayOnlyEffect e;
        if (ef.contains("color")) e.color = parse_rgb(ef["color"]);
        obj.effect = e;
    } else {
        throw std::runtime_error("unknown effect \"" + etype + "\"");
    }
    return obj;
}

}  // namespace

CommandParse handle_command(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        // e.what() carries the parse byte position
        return {std::nullopt, err_reply(0, std::string("invalid JSON: ") + e.what())};
    }
    std::uint64_t seq = 0;
    try {
        if (!j.is_object()) throw std::runtime_error("expected an object");
        seq = j.at("seq").get<std::uint64_t>();
        const std::string verb = j.at("verb").get<std::string>();
        const json args = j.value("args", json::object());

        Command cmd;
        cmd.seq = seq;
        if (verb == "start") {
            cmd.action = RunControl::Start;
        } else if (verb == "pause") {
            cmd.action = RunControl::Pause;
        } else if (verb == "resume") {
            cmd.action = RunControl::Resume;
        } else if (verb == "stop") {
            cmd.action = RunControl::Stop;
        } else if (verb == "set_noise") {
            SetNoise c;
            c.amplitude = args.at("amplitude").get<double>();
            if (c.amplitude < 0.0 || c.amplitude > 1.0)
                throw std::runtime_error("amplitude out of [0,1]");
            cmd.action = c;
        } else if (verb == "add_object") {
            cmd.action = AddObject{parse_object(args)};
        } else if (verb == "remove_object") {
            cmd.action = RemoveObject{args.at("id").get<std::uint64_t>()};
        } else if (verb == "deposit_at") {
            DepositAt c;
            c.pos = {args.at("x").get<double>(), args.at("y").get<double>()};
            c.amount = args.at("amount").get<double>();
            if (c.amount < 0.0) throw std::runtime_error("amount must be >= 0");
            cmd.action = c;
        } else if (verb == "set_param") {
            SetParam c;
            c.path = args.at("path").get<std::string>();
            if (c.path == "tiles.noise_amplitude") {
                c.number = args.at("value").get<double>();
                if (c.number < 0.0 || c.number > 1.0)
                    throw std::runtime_error("amplitude out of [0,1]");
            } else if (c.path == "field.evaporation_rho") {
                c.number = args.at("value").get<double>();
                if (c.number < 0.0) throw std::runtime_error("rho must be >= 0");
            } else if (c.path == "run.tick_rate") {
                c.number = args.at("value").get<double>();
                if (c.number <= 0.0) throw std::runtime_error("tick_rate must be > 0");
            } else if (c.path == "overlay.palette") {
                const json& pal = args.at("value");
                if (!pal.is_array() || pal.empty())
                    throw std::runtime_error("palette must be a non-empty color list");
                for (const json& col : pal) c.palette.push_back(parse_rgb(col));
            } else {
                throw std::runtime_error("not live-tunable: " + c.path);
            }
            cmd.action = c;
        } else {
            throw std::runtime_error("unknown verb \"" + verb + "\"");
        }
        return {cmd, ojson{{"ack", seq}}.dump()};
    } catch (const std::exception& e) {
        return {std::nullopt, err_reply(seq, e.what())};
    }
}

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    static const char tab[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < len) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(tab[(v >> 18) & 63]);
        out.push_back(tab[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? tab[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? tab[v & 63] : '=');
    }
    return out;
}

std::string telemetry_json(std::uint64_t tick, double fps,
                           const std::vector<TelemetryTrack>& tracks, const Field& field,
                           const TileLayer& tiles, std::uint64_t t,
                           const std::vector<std::uint64_t>& applied_seqs) {
    // area-averaged thumbnail, at most 64 cells per axis
    const int tw = std::min(64, field.gw), th = std::min(64, field.gh);
    double lo = field.values.empty() ? 0.0 : field.values[0];
    double hi = lo;
    for (double v : field.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<std::uint8_t> thumb(static_cast<std::size_t>(tw) * th, 0);
    const double span = hi - lo;
    for (int oj = 0; oj < th; ++oj)
        for (int oi = 0; oi < tw; ++oi) {
            const int i0 = oi * field.gw / tw, i1 = std::max(i0 + 1, (oi + 1) * field.gw / tw);
            const int j0 = oj * field.gh / th, j1 = std::max(j0 + 1, (oj + 1) * field.gh / th);
            double sum = 0.0;
            for (int j = j0; j < j1; ++j)
                for (int i = i0; i < i1; ++i) sum += field.cell(i, j);
            const double mean = sum / ((i1 - i0) * (j1 - j0));
            thumb[static_cast<std::size_t>(oj) * tw + oi] =
                span > 0.0 ? static_cast<std::uint8_t>(
                                 std::lround((mean - lo) / span * 255.0))
                           : 0;
        }

    ojson msg;
    msg["tick"] = tick;
    msg["fps"] = fps;
    ojson track_arr = ojson::array();
    for (const TelemetryTrack& tr : tracks)
        track_arr.push_back(ojson{{"id", tr.id},
                                  {"x", tr.world.x},
                                  {"y", tr.world.y},
                                  {"state", tr.state},
                                  {"color", tr.color_index}});
    msg["tracks"] = std::move(track_arr);
    msg["field"] = ojson{{"w", tw},
                         {"h", th},
                         {"min", lo},
                         {"max", hi},
                         {"data", base64_encode(thumb.data(), thumb.size())}};
    msg["tiles"] = tiles.labels_at(t);
    msg["applied"] = applied_seqs;
    std::string out = msg.dump();
    if (out.size() > 64 * 1024)
        throw std::length_error("telemetry frame exceeds 64 KiB");
    return out;
}

namespace {

struct Client {
    int fd = -1;
    std::string inbuf;
    std::deque<std::string> outbox;  // pending full messages (with newline)
    std::size_t out_cursor = 0;      // bytes of outbox.front() already sent
    std::size_t undelivered_frames = 0;
};

bool flush_client(Client& c) {
    while (!c.outbox.empty()) {
        const std::string& msg = c.outbox.front();
        const ssize_t n = ::send(c.fd, msg.data() + c.out_cursor, msg.size() - c.out_cursor,
                                 MSG_NOSIGNAL | MSG_DONTWAIT);
        if (n < 0) return errno == EAGAIN || errno == EWOULDBLOCK;
        c.out_cursor += static_cast<std::size_t>(n);
        if (c.out_cursor < msg.size()) return true;  // kernel buffer full
        c.outbox.pop_front();
        c.out_cursor = 0;
        if (c.undelivered_frames > 0) --c.undelivered_frames;
    }
    return true;
}

}  // namespace

void serve_control(const std::string& addr, CommandQueue& commands, TelemetryQueue& telemetry,
                   std::atomic<bool>& shutdown) {
    const auto colon = addr.rfind(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("listen address must be host:port");
    const std::string host = addr.substr(0, colon);
    const int port = std::stoi(addr.substr(colon + 1));

    const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (lfd < 0) throw std::runtime_error("socket() failed");
    const int one = 1;
    ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(static_cast<std::uint16_t>(port));
    if (host.empty() || host == "0.0.0.0") {
        sa.sin_addr.s_addr = INADDR_ANY;
    } else if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
        ::close(lfd);
        throw std::invalid_argument("bad listen host " + host);
    }
    if (::bind(lfd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0 || ::listen(lfd, 8) < 0) {
        ::close(lfd);
        throw std::runtime_error("cannot bind " + addr);
    }

    std::map<int, Client> clients;
    while (!shutdown.load()) {
        // fan out pending telemetry
        while (auto frame = telemetry.try_pop()) {
            for (auto& [fd, c] : clients) {
                c.outbox.push_back(frame->json_line + "\n");
                ++c.undelivered_frames;
            }
        }

        std::vector<pollfd> fds;
        fds.push_back({lfd, POLLIN, 0});
        for (auto& [fd, c] : clients) {
            short ev = POLLIN;
            if (!c.outbox.empty()) ev |= POLLOUT;
            fds.push_back({fd, ev, 0});
        }
        if (::poll(fds.data(), fds.size(), 20) < 0) {
            if (errno == EINTR) continue;
            break;
        }

        if (fds[0].revents & POLLIN) {
            const int cfd = ::accept(lfd, nullptr, nullptr);
            if (cfd >= 0) {
                const int nd = 1;
                ::setsockopt(cfd, IPPROTO_TCP, TCP_NODELAY, &nd, sizeof(nd));
                clients[cfd].fd = cfd;
            }
        }

        std::vector<int> dead;
        for (std::size_t k = 1; k < fds.size(); ++k) {
            Client& c = clients[fds[k].fd];
            if (fds[k].revents & (POLLERR | POLLHUP)) {
                dead.push_back(c.fd);
                continue;
            }
            if (fds[k].revents & POLLIN) {
                char buf[4096];
                const ssize_t n = ::recv(c.fd, buf, sizeof(buf), 0);
                if (n <= 0) {
                    dead.push_back(c.fd);
                    continue;
                }
                c.inbuf.append(buf, static_cast<std::size_t>(n));
                std::size_t nl;
                while ((nl = c.inbuf.find('\n')) != std::string::npos) {
                    std::string line = c.inbuf.substr(0, nl);
                    c.inbuf.erase(0, nl + 1);
                    if (line.empty()) continue;
                    CommandParse parsed = handle_command(line);
                    if (parsed.command) commands.push(*parsed.command);
                    c.outbox.push_back(parsed.reply + "\n");
                }
            }
            if (!flush_client(c) || c.undelivered_frames > 64) dead.push_back(c.fd);
        }
        for (int fd : dead) {
            ::close(fd);
            clients.erase(fd);
        }
    }
    for (auto& [fd, c] : clients) ::close(fd);
    ::close(lfd);
}

}  // namespace arena
