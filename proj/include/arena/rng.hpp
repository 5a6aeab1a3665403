#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Deterministic randomness for the whole engine. Two flavors:
//  - counter-based draws keyed by (seed, indices...), order-independent,
//    used wherever replay must not depend on evaluation order
//  - a tiny sequential stream for bulk per-frame noise
// Per-module streams derive as hash(master_seed, module name, tick) so adding
// a module never perturbs another module's draws.

namespace arena::rng {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
    return mix(h ^ (v + kGolden + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_str(std::uint64_t h, std::string_view s) {
    for (unsigned char c : s) h = combine(h, c);
    return combine(h, s.size());
}

template <typename... Keys>
std::uint64_t key(std::uint64_t seed, Keys... ks) {
    std::uint64_t h = mix(seed + kGolden);
    ((h = combine(h, static_cast<std::uint64_t>(ks))), ...);
    return h;
}

inline double to_unit(std::uint64_t x) {
    // 53-bit mantissa, uniform in [0,1)
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

template <typename... Keys>
double uniform01_at(std::uint64_t seed, Keys... ks) {
    return to_unit(key(seed, ks...));
}

// Box-Muller from two keyed uniforms; pure function of its keys.
template <typename... Keys>
double gauss_at(std::uint64_t seed, Keys... ks) {
    const std::uint64_t h = key(seed, ks...);
    const double u1 = to_unit(h) + 0x1.0p-54;  // avoid log(0)
    const double u2 = to_unit(mix(h + kGolden));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// splitmix64 sequential stream for bulk noise.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    double uniform01() { return to_unit(next_u64()); }

    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01() + 0x1.0p-54;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586477 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::uint64_t substream_seed(std::uint64_t master_seed, std::string_view module,
                                    std::uint64_t tick) {
    return combine(hash_str(mix(master_seed + kGolden), module), tick);
}

inline Stream substream(std::uint64_t master_seed, std::string_view module, std::uint64_t tick) {
    return Stream(substream_seed(master_seed, module, tick));
}

}  // namespace arena::rng
