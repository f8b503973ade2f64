#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace leakdet::rng {

// Seed-expansion mixer (splitmix64). Used only to derive stream states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Phase tags are 64-bit hashes of short labels ("sweep:h0", ...).
constexpr std::uint64_t phase_tag(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// Counter-based stream: the state is a pure hash of
// (master seed, phase tag, trial index, lane), so any worker can
// reconstruct the stream for trial t without coordination and the
// result cannot depend on thread scheduling.
//
// Lane convention used by the samplers:
//   lane 0 - primary snapshot noise
//   lane 1 - secondary snapshot block
//   lane 2 - auxiliary snapshot noise
class Stream {
public:
    Stream(std::uint64_t master, std::uint64_t phase, std::uint64_t trial,
           std::uint64_t lane = 0) {
        std::uint64_t h = master;
        for (std::uint64_t w : {phase, trial, lane}) {
            h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            (void)splitmix64(h);
        }
        for (auto& word : state_) word = splitmix64(h);
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0)
            state_[0] = 0x9e3779b97f4a7c15ull;
    }

    // xoshiro256** step
    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on (0, 1]; never returns 0 so log() is safe
    double uniform() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        auto [a, b] = normal_pair();
        spare_ = b;
        has_spare_ = true;
        return a;
    }

    // CN(0,1): real and imaginary parts independent N(0, 1/2)
    std::complex<double> normal_complex() {
        auto [a, b] = normal_pair();
        return {a * inv_sqrt2, b * inv_sqrt2};
    }

private:
    static constexpr double inv_sqrt2 = 0.70710678118654752440;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::pair<double, double> normal_pair() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(t), r * std::sin(t)};
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace leakdet::rng
