#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pushsim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a path of tags
/// (trial index, stream purpose, cell index, ...). Order of tags matters.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t s = splitmix64(master);
    for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    return Rng(derive_seed(master, tags));
}

/// Stream purposes, so that strategies sharing a trial seed see common
/// random numbers for RT traffic, fading and requests.
enum class Stream : std::uint64_t {
    Trajectory = 1,
    Occupancy = 2,
    Profiles = 3,
    OffpeakRt = 10,
    OffpeakFading = 11,
    OffpeakScheduler = 12,
    PeakRt = 20,
    PeakFading = 21,
    Requests = 22,
    Episode = 30,
    Sampling = 40,
    Trial = 50,
};

constexpr std::uint64_t tag(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

}  // namespace pushsim
