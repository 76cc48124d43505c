#pragma once

// Counter-based pseudorandom primitives. Everything downstream (instruction
// tapes, particle placement, policy randomness, replica splits) derives from
// one master seed through the stream/split functions here, so a single seed
// flag reproduces a whole run.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace arw {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer; full avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// Named sub-streams of the master seed. Keep ids stable: output files are
// reproducible across versions only if the splitting map does not move.
enum class Stream : std::uint64_t {
    tape = 1,
    placement = 2,
    policy = 3,
    probe = 4,
    replica = 5,
};

inline std::uint64_t stream_seed(std::uint64_t master, Stream s) {
    return mix64(master + kGolden * static_cast<std::uint64_t>(s));
}

// Child seed for replica/probe k of a stream.
inline std::uint64_t child_seed(std::uint64_t stream, std::uint64_t k) {
    return mix64(stream ^ mix64(k + 1));
}

// Pure counter-indexed uniform u64.
inline std::uint64_t hash_at(std::uint64_t seed, std::uint64_t counter) {
    return mix64(seed ^ (counter * kGolden + 1));
}

// Uniform site in 1..n, counter-indexed, unbiased via rejection.
inline std::int64_t uniform_site(std::uint64_t seed, std::uint64_t counter, std::int64_t n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t bound = un * (~std::uint64_t{0} / un); // multiple of n
    std::uint64_t v = hash_at(seed, counter);
    while (v >= bound)
        v = mix64(v + kGolden);
    return static_cast<std::int64_t>(v % un) + 1;
}

// Seed flag parser: decimal or 0x-hex.
inline std::uint64_t parse_seed(const std::string& text) {
    if (text.empty())
        throw std::invalid_argument("empty seed");
    std::size_t pos = 0;
    int base = 10;
    std::string body = text;
    if (text.size() > 2 && (text.compare(0, 2, "0x") == 0 || text.compare(0, 2, "0X") == 0)) {
        base = 16;
        body = text.substr(2);
    }
    const std::uint64_t value = std::stoull(body, &pos, base);
    if (pos != body.size())
        throw std::invalid_argument("bad seed: " + text);
    return value;
}

} // namespace arw
