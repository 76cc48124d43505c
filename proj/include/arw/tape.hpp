#pragma once

// Deterministic instruction stacks. Each (site, index) pair maps to one of
// {left, right, sleep} through a stateless hash of (seed, site, index), so
// lookups are O(1), random-access, and identical on every call. Indices are
// two-sided: negative indices exist and their prefix counts are reported as
// negative so the cumulative counts are monotone in the index and zero at 0.

#include <cmath>
#include <cstdint>
#include <string>

#include "arw/errors.hpp"
#include "arw/rng.hpp"

namespace arw {

enum class Instruction : std::uint8_t { left = 0, right = 1, sleep = 2 };

inline const char* to_string(Instruction i) {
    switch (i) {
        case Instruction::left: return "left";
        case Instruction::right: return "right";
        default: return "sleep";
    }
}

// Signed cumulative symbol counts at a site.
//   k >= 0: counts over indices 1..k.
//   k <  0: minus the counts over indices k+1..0.
// Always lefts + rights + sleeps == k, each component nondecreasing in k.
struct PrefixCounts {
    std::int64_t lefts = 0;
    std::int64_t rights = 0;
    std::int64_t sleeps = 0;

    friend bool operator==(const PrefixCounts&, const PrefixCounts&) = default;
};

inline void bump_counts(PrefixCounts& c, Instruction ins, std::int64_t d) {
    switch (ins) {
        case Instruction::left: c.lefts += d; break;
        case Instruction::right: c.rights += d; break;
        case Instruction::sleep: c.sleeps += d; break;
    }
}

// Index plus the signed cumulative counts there; see scan_to_left_count.
struct ScanResult {
    std::int64_t index = 0;
    PrefixCounts counts;
};

class InstructionTape {
public:
    // Marginals per index: P(left) = P(right) = (1/2)/(1+lambda),
    // P(sleep) = lambda/(1+lambda). Distinct (site, index) pairs independent.
    InstructionTape(std::uint64_t seed, double lambda)
        : seed_(seed), lambda_(lambda) {
        if (!(lambda > 0.0))
            throw std::invalid_argument("sleep rate lambda must be positive");
        const long double p = 0.5L / (1.0L + static_cast<long double>(lambda));
        const long double scale = 18446744073709551616.0L; // 2^64
        cut_left_ = static_cast<std::uint64_t>(p * scale);
        cut_right_ = static_cast<std::uint64_t>(2.0L * p * scale);
    }

    std::uint64_t seed() const { return seed_; }
    double lambda() const { return lambda_; }

    // Per-site hash key; hoist out of hot loops that fix the site.
    std::uint64_t site_key(std::int64_t site) const {
        return mix64(seed_ ^ mix64(static_cast<std::uint64_t>(site) * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    }

    Instruction instruction_with_key(std::uint64_t key, std::int64_t index) const {
        const std::uint64_t u = mix64(key ^ (static_cast<std::uint64_t>(index) * kGolden));
        if (u < cut_left_) return Instruction::left;
        if (u < cut_right_) return Instruction::right;
        return Instruction::sleep;
    }

    Instruction instruction_at(std::int64_t site, std::int64_t index) const {
        return instruction_with_key(site_key(site), index);
    }

    Instruction operator()(std::int64_t site, std::int64_t index) const {
        return instruction_at(site, index);
    }

    // O(|k|) walk from 0. Fine for checks and small instances; hot paths keep
    // their own incremental counts (SiteCursor) or prefix tables.
    PrefixCounts prefix_counts(std::int64_t site, std::int64_t k) const {
        const std::uint64_t key = site_key(site);
        PrefixCounts c;
        if (k >= 0) {
            for (std::int64_t i = 1; i <= k; ++i)
                bump(c, instruction_with_key(key, i), +1);
        } else {
            for (std::int64_t i = k + 1; i <= 0; ++i)
                bump(c, instruction_with_key(key, i), -1);
        }
        return c;
    }

    // Least index k with (signed) left-count == target, along with the full
    // counts at k. The left-count is a monotone surjection onto the integers,
    // so the solution set is one contiguous run; this returns its bottom,
    // which always carries a left instruction. Throws SearchWindowExhausted
    // past scan_limit steps.
    ScanResult scan_to_left_count(std::int64_t site, std::int64_t target,
                                  std::int64_t scan_limit = (std::int64_t{1} << 27)) const {
        const std::uint64_t key = site_key(site);
        PrefixCounts c;
        if (target > 0) {
            for (std::int64_t i = 1; i <= scan_limit; ++i) {
                bump(c, instruction_with_key(key, i), +1);
                if (c.lefts == target)
                    return {i, c};
            }
        } else {
            // Walk down from 0; minimal k has count(k) == target and a left
            // instruction at k (so count(k-1) == target - 1).
            for (std::int64_t i = 0; i >= -scan_limit; --i) {
                const Instruction ins = instruction_with_key(key, i);
                if (c.lefts == target && ins == Instruction::left)
                    return {i, c};
                bump(c, ins, -1); // counts(i-1) = counts(i) - step at i
            }
        }
        throw SearchWindowExhausted("no index with left-count " + std::to_string(target) +
                                    " at site " + std::to_string(site) + " within " +
                                    std::to_string(scan_limit) + " steps");
    }

    std::int64_t first_index_with_left_count(std::int64_t site, std::int64_t target,
                                             std::int64_t scan_limit = (std::int64_t{1} << 27)) const {
        return scan_to_left_count(site, target, scan_limit).index;
    }

private:
    static void bump(PrefixCounts& c, Instruction ins, std::int64_t d) { bump_counts(c, ins, d); }

    std::uint64_t seed_;
    double lambda_;
    std::uint64_t cut_left_;
    std::uint64_t cut_right_;
};

// Forward-only execution cursor for one site; keeps counts in sync with the
// instructions it hands out. Bit-identical to instruction_at.
struct SiteCursor {
    std::uint64_t key = 0;
    std::int64_t next_index = 1;
    PrefixCounts used;

    void bind(const InstructionTape& tape, std::int64_t site) {
        key = tape.site_key(site);
        next_index = 1;
        used = PrefixCounts{};
    }

    Instruction execute(const InstructionTape& tape) {
        const Instruction ins = tape.instruction_with_key(key, next_index++);
        switch (ins) {
            case Instruction::left: ++used.lefts; break;
            case Instruction::right: ++used.rights; break;
            case Instruction::sleep: ++used.sleeps; break;
        }
        return ins;
    }

    std::int64_t executed() const { return next_index - 1; }
};

} // namespace arw
