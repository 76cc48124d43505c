#pragma once

// Extended stable odometers and their layer-percolation image at desk scale.
//
// An extended odometer on sites 0..n+1 may take negative values; negative
// values index the negative-index half of the two-sided instruction stacks.
// The class E(tape, sigma, u0, f0) holds the odometers with u(0) = u0, net
// flow f0 from site 0 to site 1, and the stability conditions (a),(b) on
// 1..n, where condition (b) reads the symbol literally at index u(v). Its
// members are enumerated exactly by a forced-run dynamic program: stability
// pins the left-count at each next site, the solution run of tape indices is
// contiguous, and each index in the run (clipped to a window around the
// minimal odometer) extends the odometer, splitting the flow according to
// whether its symbol is sleep. Infection cells at step v are the pairs
// (r, s) = (rightcount - minimal rightcount, sleep-ending sites so far).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/tape.hpp"

namespace arw {

struct BoundaryData {
    std::int64_t n = 0;
    std::vector<std::int64_t> sigma; // active counts on 1..n, no sleepers
    std::int64_t u0 = 0;             // odometer value at site 0
    std::int64_t f0 = 0;             // net flow from site 0 to site 1

    std::int64_t sigma_at(std::int64_t v) const {
        return (v >= 1 && v <= n) ? sigma[static_cast<std::size_t>(v - 1)] : 0;
    }
    void validate() const {
        if (static_cast<std::int64_t>(sigma.size()) != n)
            throw std::invalid_argument("sigma must have one entry per site");
        for (auto s : sigma)
            if (s < 0)
                throw std::invalid_argument("sigma entries must be nonnegative");
    }
};

struct ExtendedOdometer {
    std::int64_t n = 0;               // sites 0..n+1
    std::vector<std::int64_t> values; // size n+2

    ExtendedOdometer() = default;
    explicit ExtendedOdometer(std::int64_t n_)
        : n(n_), values(static_cast<std::size_t>(n_) + 2, 0) {}

    std::int64_t at(std::int64_t v) const { return values[static_cast<std::size_t>(v)]; }
    std::int64_t& at(std::int64_t v) { return values[static_cast<std::size_t>(v)]; }

    friend bool operator==(const ExtendedOdometer&, const ExtendedOdometer&) = default;
};

// Signed prefix counts at each site's odometer value (walked from the tape).
inline std::vector<PrefixCounts> extended_counts(const InstructionTape& tape,
                                                 const ExtendedOdometer& u) {
    std::vector<PrefixCounts> c(static_cast<std::size_t>(u.n) + 2);
    for (std::int64_t v = 0; v <= u.n + 1; ++v)
        c[static_cast<std::size_t>(v)] = tape.prefix_counts(v, u.at(v));
    return c;
}

// f_v = uR(v) - uL(v+1) for v = 0..n.
inline std::vector<std::int64_t> flows(const InstructionTape& tape, const ExtendedOdometer& u) {
    const auto c = extended_counts(tape, u);
    std::vector<std::int64_t> f(static_cast<std::size_t>(u.n) + 1);
    for (std::int64_t v = 0; v <= u.n; ++v)
        f[static_cast<std::size_t>(v)] =
            c[static_cast<std::size_t>(v)].rights - c[static_cast<std::size_t>(v + 1)].lefts;
    return f;
}

// Extended-class stability: conditions (a),(b) on 1..n with the sleep test
// evaluated literally at index u(v); sigma carries no sleepers.
inline StabilityReport check_stable_extended(const ExtendedOdometer& u, const InstructionTape& tape,
                                             const BoundaryData& bd) {
    const auto c = extended_counts(tape, u);
    StabilityReport rep;
    for (std::int64_t v = 1; v <= bd.n; ++v) {
        const std::int64_t h = bd.sigma_at(v) + c[static_cast<std::size_t>(v - 1)].rights +
                               c[static_cast<std::size_t>(v + 1)].lefts -
                               c[static_cast<std::size_t>(v)].lefts -
                               c[static_cast<std::size_t>(v)].rights;
        if (h != 0 && h != 1) {
            rep.stable = false;
            rep.violations.push_back({v, 'a', h});
            continue;
        }
        const bool sleep_ending = tape.instruction_at(v, u.at(v)) == Instruction::sleep;
        if ((h == 1) != sleep_ending) {
            rep.stable = false;
            rep.violations.push_back({v, 'b', h});
        }
    }
    return rep;
}

// ---- minimal odometer ----------------------------------------------------

struct MinimalOdometer {
    ExtendedOdometer odo;
    std::vector<PrefixCounts> counts; // at (site v, index m(v)), v = 0..n+1

    std::int64_t right_count(std::int64_t v) const {
        return counts[static_cast<std::size_t>(v)].rights;
    }
};

// Sitewise least-index recursion: m(0) = u0, then m(v) is the least integer
// whose left-count equals rightcount(m(v-1)) - f0 - sum of sigma below v.
// Every site of m ends in a left instruction (a run bottom always does), so m
// itself is a member of the class and pointwise below all of it.
inline MinimalOdometer minimal_odometer(const InstructionTape& tape, const BoundaryData& bd,
                                        std::int64_t scan_limit = (std::int64_t{1} << 27)) {
    bd.validate();
    MinimalOdometer m;
    m.odo = ExtendedOdometer(bd.n);
    m.counts.resize(static_cast<std::size_t>(bd.n) + 2);
    m.odo.at(0) = bd.u0;
    m.counts[0] = tape.prefix_counts(0, bd.u0);
    std::int64_t below = 0; // particles strictly below the current site
    for (std::int64_t v = 1; v <= bd.n + 1; ++v) {
        const std::int64_t target = m.counts[static_cast<std::size_t>(v - 1)].rights - bd.f0 - below;
        const ScanResult found = tape.scan_to_left_count(v, target, scan_limit);
        m.odo.at(v) = found.index;
        m.counts[static_cast<std::size_t>(v)] = found.counts;
        below += bd.sigma_at(v);
    }
    return m;
}

// ---- infection cells and paths --------------------------------------------

struct Cell {
    std::int64_t r = 0; // extra right instructions beyond the minimal odometer
    std::int64_t s = 0; // sleep-ending sites so far
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct InfectionPath {
    std::vector<Cell> cells; // cells[v] = cell at step v
};

struct InfectionSets {
    std::vector<std::vector<Cell>> steps; // steps[v]: sorted unique cells at step v
    bool truncated = false;               // some run was clipped by the window cap
};

namespace lp_detail {

// Lazily grown two-sided cumulative counts for one site.
class SiteCounts {
public:
    SiteCounts(const InstructionTape& tape, std::int64_t site, std::int64_t grow_limit)
        : tape_(&tape), key_(tape.site_key(site)), site_(site), limit_(grow_limit) {
        up_.push_back(PrefixCounts{});   // counts(0)
        down_.push_back(PrefixCounts{}); // counts(0)
    }

    Instruction kind(std::int64_t k) const { return tape_->instruction_with_key(key_, k); }

    const PrefixCounts& counts(std::int64_t k) {
        if (k >= 0) {
            while (static_cast<std::int64_t>(up_.size()) <= k) {
                if (static_cast<std::int64_t>(up_.size()) > limit_)
                    throw SearchWindowExhausted("site count table limit at site " + std::to_string(site_));
                PrefixCounts c = up_.back();
                bump_counts(c, kind(static_cast<std::int64_t>(up_.size())), +1);
                up_.push_back(c);
            }
            return up_[static_cast<std::size_t>(k)];
        }
        while (static_cast<std::int64_t>(down_.size()) <= -k) {
            if (static_cast<std::int64_t>(down_.size()) > limit_)
                throw SearchWindowExhausted("site count table limit at site " + std::to_string(site_));
            PrefixCounts c = down_.back();
            // counts(-j) = counts(-j+1) - step at (-j+1)
            bump_counts(c, kind(-static_cast<std::int64_t>(down_.size()) + 1), -1);
            down_.push_back(c);
        }
        return down_[static_cast<std::size_t>(-k)];
    }

    std::int64_t left_count(std::int64_t k) { return counts(k).lefts; }
    std::int64_t right_count(std::int64_t k) { return counts(k).rights; }

private:
    const InstructionTape* tape_;
    std::uint64_t key_;
    std::int64_t site_;
    std::int64_t limit_;
    std::vector<PrefixCounts> up_;
    std::vector<PrefixCounts> down_;
};

struct DpState {
    std::int64_t idx = 0; // odometer value at the current site
    std::int64_t rc = 0;  // right count there
    std::int64_t s = 0;   // sleep-ending sites so far
    std::int32_t parent = -1;
};

struct DpRun {
    std::vector<std::vector<DpState>> frontiers; // frontiers[j]: states after j steps
    bool truncated = false;
};

// Run-bottom continuation of one state: the pointwise-least extension, used
// as the window anchor for the DP. Continuing from (u0, f0) at site 0 this is
// exactly the minimal odometer; continuing mid-path it anchors a greedy
// block, whose columns sit far above the global minimal odometer.
inline std::vector<std::int64_t> minimal_continuation(const InstructionTape& tape,
                                                      const BoundaryData& bd, std::int64_t v0,
                                                      const DpState& from, std::int64_t steps,
                                                      std::int64_t scan_limit = (std::int64_t{1} << 27)) {
    std::vector<std::int64_t> anchor(static_cast<std::size_t>(bd.n) + 2, 0);
    std::int64_t below = 0;
    for (std::int64_t v = 1; v <= v0; ++v)
        below += bd.sigma_at(v);
    anchor[static_cast<std::size_t>(v0)] = from.idx;
    std::int64_t rc = from.rc;
    for (std::int64_t v = v0 + 1; v <= v0 + steps; ++v) {
        // run bottoms are left instructions, so s stays frozen along the anchor
        const std::int64_t target = rc - (bd.f0 + below - from.s);
        const ScanResult found = tape.scan_to_left_count(v, target, scan_limit);
        anchor[static_cast<std::size_t>(v)] = found.index;
        rc = found.counts.rights;
        below += bd.sigma_at(v);
    }
    return anchor;
}

// Advance the forced-run DP `steps` sites starting from `start` at site v0,
// admitting indices within window_cap of anchor[v] at each site v. States are
// deduplicated on (idx, s); parents give one witness path.
inline DpRun dp_advance(const InstructionTape& tape, const BoundaryData& bd,
                        const std::vector<std::int64_t>& anchor, std::int64_t window_cap,
                        std::int64_t v0, std::vector<DpState> start, std::int64_t steps,
                        std::int64_t grow_limit = (std::int64_t{1} << 24)) {
    // prefix sums of sigma for the flow identity f_v = f0 + Z_v - s_v
    std::vector<std::int64_t> z(static_cast<std::size_t>(bd.n) + 2, 0);
    for (std::int64_t v = 1; v <= bd.n + 1; ++v)
        z[static_cast<std::size_t>(v)] = z[static_cast<std::size_t>(v - 1)] + bd.sigma_at(v);

    DpRun run;
    run.frontiers.reserve(static_cast<std::size_t>(steps) + 1);
    run.frontiers.push_back(std::move(start));

    for (std::int64_t j = 1; j <= steps; ++j) {
        const std::int64_t v = v0 + j; // site being added
        SiteCounts sc(tape, v, grow_limit);
        const std::int64_t lo = anchor[static_cast<std::size_t>(v)] - window_cap;
        const std::int64_t hi = anchor[static_cast<std::size_t>(v)] + window_cap;
        std::map<std::pair<std::int64_t, std::int64_t>, DpState> next;
        const auto& frontier = run.frontiers.back();
        for (std::size_t si = 0; si < frontier.size(); ++si) {
            const DpState& st = frontier[si];
            const std::int64_t f_prev = bd.f0 + z[static_cast<std::size_t>(v - 1)] - st.s;
            const std::int64_t target = st.rc - f_prev; // forced left count at v
            // run of indices solving it, clipped to the window
            if (sc.left_count(lo) > target || sc.left_count(hi) < target) {
                run.truncated = true; // run lies entirely outside the window
                continue;
            }
            if (sc.left_count(lo) == target && sc.kind(lo) != Instruction::left)
                run.truncated = true; // run continues below the window
            if (sc.left_count(hi) == target && sc.kind(hi + 1) != Instruction::left)
                run.truncated = true; // run continues above the window
            for (std::int64_t k = lo; k <= hi; ++k) {
                if (sc.left_count(k) != target)
                    continue;
                const std::int64_t s2 = st.s + (sc.kind(k) == Instruction::sleep ? 1 : 0);
                DpState cand{k, sc.right_count(k), s2, static_cast<std::int32_t>(si)};
                auto [it, inserted] = next.try_emplace({k, s2}, cand);
                (void)it;
                (void)inserted;
            }
        }
        if (next.empty())
            throw InfeasibleBoundary("no extended odometer candidate at site " + std::to_string(v) +
                                     " within window cap " + std::to_string(window_cap));
        std::vector<DpState> states;
        states.reserve(next.size());
        for (auto& [k, stt] : next)
            states.push_back(stt);
        run.frontiers.push_back(std::move(states));
    }
    return run;
}

inline std::vector<Cell> cells_of_frontier(const std::vector<DpState>& frontier,
                                           std::int64_t m_rc) {
    std::vector<Cell> cells;
    cells.reserve(frontier.size());
    for (const auto& st : frontier)
        cells.push_back({st.rc - m_rc, st.s});
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    return cells;
}

} // namespace lp_detail

// Reachable infection cells at every step 0..n+1 for the class
// E(tape, sigma, u0, f0), window-capped at |u(v) - m(v)| <= window_cap.
// Enumeration cost grows quickly with n; enum_site_cap refuses larger inputs.
inline InfectionSets enumerate_infections(const InstructionTape& tape, const BoundaryData& bd,
                                          std::int64_t window_cap, std::int64_t enum_site_cap = 12) {
    bd.validate();
    if (bd.n > enum_site_cap)
        throw std::invalid_argument("enumerate_infections: n = " + std::to_string(bd.n) +
                                    " exceeds cap " + std::to_string(enum_site_cap));
    const MinimalOdometer m = minimal_odometer(tape, bd);
    std::vector<lp_detail::DpState> start{{bd.u0, m.right_count(0), 0, -1}};
    lp_detail::DpRun run = lp_detail::dp_advance(tape, bd, m.odo.values, window_cap, 0,
                                                 std::move(start), bd.n + 1);

    InfectionSets sets;
    sets.truncated = run.truncated;
    sets.steps.resize(static_cast<std::size_t>(bd.n) + 2);
    for (std::int64_t v = 0; v <= bd.n + 1; ++v)
        sets.steps[static_cast<std::size_t>(v)] =
            lp_detail::cells_of_frontier(run.frontiers[static_cast<std::size_t>(v)], m.right_count(v));
    return sets;
}

// ---- the map Phi -----------------------------------------------------------

// Maps a validated member of E(tape, sigma, u0, f0) to its infection path:
// r_v = uR(v) - mR(v), s_v = sleep-ending sites among 1..v (literal index).
inline InfectionPath phi_map(const ExtendedOdometer& u, const InstructionTape& tape,
                             const BoundaryData& bd) {
    bd.validate();
    if (u.n != bd.n)
        throw NotAMember("odometer size does not match boundary data");
    if (u.at(0) != bd.u0)
        throw NotAMember("u(0) != u0");
    const auto c = extended_counts(tape, u);
    if (c[0].rights - c[1].lefts != bd.f0)
        throw NotAMember("net flow from 0 to 1 is not f0");
    const StabilityReport rep = check_stable_extended(u, tape, bd);
    if (!rep.stable)
        throw NotAMember("odometer is not stable on 1..n");

    const MinimalOdometer m = minimal_odometer(tape, bd);
    InfectionPath path;
    path.cells.resize(static_cast<std::size_t>(bd.n) + 2);
    std::int64_t s = 0;
    for (std::int64_t v = 0; v <= bd.n + 1; ++v) {
        if (v >= 1 && tape.instruction_at(v, u.at(v)) == Instruction::sleep)
            ++s;
        path.cells[static_cast<std::size_t>(v)] = {
            c[static_cast<std::size_t>(v)].rights - m.right_count(v), s};
    }
    return path;
}

// ---- brute-force oracle -----------------------------------------------------

// Independent enumeration of the same class: backtracks over all odometer
// arrays inside the window, filtering by the raw stability conditions site by
// site (prefix counts walked directly off the tape), then maps survivors
// through phi_map. Exponential-ish; for oracle comparisons at small n.
struct BruteForceResult {
    std::vector<ExtendedOdometer> odometers;
    InfectionSets sets;
};

inline BruteForceResult brute_force_infections(const InstructionTape& tape, const BoundaryData& bd,
                                               std::int64_t window_cap,
                                               std::int64_t enum_site_cap = 8) {
    bd.validate();
    if (bd.n > enum_site_cap)
        throw std::invalid_argument("brute_force_infections: n too large");
    const MinimalOdometer m = minimal_odometer(tape, bd);

    BruteForceResult out;
    ExtendedOdometer u(bd.n);
    u.at(0) = bd.u0;
    std::vector<PrefixCounts> c(static_cast<std::size_t>(bd.n) + 2);
    c[0] = tape.prefix_counts(0, bd.u0);

    auto stable_at = [&](std::int64_t v) {
        const std::int64_t h = bd.sigma_at(v) + c[static_cast<std::size_t>(v - 1)].rights +
                               c[static_cast<std::size_t>(v + 1)].lefts -
                               c[static_cast<std::size_t>(v)].lefts -
                               c[static_cast<std::size_t>(v)].rights;
        if (h != 0 && h != 1)
            return false;
        return (h == 1) == (tape.instruction_at(v, u.at(v)) == Instruction::sleep);
    };

    auto rec = [&](auto&& self, std::int64_t v) -> void {
        if (v == bd.n + 2) {
            out.odometers.push_back(u);
            return;
        }
        for (std::int64_t k = m.odo.at(v) - window_cap; k <= m.odo.at(v) + window_cap; ++k) {
            u.at(v) = k;
            c[static_cast<std::size_t>(v)] = tape.prefix_counts(v, k);
            if (v == 1 && c[0].rights - c[1].lefts != bd.f0)
                continue;
            if (v >= 2 && !stable_at(v - 1))
                continue;
            self(self, v + 1);
        }
    };
    rec(rec, 1);

    out.sets.steps.assign(static_cast<std::size_t>(bd.n) + 2, {});
    for (const auto& odo : out.odometers) {
        const StabilityReport rep = check_stable_extended(odo, tape, bd);
        if (!rep.stable)
            throw std::logic_error("brute force emitted an unstable odometer");
        const InfectionPath path = phi_map(odo, tape, bd);
        for (std::int64_t v = 0; v <= bd.n + 1; ++v)
            out.sets.steps[static_cast<std::size_t>(v)].push_back(path.cells[static_cast<std::size_t>(v)]);
    }
    for (auto& step : out.sets.steps) {
        std::sort(step.begin(), step.end());
        step.erase(std::unique(step.begin(), step.end()), step.end());
    }
    return out;
}

// ---- flow nonnegativity ----------------------------------------------------

struct FlowViolation {
    std::int64_t site = 0;
    char rule = 'a'; // 'a': u(v+1)>=0 => u(v)>0 or f_v<=0; 'b': u(v-1)>=0 => u(v)>=0 or f_{v-1}>0
};

// Both implications hold for every odometer stable on the interior; a
// nonempty return means the odometer (or its enumeration) is broken.
inline std::vector<FlowViolation> flow_nonnegativity_check(const ExtendedOdometer& u,
                                                           const InstructionTape& tape) {
    const std::int64_t top = u.n + 1;
    const auto f = flows(tape, u);
    std::vector<FlowViolation> bad;
    for (std::int64_t v = 0; v + 1 <= top; ++v)
        if (u.at(v + 1) >= 0 && !(u.at(v) > 0 || f[static_cast<std::size_t>(v)] <= 0))
            bad.push_back({v, 'a'});
    for (std::int64_t v = 1; v <= top; ++v)
        if (u.at(v - 1) >= 0 && !(u.at(v) >= 0 || f[static_cast<std::size_t>(v - 1)] > 0))
            bad.push_back({v, 'b'});
    return bad;
}

// ---- k-greedy paths ---------------------------------------------------------

struct BlockRecord {
    std::int64_t block = 0;
    Cell cell; // end-of-block cell
};

struct GreedyPathResult {
    InfectionPath path; // cells at steps 0..horizon
    std::vector<BlockRecord> blocks;
    bool truncated = false;
    std::int64_t first_block_max_row = 0; // X_k within the window
};

// Block-wise row maximization: from the current cell, enumerate k more steps
// and jump to a cell with maximal row. Ties break to minimal column, then
// minimal odometer value, fixing one reproducible witness path.
inline GreedyPathResult greedy_path(const InstructionTape& tape, const BoundaryData& bd,
                                    std::int64_t k, std::int64_t horizon,
                                    std::int64_t window_cap) {
    bd.validate();
    if (k < 1 || horizon < k || horizon % k != 0)
        throw std::invalid_argument("greedy_path: horizon must be a positive multiple of k");
    if (horizon > bd.n + 1)
        throw std::invalid_argument("greedy_path: horizon exceeds the boundary data interval");

    const MinimalOdometer m = minimal_odometer(tape, bd);
    GreedyPathResult out;
    out.path.cells.resize(static_cast<std::size_t>(horizon) + 1);
    out.path.cells[0] = {0, 0};

    lp_detail::DpState cur{bd.u0, m.right_count(0), 0, -1};
    const std::int64_t blocks = horizon / k;
    for (std::int64_t b = 1; b <= blocks; ++b) {
        const std::int64_t v0 = (b - 1) * k;
        // window anchored to this block's own least continuation
        const std::vector<std::int64_t> anchor = lp_detail::minimal_continuation(tape, bd, v0, cur, k);
        lp_detail::DpRun run = lp_detail::dp_advance(tape, bd, anchor, window_cap, v0,
                                                     {lp_detail::DpState{cur.idx, cur.rc, cur.s, -1}}, k);
        out.truncated = out.truncated || run.truncated;
        const auto& endf = run.frontiers[static_cast<std::size_t>(k)];
        std::size_t best = 0;
        auto better = [&](const lp_detail::DpState& a, const lp_detail::DpState& c2) {
            if (a.s != c2.s) return a.s > c2.s;
            const std::int64_t ra = a.rc - m.right_count(v0 + k);
            const std::int64_t rc2 = c2.rc - m.right_count(v0 + k);
            if (ra != rc2) return ra < rc2;
            return a.idx < c2.idx;
        };
        for (std::size_t i = 1; i < endf.size(); ++i)
            if (better(endf[i], endf[best]))
                best = i;
        if (b == 1) {
            std::int64_t xk = 0;
            for (const auto& st : endf)
                xk = std::max(xk, st.s);
            out.first_block_max_row = xk;
        }
        // walk parents back to fill the in-block cells
        std::size_t at = best;
        for (std::int64_t j = k; j >= 1; --j) {
            const auto& st = run.frontiers[static_cast<std::size_t>(j)][at];
            out.path.cells[static_cast<std::size_t>(v0 + j)] = {st.rc - m.right_count(v0 + j), st.s};
            at = static_cast<std::size_t>(st.parent);
        }
        cur = endf[best];
        out.blocks.push_back({b, out.path.cells[static_cast<std::size_t>(v0 + k)]});
    }
    return out;
}

struct ZetaStarEstimate {
    double zeta_hat = 0.0; // mean of s_horizon / horizon
    double std_error = 0.0;
    double xk_over_k = 0.0; // direct (1/k) E[X_k] from single-block maxima
    double xk_std_error = 0.0;
    std::int64_t replicas = 0;
    bool truncated = false;
};

// Row growth rate of the k-greedy path, averaged over replica tapes. The
// boundary data is the canonical empty one (sigma = 0, u0 = f0 = 0); window
// clipping makes every figure a lower bound, reported via `truncated`.
inline ZetaStarEstimate estimate_zeta_star(std::uint64_t master_seed, double lambda, std::int64_t k,
                                           std::int64_t horizon, std::int64_t replicas,
                                           std::int64_t window_cap) {
    if (replicas < 1)
        throw std::invalid_argument("estimate_zeta_star: replicas must be >= 1");
    BoundaryData bd;
    bd.n = horizon;
    bd.sigma.assign(static_cast<std::size_t>(horizon), 0);

    std::vector<double> rates, xks;
    bool truncated = false;
    const std::uint64_t stream = stream_seed(master_seed, Stream::replica);
    for (std::int64_t rep = 0; rep < replicas; ++rep) {
        const InstructionTape tape(child_seed(stream, static_cast<std::uint64_t>(rep)), lambda);
        const GreedyPathResult g = greedy_path(tape, bd, k, horizon, window_cap);
        rates.push_back(static_cast<double>(g.path.cells.back().s) / static_cast<double>(horizon));
        xks.push_back(static_cast<double>(g.first_block_max_row) / static_cast<double>(k));
        truncated = truncated || g.truncated;
    }
    auto mean_se = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
        return std::pair<double, double>{mean, std::sqrt(var / static_cast<double>(xs.size()))};
    };
    ZetaStarEstimate est;
    est.replicas = replicas;
    est.truncated = truncated;
    std::tie(est.zeta_hat, est.std_error) = mean_se(rates);
    std::tie(est.xk_over_k, est.xk_std_error) = mean_se(xks);
    return est;
}

} // namespace arw
