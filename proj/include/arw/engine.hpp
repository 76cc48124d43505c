#pragma once

// Exact ARW stabilization on a finite interval with sinks (or a torus).
// Dynamics follow the instruction-stack representation: toppling a site
// executes its next unused instruction. left/right move one active particle
// to the neighbor (waking a sleeper there, or feeding a sink); sleep puts a
// lone particle to sleep and is executed-but-ineffective when two or more
// particles share the site (the odometer still advances). The abelian
// property makes the result independent of the toppling policy.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "arw/config.hpp"
#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/tape.hpp"

namespace arw {

struct Odometer {
    std::int64_t n = 0;
    std::vector<std::int64_t> u; // instructions executed at sites 1..n; zero off the interval

    Odometer() = default;
    explicit Odometer(std::int64_t n_) : n(n_), u(static_cast<std::size_t>(n_), 0) {}

    std::int64_t at(std::int64_t v) const {
        return (v >= 1 && v <= n) ? u[static_cast<std::size_t>(v - 1)] : 0;
    }
    std::int64_t total() const {
        std::int64_t t = 0;
        for (auto x : u) t += x;
        return t;
    }

    friend bool operator==(const Odometer&, const Odometer&) = default;
};

struct StabilizationResult {
    Odometer odometer;
    Configuration final_config;
    std::int64_t particles_in = 0;   // actives + sleepers present at start
    std::int64_t sleeping_count = 0; // Y: sleepers left on 1..n
    std::int64_t ejected_left = 0;   // this run's sink deltas
    std::int64_t ejected_right = 0;
    std::int64_t topplings = 0; // total instructions executed == odometer total
};

enum class Topology { interval, torus };
enum class PolicyKind { sweep, leftmost, random };

struct StabilizeOptions {
    PolicyKind policy = PolicyKind::sweep;
    std::uint64_t policy_seed = 0; // used by PolicyKind::random
    std::int64_t budget = -1;      // instruction cap for this run; -1 means 64*n^2
    Topology topology = Topology::interval;
    std::int64_t site_offset = 0; // tape site = engine site + offset
    bool throw_on_sink = false;   // point-source mode: sink contact is an error
    // Cumulative odometer of earlier runs on the same tape. Staged driving
    // (add, stabilize, repeat) must keep consuming each site's stack where it
    // left off, or the staged process stops matching the batch one.
    const Odometer* resume_from = nullptr;
};

inline std::int64_t default_budget(std::int64_t n) {
    return 64 * n * n;
}

namespace detail {

// Single-threaded exact execution; deterministic given (config, tape, opts).
struct Engine {
    const InstructionTape& tape;
    const StabilizeOptions& opts;
    std::int64_t n;
    std::vector<std::int64_t> active;
    std::vector<std::uint8_t> asleep;
    std::vector<SiteCursor> cursor;
    std::int64_t active_total = 0;
    std::int64_t sink_l = 0, sink_r = 0;
    std::int64_t executed_total = 0;
    std::int64_t budget;
    bool budget_hit = false;
    bool sink_hit = false;

    // sweep worklist
    std::deque<std::int64_t> work;
    std::vector<std::uint8_t> queued;

    Engine(const Configuration& c, const InstructionTape& t, const StabilizeOptions& o)
        : tape(t), opts(o), n(c.n), active(c.active), asleep(c.asleep),
          cursor(static_cast<std::size_t>(c.n)),
          budget(o.budget >= 0 ? o.budget : default_budget(c.n)),
          queued(static_cast<std::size_t>(c.n), 0) {
        if (opts.resume_from && opts.resume_from->n != n)
            throw std::invalid_argument("resume odometer length mismatch");
        for (std::int64_t v = 1; v <= n; ++v) {
            cursor[idx(v)].bind(tape, v + opts.site_offset);
            if (opts.resume_from)
                cursor[idx(v)].next_index = opts.resume_from->at(v) + 1;
            active_total += active[idx(v)];
        }
    }

    static std::size_t idx(std::int64_t v) { return static_cast<std::size_t>(v - 1); }

    void arrive(std::int64_t v) {
        if (asleep[idx(v)]) {
            asleep[idx(v)] = 0;
            active[idx(v)] = 2;
            active_total += 2;
        } else {
            ++active[idx(v)];
            ++active_total;
        }
    }

    void move_from(std::int64_t v, int dir) {
        --active[idx(v)];
        --active_total;
        std::int64_t dest = v + dir;
        if (opts.topology == Topology::torus) {
            if (dest == 0) dest = n;
            else if (dest == n + 1) dest = 1;
            arrive(dest);
            return;
        }
        if (dest == 0) {
            ++sink_l;
            sink_hit = true;
        } else if (dest == n + 1) {
            ++sink_r;
            sink_hit = true;
        } else {
            arrive(dest);
        }
    }

    // Returns false when the budget ran out (or sink contact aborted).
    bool execute_one(std::int64_t v) {
        if (executed_total >= budget) {
            budget_hit = true;
            return false;
        }
        ++executed_total;
        switch (cursor[idx(v)].execute(tape)) {
            case Instruction::left: move_from(v, -1); break;
            case Instruction::right: move_from(v, +1); break;
            case Instruction::sleep:
                if (active[idx(v)] == 1) {
                    active[idx(v)] = 0;
                    asleep[idx(v)] = 1;
                    --active_total;
                }
                break; // ineffective with >= 2 particles present
        }
        if (sink_hit && opts.throw_on_sink)
            return false;
        return true;
    }

    void push_work(std::int64_t v) {
        if (!queued[idx(v)] && active[idx(v)] > 0) {
            queued[idx(v)] = 1;
            work.push_back(v);
        }
    }

    bool run_sweep() {
        for (std::int64_t v = 1; v <= n; ++v)
            push_work(v);
        while (!work.empty()) {
            const std::int64_t v = work.front();
            work.pop_front();
            queued[idx(v)] = 0;
            while (active[idx(v)] > 0) {
                if (!execute_one(v))
                    return false;
                if (v > 1) push_work(v - 1);
                if (v < n) push_work(v + 1);
                if (opts.topology == Topology::torus) {
                    if (v == 1) push_work(n);
                    if (v == n) push_work(1);
                }
            }
        }
        return true;
    }

    bool run_leftmost() {
        std::int64_t v = 1;
        while (active_total > 0) {
            while (v <= n && active[idx(v)] == 0)
                ++v;
            if (v > n) { // torus wrap (interval runs never get here with actives left)
                v = 1;
                continue;
            }
            if (!execute_one(v))
                return false;
            v = std::max<std::int64_t>(1, v - 1);
        }
        return true;
    }

    bool run_random() {
        std::vector<std::int64_t> live;
        std::vector<std::int64_t> pos(static_cast<std::size_t>(n), -1);
        for (std::int64_t v = 1; v <= n; ++v) {
            if (active[idx(v)] > 0) {
                pos[idx(v)] = static_cast<std::int64_t>(live.size());
                live.push_back(v);
            }
        }
        auto sync = [&](std::int64_t v) {
            const bool has = active[idx(v)] > 0;
            const bool in = pos[idx(v)] >= 0;
            if (has && !in) {
                pos[idx(v)] = static_cast<std::int64_t>(live.size());
                live.push_back(v);
            } else if (!has && in) {
                const std::int64_t p = pos[idx(v)];
                const std::int64_t last = live.back();
                live[static_cast<std::size_t>(p)] = last;
                pos[idx(last)] = p;
                live.pop_back();
                pos[idx(v)] = -1;
            }
        };
        std::uint64_t counter = 0;
        while (!live.empty()) {
            const std::uint64_t r = hash_at(opts.policy_seed, counter++);
            const std::int64_t v = live[static_cast<std::size_t>(r % live.size())];
            if (!execute_one(v))
                return false;
            sync(v);
            if (v > 1) sync(v - 1);
            if (v < n) sync(v + 1);
            if (opts.topology == Topology::torus) {
                sync(n);
                sync(1);
            }
        }
        return true;
    }

    bool run() {
        switch (opts.policy) {
            case PolicyKind::sweep: return run_sweep();
            case PolicyKind::leftmost: return run_leftmost();
            case PolicyKind::random: return run_random();
        }
        return false;
    }
};

} // namespace detail

struct TryStabilizeResult {
    bool completed = false;   // all actives resolved within budget
    bool sink_contact = false; // only meaningful with throw_on_sink
    StabilizationResult result;
};

// Non-throwing driver; exposes budget exhaustion as a verdict (the
// fixed-energy estimator classifies on it).
inline TryStabilizeResult try_stabilize(const Configuration& config, const InstructionTape& tape,
                                        const StabilizeOptions& opts = {}) {
    detail::Engine eng(config, tape, opts);
    const bool done = eng.run();

    TryStabilizeResult out;
    out.completed = done;
    out.sink_contact = eng.sink_hit;

    StabilizationResult& r = out.result;
    r.particles_in = config.total_active() + config.total_sleeping();
    r.odometer = Odometer(config.n);
    for (std::int64_t v = 1; v <= config.n; ++v)
        r.odometer.u[detail::Engine::idx(v)] = eng.cursor[detail::Engine::idx(v)].executed();
    r.final_config = Configuration(config.n);
    r.final_config.active = eng.active;
    r.final_config.asleep = eng.asleep;
    r.final_config.sink_left = config.sink_left + eng.sink_l;
    r.final_config.sink_right = config.sink_right + eng.sink_r;
    r.sleeping_count = r.final_config.total_sleeping();
    r.ejected_left = eng.sink_l;
    r.ejected_right = eng.sink_r;
    r.topplings = eng.executed_total;

    if (done) {
        // Exact conservation: particles-in = Y + ejected. Violations are bugs.
        if (r.particles_in != r.sleeping_count + r.ejected_left + r.ejected_right)
            throw std::logic_error("particle conservation violated");
    }
    return out;
}

inline StabilizationResult stabilize(const Configuration& config, const InstructionTape& tape,
                                     const StabilizeOptions& opts = {}) {
    TryStabilizeResult t = try_stabilize(config, tape, opts);
    if (t.sink_contact && opts.throw_on_sink)
        throw WindowTooSmall("particle reached the window boundary");
    if (!t.completed)
        throw BudgetExceeded("stabilization exceeded budget of " +
                             std::to_string(opts.budget >= 0 ? opts.budget : default_budget(config.n)) +
                             " instructions");
    return t.result;
}

// ---- stability check ---------------------------------------------------

struct StabilityViolation {
    std::int64_t site = 0;
    char condition = 'a'; // 'a': h outside {0,1}; 'b': h vs sleep-ending mismatch
    std::int64_t h = 0;
};

struct StabilityReport {
    bool stable = true;
    std::vector<StabilityViolation> violations;
    explicit operator bool() const { return stable; }
};

// Verifies the local balance conditions for a genuine (nonnegative) odometer
// against the initial configuration:
//   (a) h(v) = sigma(v) + uR(v-1) + uL(v+1) - uL(v) - uR(v) in {0,1}
//   (b) h(v) = 1 iff the site ends holding a sleeper: its last executed
//       instruction is sleep, or it kept an undisturbed initial sleeper.
// Counts are recomputed from the tape (O(sum u) walk), independent of the
// engine's incremental bookkeeping.
inline StabilityReport check_stable(const Odometer& odo, const Configuration& initial,
                                    const InstructionTape& tape, std::span<const std::int64_t> sites,
                                    std::int64_t site_offset = 0) {
    const std::int64_t n = odo.n;
    std::vector<PrefixCounts> counts(static_cast<std::size_t>(n) + 2);
    for (std::int64_t v = 1; v <= n; ++v)
        counts[static_cast<std::size_t>(v)] = tape.prefix_counts(v + site_offset, odo.at(v));

    StabilityReport rep;
    for (const std::int64_t v : sites) {
        const std::int64_t sigma = initial.active_at(v) + (initial.asleep_at(v) ? 1 : 0);
        const std::int64_t h = sigma + counts[static_cast<std::size_t>(v - 1)].rights +
                               counts[static_cast<std::size_t>(v + 1)].lefts -
                               counts[static_cast<std::size_t>(v)].lefts -
                               counts[static_cast<std::size_t>(v)].rights;
        if (h != 0 && h != 1) {
            rep.stable = false;
            rep.violations.push_back({v, 'a', h});
            continue;
        }
        const bool sleep_ending =
            odo.at(v) >= 1
                ? tape.instruction_at(v + site_offset, odo.at(v)) == Instruction::sleep
                : initial.asleep_at(v);
        if ((h == 1) != sleep_ending) {
            rep.stable = false;
            rep.violations.push_back({v, 'b', h});
        }
    }
    return rep;
}

inline StabilityReport check_stable(const Odometer& odo, const Configuration& initial,
                                    const InstructionTape& tape) {
    std::vector<std::int64_t> sites(static_cast<std::size_t>(odo.n));
    for (std::int64_t v = 1; v <= odo.n; ++v)
        sites[static_cast<std::size_t>(v - 1)] = v;
    return check_stable(odo, initial, tape, sites);
}

// Least-action test oracle: the true odometer never exceeds a stable
// candidate anywhere, so a false return from this is a bug somewhere.
inline bool least_action_compare(const Odometer& u_true, const Odometer& u_candidate,
                                 std::span<const std::int64_t> sites) {
    for (const std::int64_t v : sites)
        if (u_true.at(v) > u_candidate.at(v))
            return false;
    return true;
}

inline bool least_action_compare(const Odometer& u_true, const Odometer& u_candidate) {
    for (std::int64_t v = 1; v <= u_true.n; ++v)
        if (u_true.at(v) > u_candidate.at(v))
            return false;
    return true;
}

} // namespace arw
