#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <tuple>

#include "arw/engine.hpp"
#include "arw/rng.hpp"

using namespace arw;

namespace {

// Independent stability recheck: recount every site's used instructions
// directly off the tape and re-derive h, with the same end-state reading as
// the engine check. Used to confirm check_stable and a replay agree on
// corrupted odometers.
bool replay_stable(const Odometer& odo, const Configuration& initial, const InstructionTape& tape) {
    const std::int64_t n = odo.n;
    std::vector<std::int64_t> lefts(static_cast<std::size_t>(n) + 2, 0),
        rights(static_cast<std::size_t>(n) + 2, 0);
    for (std::int64_t v = 1; v <= n; ++v) {
        for (std::int64_t i = 1; i <= odo.at(v); ++i) {
            const Instruction ins = tape.instruction_at(v, i);
            if (ins == Instruction::left) ++lefts[static_cast<std::size_t>(v)];
            if (ins == Instruction::right) ++rights[static_cast<std::size_t>(v)];
        }
    }
    for (std::int64_t v = 1; v <= n; ++v) {
        const std::int64_t sigma = initial.active_at(v) + (initial.asleep_at(v) ? 1 : 0);
        const std::int64_t h = sigma + rights[static_cast<std::size_t>(v - 1)] +
                               lefts[static_cast<std::size_t>(v + 1)] -
                               lefts[static_cast<std::size_t>(v)] - rights[static_cast<std::size_t>(v)];
        if (h != 0 && h != 1)
            return false;
        const bool sleep_end = odo.at(v) >= 1
                                   ? tape.instruction_at(v, odo.at(v)) == Instruction::sleep
                                   : initial.asleep_at(v);
        if ((h == 1) != sleep_end)
            return false;
    }
    return true;
}

Configuration random_config(std::uint64_t seed, std::int64_t n, std::int64_t particles,
                            bool with_sleepers) {
    Configuration c(n);
    std::uint64_t ctr = 0;
    for (std::int64_t t = 0; t < particles; ++t)
        add_particle(c, uniform_site(seed, ctr++, n));
    if (with_sleepers) {
        for (std::int64_t tries = 0; tries < n / 4; ++tries) {
            const std::int64_t v = uniform_site(seed ^ 0xABCD, ctr++, n);
            if (c.active_at(v) == 0 && !c.asleep_at(v))
                c.asleep[static_cast<std::size_t>(v - 1)] = 1;
        }
    }
    return c;
}

} // namespace

TEST_CASE("empty configuration stabilizes to the zero odometer") {
    const InstructionTape tape(5, 0.8);
    const Configuration c(37);
    const StabilizationResult r = stabilize(c, tape);
    REQUIRE(r.odometer == Odometer(37));
    REQUIRE(r.sleeping_count == 0);
    REQUIRE(r.ejected_left == 0);
    REQUIRE(r.ejected_right == 0);
    REQUIRE(r.topplings == 0);
}

TEST_CASE("add_particle") {
    Configuration c(5);
    add_particle(c, 3);
    REQUIRE(c.active_at(3) == 1);
    add_particle(c, 3);
    REQUIRE(c.active_at(3) == 2);
    c = Configuration(5);
    c.asleep[1] = 1; // sleeper at site 2
    add_particle(c, 2);
    REQUIRE(c.active_at(2) == 2);
    REQUIRE_FALSE(c.asleep_at(2));
    REQUIRE_THROWS_AS(add_particle(c, 0), std::out_of_range);
    REQUIRE_THROWS_AS(add_particle(c, 6), std::out_of_range);
}

TEST_CASE("n = 1: the first instruction decides") {
    for (double lambda : {0.5, 1.0, 2.0}) {
        std::int64_t sleepers = 0;
        const std::int64_t runs = 20'000;
        for (std::int64_t s = 0; s < runs; ++s) {
            const InstructionTape tape(child_seed(123, static_cast<std::uint64_t>(s)), lambda);
            Configuration c(1);
            add_particle(c, 1);
            const StabilizationResult r = stabilize(c, tape);
            // exact: the site sleeps iff its first instruction is sleep
            const bool slept = tape.instruction_at(1, 1) == Instruction::sleep;
            REQUIRE(r.sleeping_count == (slept ? 1 : 0));
            if (slept)
                REQUIRE(r.odometer.at(1) == 1);
            sleepers += r.sleeping_count;
        }
        const double p = lambda / (1.0 + lambda);
        const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(runs));
        REQUIRE(std::abs(static_cast<double>(sleepers) / runs - p) < 3.5 * sigma);
    }
}

TEST_CASE("n = 2, two particles at site 1: execution-tree oracle vs Monte Carlo") {
    // Exact terminal distribution of (Y, ejected_left, ejected_right) by
    // weighted enumeration of instruction outcomes under a fixed policy
    // (leftmost active acts). Instructions are i.i.d., so the state needs no
    // index bookkeeping. Residual mass below 1e-9.
    const double lambda = 1.0;
    const double pl = 0.5 / (1 + lambda), pr = pl, ps = lambda / (1 + lambda);

    struct State {
        std::int64_t a1, a2, ejl, ejr;
        bool s1, s2;
        auto key() const { return std::tie(a1, a2, ejl, ejr, s1, s2); }
        bool operator<(const State& o) const { return key() < o.key(); }
    };
    std::map<State, double> frontier{{State{2, 0, 0, 0, false, false}, 1.0}};
    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, double> terminal;
    double live_mass = 1.0;
    while (live_mass > 1e-9) {
        std::map<State, double> next;
        live_mass = 0.0;
        for (const auto& [st, mass] : frontier) {
            if (st.a1 == 0 && st.a2 == 0) {
                terminal[{(st.s1 ? 1 : 0) + (st.s2 ? 1 : 0), st.ejl, st.ejr}] += mass;
                continue;
            }
            const bool at1 = st.a1 > 0; // leftmost active site
            auto push = [&](State s, double m) {
                next[s] += m;
                live_mass += m;
            };
            State L = st, R = st, S = st;
            if (at1) {
                --L.a1, ++L.ejl;
                --R.a1;
                if (R.s2) { R.s2 = false; R.a2 += 2; } else { ++R.a2; }
                if (st.a1 == 1) { S.a1 = 0; S.s1 = true; }
            } else {
                --L.a2;
                if (L.s1) { L.s1 = false; L.a1 += 2; } else { ++L.a1; }
                --R.a2, ++R.ejr;
                if (st.a2 == 1) { S.a2 = 0; S.s2 = true; }
            }
            push(L, mass * pl);
            push(R, mass * pr);
            push(S, mass * ps);
        }
        frontier = std::move(next);
    }

    // Monte Carlo with the real engine.
    const std::int64_t runs = 40'000;
    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::int64_t> counts;
    for (std::int64_t s = 0; s < runs; ++s) {
        const InstructionTape tape(child_seed(777, static_cast<std::uint64_t>(s)), lambda);
        Configuration c(2);
        add_particle(c, 1);
        add_particle(c, 1);
        const StabilizationResult r = stabilize(c, tape);
        ++counts[{r.sleeping_count, r.ejected_left, r.ejected_right}];
    }
    double total_prob = 0.0;
    for (const auto& [outcome, prob] : terminal) {
        total_prob += prob;
        const double freq = static_cast<double>(counts[outcome]) / runs;
        const double sigma = std::sqrt(prob * (1 - prob) / static_cast<double>(runs));
        INFO("outcome (Y, ejl, ejr) = (" << std::get<0>(outcome) << ", " << std::get<1>(outcome)
                                         << ", " << std::get<2>(outcome) << ")");
        REQUIRE(std::abs(freq - prob) < 3.0 * sigma + 1e-6);
    }
    REQUIRE(total_prob > 1 - 1e-8);
}

TEST_CASE("conservation and stability on randomized runs") {
    for (std::uint64_t s = 1; s <= 25; ++s) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(hash_at(s, 0) % 60);
        const std::int64_t particles = static_cast<std::int64_t>(hash_at(s, 1) % 80);
        const Configuration c = random_config(s, n, particles, s % 3 == 0);
        const InstructionTape tape(child_seed(31337, s), 0.8);
        const StabilizationResult r = stabilize(c, tape);
        REQUIRE(r.particles_in == r.sleeping_count + r.ejected_left + r.ejected_right);
        REQUIRE(r.final_config.total_active() == 0);
        REQUIRE(check_stable(r.odometer, c, tape).stable);
        REQUIRE(r.odometer.total() == r.topplings);
    }
}

TEST_CASE("abelian property: policies agree bit for bit") {
    for (std::uint64_t s = 1; s <= 30; ++s) {
        const std::int64_t n = 1 + static_cast<std::int64_t>(hash_at(s, 10) % 50);
        const std::int64_t particles = static_cast<std::int64_t>(hash_at(s, 11) % 60);
        const Configuration c = random_config(s * 99, n, particles, s % 4 == 0);
        const InstructionTape tape(child_seed(555, s), 1.0);

        StabilizeOptions sweep;
        StabilizeOptions leftmost;
        leftmost.policy = PolicyKind::leftmost;
        StabilizeOptions random_policy;
        random_policy.policy = PolicyKind::random;
        random_policy.policy_seed = s * 17;

        const StabilizationResult a = stabilize(c, tape, sweep);
        const StabilizationResult b = stabilize(c, tape, leftmost);
        const StabilizationResult d = stabilize(c, tape, random_policy);
        REQUIRE(a.odometer == b.odometer);
        REQUIRE(a.odometer == d.odometer);
        REQUIRE(a.final_config == b.final_config);
        REQUIRE(a.final_config == d.final_config);
    }
}

TEST_CASE("check_stable and replay agree on corrupted odometers") {
    std::int64_t flagged = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const std::int64_t n = 4 + static_cast<std::int64_t>(hash_at(s, 20) % 20);
        const Configuration c = random_config(s * 7, n, n, false);
        const InstructionTape tape(child_seed(99, s), 0.8);
        const StabilizationResult r = stabilize(c, tape);

        Odometer bad = r.odometer;
        const std::int64_t v = uniform_site(s, 50, n);
        ++bad.u[static_cast<std::size_t>(v - 1)];
        const bool checker = check_stable(bad, c, tape).stable;
        const bool replay = replay_stable(bad, c, tape);
        REQUIRE(checker == replay);
        flagged += checker ? 0 : 1;
    }
    // Either outcome is legal per site (an extra trailing sleep can leave a
    // stable odometer), but most corruptions must be caught.
    REQUIRE(flagged >= 8);
}

TEST_CASE("least action: reflexivity") {
    const Configuration c = random_config(4, 20, 20, false);
    const InstructionTape tape(2024, 0.8);
    const StabilizationResult r = stabilize(c, tape);
    REQUIRE(least_action_compare(r.odometer, r.odometer));
}

TEST_CASE("least action: stabilizing a larger interval dominates") {
    // Same tape sites, interval enlarged by `a` on both ends; the larger
    // stabilization is stable on the inner sites, so it bounds the true
    // odometer there.
    const std::int64_t n = 30, a = 5;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const InstructionTape tape(child_seed(808, s), 1.0);
        Configuration inner(n);
        std::uint64_t ctr = 0;
        for (std::int64_t t = 0; t < n; ++t)
            add_particle(inner, uniform_site(s, ctr++, n));

        Configuration outer(n + 2 * a);
        for (std::int64_t v = 1; v <= n; ++v)
            outer.active[static_cast<std::size_t>(v + a - 1)] = inner.active_at(v);

        const StabilizationResult rs = stabilize(inner, tape);
        StabilizeOptions opts;
        opts.site_offset = -a; // engine site v+a is tape site v
        const StabilizationResult rb = stabilize(outer, tape, opts);

        for (std::int64_t v = 1; v <= n; ++v)
            REQUIRE(rs.odometer.at(v) <= rb.odometer.at(v + a));
    }
}

TEST_CASE("least action: wake-and-restabilize candidate dominates") {
    std::int64_t strictly_bigger = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const std::int64_t n = 25;
        const Configuration c = random_config(s * 3 + 1, n, n, false);
        const InstructionTape tape(child_seed(4141, s), 1.0);
        const StabilizationResult first = stabilize(c, tape);
        if (first.sleeping_count == 0)
            continue;

        // Wake every sleeper and keep consuming the same stacks; the combined
        // odometer is stable for the original configuration.
        Configuration woken = first.final_config;
        for (std::int64_t v = 1; v <= n; ++v)
            if (woken.asleep_at(v)) {
                woken.asleep[static_cast<std::size_t>(v - 1)] = 0;
                woken.active[static_cast<std::size_t>(v - 1)] = 1;
            }
        StabilizeOptions opts;
        opts.resume_from = &first.odometer;
        const StabilizationResult second = stabilize(woken, tape, opts);

        REQUIRE(check_stable(second.odometer, c, tape).stable);
        REQUIRE(least_action_compare(first.odometer, second.odometer));
        if (second.odometer != first.odometer)
            ++strictly_bigger;
    }
    REQUIRE(strictly_bigger >= 5);
}

TEST_CASE("monotone coupling: more particles, pointwise larger odometer") {
    const std::int64_t n = 60;
    const std::uint64_t seed = 2468;
    const InstructionTape tape(stream_seed(seed, Stream::tape), 0.8);
    const std::uint64_t place = stream_seed(seed, Stream::placement);

    auto batch = [&](std::int64_t count) {
        Configuration c(n);
        for (std::int64_t t = 0; t < count; ++t)
            add_particle(c, uniform_site(place, static_cast<std::uint64_t>(t), n));
        return stabilize(c, tape);
    };
    const StabilizationResult small = batch(30);
    const StabilizationResult big = batch(60);
    REQUIRE(least_action_compare(small.odometer, big.odometer));
}

TEST_CASE("budget exhaustion is an error, not a truncation") {
    const InstructionTape tape(12, 0.5);
    Configuration c(50);
    for (std::int64_t v = 1; v <= 50; ++v)
        c.active[static_cast<std::size_t>(v - 1)] = 2;
    StabilizeOptions opts;
    opts.budget = 10;
    REQUIRE_THROWS_AS(stabilize(c, tape, opts), BudgetExceeded);
    const TryStabilizeResult t = try_stabilize(c, tape, opts);
    REQUIRE_FALSE(t.completed);
}

TEST_CASE("torus topology wraps instead of ejecting") {
    const InstructionTape tape(3, 0.8);
    Configuration c(10);
    add_particle(c, 1);
    add_particle(c, 10);
    StabilizeOptions opts;
    opts.topology = Topology::torus;
    const StabilizationResult r = stabilize(c, tape, opts);
    REQUIRE(r.ejected_left == 0);
    REQUIRE(r.ejected_right == 0);
    REQUIRE(r.sleeping_count == 2); // conservative dynamics: everything sleeps
}

TEST_CASE("staged driving equals batch stabilization exactly") {
    const std::int64_t n = 40;
    const std::uint64_t seed = 1357;
    const InstructionTape tape(stream_seed(seed, Stream::tape), 1.0);
    const std::uint64_t place = stream_seed(seed, Stream::placement);

    Configuration state(n);
    Odometer consumed(n);
    for (std::int64_t t = 0; t < 50; ++t) {
        add_particle(state, uniform_site(place, static_cast<std::uint64_t>(t), n));
        StabilizeOptions opts;
        opts.resume_from = &consumed;
        StabilizationResult r = stabilize(state, tape, opts);
        state = std::move(r.final_config);
        consumed = std::move(r.odometer);
    }

    Configuration all(n);
    for (std::int64_t t = 0; t < 50; ++t)
        add_particle(all, uniform_site(place, static_cast<std::uint64_t>(t), n));
    const StabilizationResult batch = stabilize(all, tape);

    REQUIRE(consumed == batch.odometer);
    REQUIRE(state == batch.final_config);
}
