#pragma once

// Particle configurations on an interval with sink counters, plus the plain
// text snapshot format (one `site,state` line per site, states A<k>/S/E).

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "arw/errors.hpp"
#include "arw/version.hpp"

namespace arw {

// Shortest exact decimal form (round-trips through parsing).
inline std::string fmt_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, end);
}

struct Configuration {
    std::int64_t n = 0;
    std::vector<std::int64_t> active; // active[v-1] for site v in 1..n
    std::vector<std::uint8_t> asleep; // at most one sleeper, never with actives
    std::int64_t sink_left = 0;       // trapped at site 0
    std::int64_t sink_right = 0;      // trapped at site n+1

    Configuration() = default;
    explicit Configuration(std::int64_t n_)
        : n(n_), active(static_cast<std::size_t>(n_), 0), asleep(static_cast<std::size_t>(n_), 0) {}

    std::int64_t active_at(std::int64_t v) const { return active[static_cast<std::size_t>(v - 1)]; }
    bool asleep_at(std::int64_t v) const { return asleep[static_cast<std::size_t>(v - 1)] != 0; }

    std::int64_t total_active() const {
        std::int64_t t = 0;
        for (auto a : active) t += a;
        return t;
    }
    std::int64_t total_sleeping() const {
        std::int64_t t = 0;
        for (auto s : asleep) t += s;
        return t;
    }
    // Conserved by stabilization; add_particle raises it by one.
    std::int64_t total_particles() const {
        return total_active() + total_sleeping() + sink_left + sink_right;
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

// One active particle lands at `site`; a sleeper there wakes.
inline void add_particle(Configuration& c, std::int64_t site) {
    if (site < 1 || site > c.n)
        throw std::out_of_range("add_particle: site " + std::to_string(site) +
                                " outside 1.." + std::to_string(c.n));
    auto& a = c.active[static_cast<std::size_t>(site - 1)];
    auto& s = c.asleep[static_cast<std::size_t>(site - 1)];
    if (s) {
        s = 0;
        a = 2; // woken sleeper + arrival
    } else {
        ++a;
    }
}

// ---- snapshot io ------------------------------------------------------

inline void write_snapshot(std::ostream& os, const Configuration& c, double lambda,
                           const std::string& seed_text) {
    os << "# " << kVersionTag << " snapshot\n";
    os << "# n=" << c.n << " lambda=" << fmt_double(lambda) << " seed=" << seed_text << "\n";
    os << "# actives=" << c.total_active() << " sleepers=" << c.total_sleeping()
       << " sink_left=" << c.sink_left << " sink_right=" << c.sink_right << "\n";
    for (std::int64_t v = 1; v <= c.n; ++v) {
        os << v << ',';
        if (c.asleep_at(v))
            os << "S";
        else if (c.active_at(v) > 0)
            os << 'A' << c.active_at(v);
        else
            os << "E";
        os << '\n';
    }
}

struct Snapshot {
    Configuration config;
    double lambda = 1.0;
    std::string seed_text;
};

inline Snapshot read_snapshot(std::istream& is) {
    Snapshot snap;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0 || line.find("snapshot") == std::string::npos)
        throw SnapshotParseError("missing snapshot magic line");
    if (!std::getline(is, line))
        throw SnapshotParseError("missing parameter header");
    std::int64_t n = -1;
    {
        std::istringstream hs(line);
        std::string tok;
        hs >> tok; // '#'
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw SnapshotParseError("bad header token: " + tok);
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "n") n = std::stoll(v);
            else if (k == "lambda") snap.lambda = std::stod(v);
            else if (k == "seed") snap.seed_text = v;
            else throw SnapshotParseError("unknown header key: " + k);
        }
    }
    if (n < 0)
        throw SnapshotParseError("header missing n");
    if (!std::getline(is, line) || line.rfind("# actives=", 0) != 0)
        throw SnapshotParseError("missing totals header");
    std::int64_t sink_l = 0, sink_r = 0;
    {
        std::istringstream hs(line);
        std::string tok;
        hs >> tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "sink_left") sink_l = std::stoll(v);
            else if (k == "sink_right") sink_r = std::stoll(v);
        }
    }
    snap.config = Configuration(n);
    snap.config.sink_left = sink_l;
    snap.config.sink_right = sink_r;
    std::int64_t expect = 1;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw SnapshotParseError("bad site line: " + line);
        const std::int64_t site = std::stoll(line.substr(0, comma));
        const std::string state = line.substr(comma + 1);
        if (site != expect++)
            throw SnapshotParseError("sites out of order at line: " + line);
        if (site < 1 || site > n)
            throw SnapshotParseError("site outside interval: " + line);
        if (state == "E") {
            // empty
        } else if (state == "S") {
            snap.config.asleep[static_cast<std::size_t>(site - 1)] = 1;
        } else if (state.size() > 1 && state[0] == 'A') {
            const std::int64_t k = std::stoll(state.substr(1));
            if (k < 1)
                throw SnapshotParseError("bad active count: " + line);
            snap.config.active[static_cast<std::size_t>(site - 1)] = k;
        } else {
            throw SnapshotParseError("bad state: " + line);
        }
    }
    if (expect != n + 1)
        throw SnapshotParseError("expected " + std::to_string(n) + " site lines, got " +
                                 std::to_string(expect - 1));
    return snap;
}

} // namespace arw
