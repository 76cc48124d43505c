#pragma once

// Output files: CSV bodies are byte-deterministic functions of the flags and
// seed; each main output gets a JSON manifest beside it recording the exact
// parameters and FNV-1a digests of the written files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "arw/config.hpp"
#include "arw/engine.hpp"
#include "arw/experiments.hpp"
#include "arw/layerperc.hpp"
#include "arw/version.hpp"

#include "json.hpp"

namespace arw {

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os << body;
}

// ---- CSV bodies --------------------------------------------------------

inline std::string hockey_csv(const HockeyCurve& curve, const std::string& seed_text) {
    std::ostringstream os;
    os << "# " << kVersionTag << ", seed=" << seed_text << ", lambda=" << fmt_double(curve.lambda)
       << ", n=" << curve.n << ", mode=" << to_string(curve.mode) << "\n";
    os << "rho,D,Y,ejected_left,ejected_right,topplings\n";
    for (const auto& p : curve.points)
        os << fmt_double(p.rho) << ',' << fmt_double(p.density) << ',' << p.sleeping << ','
           << p.ejected_left << ',' << p.ejected_right << ',' << p.topplings << "\n";
    return os.str();
}

inline std::string estimates_csv_header(const std::string& seed_text) {
    return std::string("# ") + kVersionTag + ", seed=" + seed_text +
           "\nlambda,n,method,zeta_hat,ci_halfwidth,trials,seed\n";
}

inline std::string estimate_csv_row(const CriticalEstimate& e) {
    std::ostringstream os;
    os << fmt_double(e.lambda) << ',' << e.n << ',' << to_string(e.method) << ','
       << fmt_double(e.zeta_hat) << ',' << fmt_double(e.ci_halfwidth) << ',' << e.trials << ','
       << e.seed << "\n";
    return os.str();
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells, const std::string& seed_text) {
    std::ostringstream os;
    os << estimates_csv_header(seed_text);
    std::ostringstream errors;
    for (const auto& cell : cells) {
        if (cell.failed) {
            os << fmt_double(cell.lambda) << ',' << cell.n << ',' << to_string(cell.method)
               << ",nan,nan,0," << cell.seed << "\n";
            errors << "# error: lambda=" << fmt_double(cell.lambda) << " n=" << cell.n
                   << " replica=" << cell.replica << " method=" << to_string(cell.method) << ": "
                   << cell.error << "\n";
        } else {
            os << estimate_csv_row(cell.estimate);
        }
    }
    os << errors.str();
    return os.str();
}

inline std::string odometer_csv(const Odometer& odo, const InstructionTape& tape,
                                const std::string& seed_text) {
    std::ostringstream os;
    os << "# " << kVersionTag << ", seed=" << seed_text << ", lambda=" << fmt_double(tape.lambda())
       << ", n=" << odo.n << "\n";
    os << "site,u,lefts,rights,sleeps\n";
    for (std::int64_t v = 1; v <= odo.n; ++v) {
        const PrefixCounts c = tape.prefix_counts(v, odo.at(v));
        os << v << ',' << odo.at(v) << ',' << c.lefts << ',' << c.rights << ',' << c.sleeps << "\n";
    }
    return os.str();
}

inline std::string extended_odometer_csv(const ExtendedOdometer& u, const InstructionTape& tape,
                                         const std::string& seed_text) {
    std::ostringstream os;
    os << "# " << kVersionTag << ", seed=" << seed_text << ", lambda=" << fmt_double(tape.lambda())
       << ", n=" << u.n << "\n";
    os << "site,u,lefts,rights\n";
    for (std::int64_t v = 0; v <= u.n + 1; ++v) {
        const PrefixCounts c = tape.prefix_counts(v, u.at(v));
        os << v << ',' << u.at(v) << ',' << c.lefts << ',' << c.rights << "\n";
    }
    return os.str();
}

inline std::string infection_sets_dump(const InfectionSets& sets, const std::string& seed_text,
                                       double lambda) {
    std::ostringstream os;
    os << "# " << kVersionTag << ", seed=" << seed_text << ", lambda=" << fmt_double(lambda)
       << (sets.truncated ? ", truncated=1" : "") << "\n";
    os << "step,r,s\n";
    for (std::size_t v = 0; v < sets.steps.size(); ++v)
        for (const Cell& cell : sets.steps[v])
            os << v << ',' << cell.r << ',' << cell.s << "\n";
    return os.str();
}

inline std::string greedy_blocks_csv(const GreedyPathResult& g, const std::string& seed_text,
                                     double lambda) {
    std::ostringstream os;
    os << "# " << kVersionTag << ", seed=" << seed_text << ", lambda=" << fmt_double(lambda)
       << (g.truncated ? ", truncated=1" : "") << "\n";
    os << "block,r,s\n";
    for (const auto& b : g.blocks)
        os << b.block << ',' << b.cell.r << ',' << b.cell.s << "\n";
    return os.str();
}

// ---- run manifests -------------------------------------------------------

struct ManifestBuilder {
    nlohmann::json j;

    ManifestBuilder(const std::string& command, const std::string& seed_text) {
        j["version"] = kVersionTag;
        j["command"] = command;
        j["seed"] = seed_text;
        j["params"] = nlohmann::json::object();
        j["outputs"] = nlohmann::json::array();
    }

    template <typename T>
    void param(const std::string& key, const T& value) {
        j["params"][key] = value;
    }

    void output(const std::string& path, const std::string& body) {
        j["outputs"].push_back({{"path", path}, {"bytes", body.size()}, {"fnv1a64", fnv1a64_hex(body)}});
    }

    void wall_clock(double seconds) { j["wall_clock_sec"] = seconds; }

    void write(const std::string& path) const { write_file(path, j.dump(2) + "\n"); }
};

} // namespace arw
