#pragma once

// Experiment drivers: hockey-stick density curves, critical-density
// estimators (fixed-energy bisection on the torus, driven-dissipative
// stationary average), the point-source variant, and parameter sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "arw/config.hpp"
#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/rng.hpp"
#include "arw/tape.hpp"

namespace arw {

enum class DriveMode { incremental, batch };

inline const char* to_string(DriveMode m) {
    return m == DriveMode::incremental ? "incremental" : "batch";
}

struct HockeyPoint {
    double rho = 0.0;
    double density = 0.0; // D_rho = Y / n
    std::int64_t sleeping = 0;
    std::int64_t ejected_left = 0;  // cumulative up to this grid point
    std::int64_t ejected_right = 0;
    std::int64_t topplings = 0; // cumulative instructions executed
};

struct HockeyCurve {
    std::int64_t n = 0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    DriveMode mode = DriveMode::incremental;
    std::vector<HockeyPoint> points;
};

// Empirical density of sleepers after ceil(rho*n) uniform additions, sampled
// on a rho grid. Incremental mode adds one particle at a time, stabilizing
// after each; batch mode restabilizes the same placement prefix from scratch
// at every grid point. Both walk the same tape and placement stream, so the
// sleeper counts agree exactly (abelian property).
inline HockeyCurve hockey_curve(std::int64_t n, double lambda, double rho_max, double grid_step,
                                std::uint64_t seed, DriveMode mode = DriveMode::incremental,
                                std::int64_t budget = -1) {
    if (n < 1)
        throw std::invalid_argument("hockey_curve: n must be >= 1");
    if (grid_step <= 0 || rho_max < 0)
        throw std::invalid_argument("hockey_curve: need rho_max >= grid_step > 0");

    const InstructionTape tape(stream_seed(seed, Stream::tape), lambda);
    const std::uint64_t placement = stream_seed(seed, Stream::placement);

    HockeyCurve curve;
    curve.n = n;
    curve.lambda = lambda;
    curve.seed = seed;
    curve.mode = mode;

    std::vector<std::pair<double, std::int64_t>> grid; // (rho, target particle count)
    for (std::int64_t g = 1;; ++g) {
        const double rho = static_cast<double>(g) * grid_step;
        if (rho > rho_max + 1e-12)
            break;
        grid.emplace_back(rho, static_cast<std::int64_t>(std::ceil(rho * static_cast<double>(n) - 1e-9)));
    }

    StabilizeOptions opts;
    opts.budget = budget;

    if (mode == DriveMode::incremental) {
        Configuration state(n);
        Odometer consumed(n); // staged runs keep eating each site's stack in order
        std::int64_t added = 0, topplings = 0;
        std::size_t gi = 0;
        while (gi < grid.size()) {
            const std::int64_t want = grid[gi].second;
            while (added < want) {
                add_particle(state, uniform_site(placement, static_cast<std::uint64_t>(added), n));
                ++added;
                opts.resume_from = &consumed;
                StabilizationResult r = stabilize(state, tape, opts);
                topplings += r.topplings;
                state = std::move(r.final_config);
                consumed = std::move(r.odometer);
            }
            curve.points.push_back({grid[gi].first,
                                    static_cast<double>(state.total_sleeping()) / static_cast<double>(n),
                                    state.total_sleeping(), state.sink_left, state.sink_right,
                                    topplings});
            ++gi;
        }
    } else {
        for (const auto& [rho, count] : grid) {
            Configuration fresh(n);
            for (std::int64_t t = 0; t < count; ++t)
                add_particle(fresh, uniform_site(placement, static_cast<std::uint64_t>(t), n));
            StabilizationResult r = stabilize(fresh, tape, opts);
            curve.points.push_back({rho,
                                    static_cast<double>(r.sleeping_count) / static_cast<double>(n),
                                    r.sleeping_count, r.ejected_left, r.ejected_right, r.topplings});
        }
    }
    return curve;
}

// ---- critical-density estimators -------------------------------------------

enum class CriticalMethod { fixed_energy_torus, driven_dissipative_stationary, hockey_plateau };

inline const char* to_string(CriticalMethod m) {
    switch (m) {
        case CriticalMethod::fixed_energy_torus: return "fe";
        case CriticalMethod::driven_dissipative_stationary: return "dd";
        default: return "plateau";
    }
}

struct CriticalEstimate {
    double lambda = 0.0;
    std::int64_t n = 0;
    CriticalMethod method = CriticalMethod::fixed_energy_torus;
    double zeta_hat = 0.0;
    double ci_halfwidth = 0.0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
};

// One fixed-energy probe: `count` particles placed uniformly on the n-torus,
// absorbing iff fully asleep within budget_factor * n^2 instructions.
inline bool fe_probe_absorbing(std::int64_t n, double lambda, std::int64_t count,
                               std::int64_t budget_factor, std::uint64_t probe_seed) {
    if (count > n)
        return false; // pigeonhole: some site must hold two particles forever
    Configuration c(n);
    const std::uint64_t place = stream_seed(probe_seed, Stream::placement);
    for (std::int64_t t = 0; t < count; ++t)
        add_particle(c, uniform_site(place, static_cast<std::uint64_t>(t), n));
    const InstructionTape tape(stream_seed(probe_seed, Stream::tape), lambda);
    StabilizeOptions opts;
    opts.topology = Topology::torus;
    opts.budget = budget_factor * n * n;
    return try_stabilize(c, tape, opts).completed;
}

// Bisection over particle counts at density resolution 1/n with a majority
// vote per level. A split vote at the final level is an error (widen trials);
// earlier splits lean "active" deterministically.
inline CriticalEstimate estimate_zeta_fe(double lambda, std::int64_t n, std::int64_t trials,
                                         std::int64_t budget_factor, std::uint64_t seed) {
    if (n < 8)
        throw std::invalid_argument("estimate_zeta_fe: n must be >= 8");
    if (trials < 1)
        throw std::invalid_argument("estimate_zeta_fe: trials must be >= 1");

    // lo stays absorbing-voted, hi active-voted. Endpoints are not probed:
    // zero particles are trivially absorbing, and density 1 is absorbing only
    // for the single all-sleepers configuration.
    const std::uint64_t probes = stream_seed(seed, Stream::probe);
    std::int64_t lo = 0, hi = n;
    std::uint64_t probe_counter = 0;
    std::int64_t final_votes = 0;
    double final_density = 0.0;
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        std::int64_t absorbing = 0;
        for (std::int64_t t = 0; t < trials; ++t)
            absorbing += fe_probe_absorbing(n, lambda, mid, budget_factor,
                                            child_seed(probes, probe_counter++))
                             ? 1
                             : 0;
        final_votes = absorbing;
        final_density = static_cast<double>(mid) / static_cast<double>(n);
        if (2 * absorbing > trials)
            lo = mid;
        else
            hi = mid; // split votes lean active
    }
    if (2 * final_votes == trials)
        throw InconclusiveEstimate("split vote at density " + fmt_double(final_density) +
                                   "; widen trials");

    CriticalEstimate est;
    est.lambda = lambda;
    est.n = n;
    est.method = CriticalMethod::fixed_energy_torus;
    est.zeta_hat = static_cast<double>(lo + hi) / (2.0 * static_cast<double>(n));
    // Granularity-scale width, doubled when the deciding vote was close; the
    // vote margin is the only local slope information the bisection sees.
    const double margin =
        std::abs(2.0 * static_cast<double>(final_votes) / static_cast<double>(trials) - 1.0);
    est.ci_halfwidth = (margin >= 0.5 ? 1.0 : 2.0) / (2.0 * static_cast<double>(n));
    est.trials = trials;
    est.seed = seed;
    return est;
}

// Driven-dissipative chain: add at a uniform site, stabilize, repeat.
// Averages Y/n over `samples` steps after `burn_in`; the reported halfwidth
// is one standard error from 20 batch means.
inline CriticalEstimate estimate_zeta_dd(double lambda, std::int64_t n, std::int64_t burn_in,
                                         std::int64_t samples, std::uint64_t seed,
                                         std::int64_t budget = -1) {
    if (burn_in < 1 || samples < 1)
        throw std::invalid_argument("estimate_zeta_dd: burn_in and samples must be >= 1");

    const InstructionTape tape(stream_seed(seed, Stream::tape), lambda);
    const std::uint64_t place = stream_seed(seed, Stream::placement);
    StabilizeOptions opts;
    opts.budget = budget;

    Configuration state(n);
    Odometer consumed(n);
    std::vector<double> ys;
    ys.reserve(static_cast<std::size_t>(samples));
    for (std::int64_t t = 0; t < burn_in + samples; ++t) {
        add_particle(state, uniform_site(place, static_cast<std::uint64_t>(t), n));
        opts.resume_from = &consumed;
        StabilizationResult r = stabilize(state, tape, opts);
        state = std::move(r.final_config);
        consumed = std::move(r.odometer);
        if (t >= burn_in)
            ys.push_back(static_cast<double>(state.total_sleeping()));
    }

    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());

    const std::size_t nbatch = std::min<std::size_t>(20, ys.size());
    std::vector<double> batch(nbatch, 0.0);
    std::vector<std::size_t> counts(nbatch, 0);
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const std::size_t b = i * nbatch / ys.size();
        batch[b] += ys[i];
        ++counts[b];
    }
    double var = 0.0;
    for (std::size_t b = 0; b < nbatch; ++b) {
        batch[b] /= static_cast<double>(counts[b]);
        var += (batch[b] - mean) * (batch[b] - mean);
    }
    var = nbatch > 1 ? var / static_cast<double>(nbatch - 1) : 0.0;

    CriticalEstimate est;
    est.lambda = lambda;
    est.n = n;
    est.method = CriticalMethod::driven_dissipative_stationary;
    est.zeta_hat = mean / static_cast<double>(n);
    est.ci_halfwidth = std::sqrt(var / static_cast<double>(nbatch)) / static_cast<double>(n);
    est.trials = samples;
    est.seed = seed;
    return est;
}

// Diagnostic plateau level: average density over the top quarter of a curve.
inline double hockey_plateau_level(const HockeyCurve& curve) {
    if (curve.points.empty())
        return 0.0;
    const std::size_t from = curve.points.size() - std::max<std::size_t>(1, curve.points.size() / 4);
    double sum = 0.0;
    for (std::size_t i = from; i < curve.points.size(); ++i)
        sum += curve.points[i].density;
    return sum / static_cast<double>(curve.points.size() - from);
}

// ---- point source -----------------------------------------------------------

struct PointSourceResult {
    std::int64_t m = 0;
    double lambda = 0.0;
    std::int64_t window = 0;      // sites -window..window around the origin
    std::int64_t segment_lo = 0;  // occupied segment endpoints (true coordinates)
    std::int64_t segment_hi = 0;
    double segment_density = 0.0; // sleepers / segment length
    StabilizationResult result;
};

// Stabilizes m particles at the origin of Z inside a hard window; touching
// the window boundary is an error, so the result is exact for the infinite
// lattice. Conservation here: every particle ends asleep in the segment.
inline PointSourceResult point_source_run(std::int64_t m, double lambda, std::int64_t window,
                                          std::uint64_t seed, std::int64_t budget = -1) {
    if (m < 1)
        throw std::invalid_argument("point_source_run: m must be >= 1");
    if (window < 1)
        throw std::invalid_argument("point_source_run: window must be >= 1");

    const std::int64_t n = 2 * window + 1;
    const std::int64_t origin = window + 1; // engine site of true site 0
    Configuration c(n);
    c.active[static_cast<std::size_t>(origin - 1)] = m;

    const InstructionTape tape(stream_seed(seed, Stream::tape), lambda);
    StabilizeOptions opts;
    opts.site_offset = -origin; // tape sites are the true coordinates
    opts.throw_on_sink = true;
    opts.budget = budget >= 0 ? budget : std::max<std::int64_t>(1'000'000, 4 * m * m * m);

    PointSourceResult out;
    out.m = m;
    out.lambda = lambda;
    out.window = window;
    out.result = stabilize(c, tape, opts);

    std::int64_t lo = 0, hi = -1; // empty until the first sleeper
    for (std::int64_t v = 1; v <= n; ++v) {
        if (out.result.final_config.asleep_at(v)) {
            if (hi < lo)
                lo = v;
            hi = v;
        }
    }
    if (hi >= lo) {
        out.segment_lo = lo - origin;
        out.segment_hi = hi - origin;
        out.segment_density = static_cast<double>(out.result.sleeping_count) /
                              static_cast<double>(hi - lo + 1);
    }
    return out;
}

// ---- sweeps ------------------------------------------------------------------

struct SweepCell {
    double lambda = 0.0;
    std::int64_t n = 0;
    std::int64_t replica = 0;
    CriticalMethod method = CriticalMethod::fixed_energy_torus;
    std::uint64_t seed = 0; // derived child seed, recorded per row
    bool failed = false;
    std::string error;
    CriticalEstimate estimate;
};

struct SweepOptions {
    std::int64_t trials = 30;       // fe votes per bisection level
    std::int64_t budget_factor = 64;
    std::int64_t burn_in = 2000;    // dd
    std::int64_t samples = 4000;    // dd
    bool run_fe = true;
    bool run_dd = true;
    int jobs = 1;
};

// Runs the estimators over a (lambda, n, replica) grid with a worker pool.
// Output depends only on (seed, grid), never on scheduling: jobs are indexed
// and results land in their own slots.
inline std::vector<SweepCell> sweep(const std::vector<double>& lambdas,
                                    const std::vector<std::int64_t>& ns, std::int64_t replicas,
                                    std::uint64_t seed, const SweepOptions& opt = {}) {
    std::vector<SweepCell> cells;
    const std::uint64_t rep_stream = stream_seed(seed, Stream::replica);
    std::uint64_t cell_id = 0;
    for (double lambda : lambdas)
        for (std::int64_t n : ns)
            for (std::int64_t rep = 0; rep < replicas; ++rep) {
                const std::uint64_t child = child_seed(rep_stream, cell_id++);
                if (opt.run_fe)
                    cells.push_back({lambda, n, rep, CriticalMethod::fixed_energy_torus, child});
                if (opt.run_dd)
                    cells.push_back({lambda, n, rep, CriticalMethod::driven_dissipative_stationary, child});
            }

    auto run_cell = [&](SweepCell& cell) {
        try {
            if (cell.method == CriticalMethod::fixed_energy_torus)
                cell.estimate = estimate_zeta_fe(cell.lambda, cell.n, opt.trials, opt.budget_factor, cell.seed);
            else
                cell.estimate = estimate_zeta_dd(cell.lambda, cell.n, opt.burn_in, opt.samples, cell.seed);
        } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
        }
    };

    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1 || cells.size() <= 1) {
        for (auto& cell : cells)
            run_cell(cell);
    } else {
        std::mutex mu;
        std::size_t next = 0;
        auto worker = [&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= cells.size())
                        return;
                    i = next++;
                }
                run_cell(cells[i]);
            }
        };
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    return cells;
}

} // namespace arw
