#pragma once

// Command-line front end. Subcommands map onto the experiment drivers and
// the layer-percolation toolkit; every run emits deterministic output bodies
// plus a JSON manifest. Exit codes: 0 ok, 1 usage, 2 engine error,
// 3 inconclusive estimate, 4 infeasible boundary.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "arw/csvio.hpp"
#include "arw/engine.hpp"
#include "arw/errors.hpp"
#include "arw/experiments.hpp"
#include "arw/layerperc.hpp"
#include "arw/svg.hpp"
#include "arw/version.hpp"

#include "CLI11.hpp"

namespace arw {

// sigma specs: "const:<c>", "uniform:<m>" (m particles, i.i.d. uniform sites
// from the placement stream), or "list:a,b,c".
inline std::vector<std::int64_t> parse_sigma(const std::string& spec, std::int64_t n,
                                             std::uint64_t seed) {
    std::vector<std::int64_t> sigma(static_cast<std::size_t>(n), 0);
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "const") {
        const std::int64_t c = std::stoll(arg);
        if (c < 0)
            throw std::invalid_argument("sigma const must be nonnegative");
        std::fill(sigma.begin(), sigma.end(), c);
    } else if (kind == "uniform") {
        const std::int64_t m = std::stoll(arg);
        const std::uint64_t place = stream_seed(seed, Stream::placement);
        for (std::int64_t t = 0; t < m; ++t)
            ++sigma[static_cast<std::size_t>(uniform_site(place, static_cast<std::uint64_t>(t), n) - 1)];
    } else if (kind == "list") {
        std::stringstream ss(arg);
        std::string tok;
        std::size_t i = 0;
        while (std::getline(ss, tok, ',')) {
            if (i >= sigma.size())
                throw std::invalid_argument("sigma list longer than n");
            sigma[i++] = std::stoll(tok);
        }
        if (i != sigma.size())
            throw std::invalid_argument("sigma list shorter than n");
    } else {
        throw std::invalid_argument("bad sigma spec: " + spec);
    }
    return sigma;
}

namespace cli_detail {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline std::string argv_join(const std::vector<std::string>& args) {
    std::string s;
    for (const auto& a : args) {
        if (!s.empty())
            s += ' ';
        s += a;
    }
    return s;
}

} // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"activated random walk simulation lab"};
    app.set_config("--config", "", "key=value config file; flags override");
    app.require_subcommand(1);

    // ---- hockey ----
    auto* hockey = app.add_subcommand("hockey", "empirical density curve under uniform driving");
    std::int64_t h_n = 2000;
    double h_lambda = 0.8, h_rho_max = 1.25, h_grid = 0.01;
    std::string h_seed = "1", h_mode = "incremental", h_out = "hockey.csv", h_svg;
    std::int64_t h_budget_factor = 64;
    hockey->add_option("--n", h_n, "interval length");
    hockey->add_option("--lambda", h_lambda, "sleep rate");
    hockey->add_option("--rho-max", h_rho_max, "largest density on the grid");
    hockey->add_option("--grid", h_grid, "grid step in rho");
    hockey->add_option("--seed", h_seed, "master seed (decimal or 0x-hex)");
    hockey->add_option("--mode", h_mode)->check(CLI::IsMember({"incremental", "batch"}));
    hockey->add_option("--out", h_out, "output CSV path");
    hockey->add_option("--svg", h_svg, "also write an SVG plot here");
    hockey->add_option("--budget-factor", h_budget_factor, "toppling cap = factor * n^2");

    // ---- critical ----
    auto* critical = app.add_subcommand("critical", "critical density estimators");
    double c_lambda = 0.8;
    std::int64_t c_n = 512, c_trials = 30, c_budget_factor = 64, c_burn = 2000, c_samples = 4000;
    std::string c_seed = "1", c_method = "fe", c_out = "critical.csv";
    critical->add_option("--lambda", c_lambda, "sleep rate");
    critical->add_option("--n", c_n, "system size");
    critical->add_option("--method", c_method)->check(CLI::IsMember({"fe", "dd"}));
    critical->add_option("--trials", c_trials, "votes per bisection level (fe)");
    critical->add_option("--budget-factor", c_budget_factor, "absorbing budget = factor * n^2 (fe)");
    critical->add_option("--burn-in", c_burn, "chain steps to discard (dd)");
    critical->add_option("--samples", c_samples, "chain steps to average (dd)");
    critical->add_option("--seed", c_seed, "master seed");
    critical->add_option("--out", c_out, "output CSV path");

    // ---- stabilize ----
    auto* stab = app.add_subcommand("stabilize", "stabilize a configuration snapshot");
    std::string s_input, s_seed = "1", s_policy = "sweep", s_prefix = "stabilized";
    std::int64_t s_budget_factor = 64;
    stab->add_option("--input", s_input, "snapshot file")->required();
    stab->add_option("--seed", s_seed, "tape seed");
    stab->add_option("--policy", s_policy)->check(CLI::IsMember({"sweep", "leftmost", "random"}));
    stab->add_option("--out-prefix", s_prefix, "output file prefix");
    stab->add_option("--budget-factor", s_budget_factor, "toppling cap = factor * n^2");

    // ---- layer ----
    auto* layer = app.add_subcommand("layer", "extended odometers and layer percolation");
    std::string l_action, l_sigma = "const:0", l_seed = "1", l_out = "layer.csv";
    std::int64_t l_n = 4, l_u0 = 0, l_f0 = 0, l_k = 2, l_horizon = 0, l_window = 40;
    std::int64_t l_replicas = 16;
    double l_lambda = 0.8;
    bool l_oracle = false;
    layer->add_option("action", l_action, "one of min, enum, greedy, zeta-star")
        ->required()
        ->check(CLI::IsMember({"min", "enum", "greedy", "zeta-star"}));
    layer->add_option("--n", l_n, "interval length (enum caps at 12)");
    layer->add_option("--lambda", l_lambda, "sleep rate");
    layer->add_option("--sigma", l_sigma, "const:<c> | uniform:<m> | list:a,b,...");
    layer->add_option("--u0", l_u0, "odometer value at site 0");
    layer->add_option("--f0", l_f0, "net flow from site 0 to site 1");
    layer->add_option("--k", l_k, "greedy block length");
    layer->add_option("--horizon", l_horizon, "greedy path length (multiple of k)");
    layer->add_option("--window-cap", l_window, "bound on |u(v) - m(v)|");
    layer->add_option("--replicas", l_replicas, "replicas for zeta-star");
    layer->add_flag("--oracle", l_oracle, "use the brute-force enumerator (enum only)");
    layer->add_option("--seed", l_seed, "master seed");
    layer->add_option("--out", l_out, "output path");

    // ---- sweep ----
    auto* sw = app.add_subcommand("sweep", "estimator sweep over a (lambda, n) grid");
    std::string w_lambdas = "0.8", w_ns = "256", w_seed = "1", w_out = "sweep.csv";
    std::int64_t w_replicas = 1, w_trials = 30, w_budget_factor = 64, w_burn = 2000, w_samples = 4000;
    int w_jobs = 1;
    bool w_no_fe = false, w_no_dd = false;
    sw->add_option("--lambdas", w_lambdas, "comma-separated sleep rates");
    sw->add_option("--ns", w_ns, "comma-separated sizes");
    sw->add_option("--replicas", w_replicas);
    sw->add_option("--trials", w_trials);
    sw->add_option("--budget-factor", w_budget_factor);
    sw->add_option("--burn-in", w_burn);
    sw->add_option("--samples", w_samples);
    sw->add_option("--jobs", w_jobs, "worker pool size");
    sw->add_flag("--no-fe", w_no_fe);
    sw->add_flag("--no-dd", w_no_dd);
    sw->add_option("--seed", w_seed, "master seed");
    sw->add_option("--out", w_out, "output CSV path");

    std::vector<const char*> argv;
    argv.push_back("arwlab");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    cli_detail::Timer timer;
    try {
        if (hockey->parsed()) {
            const std::uint64_t seed = parse_seed(h_seed);
            const DriveMode mode = h_mode == "batch" ? DriveMode::batch : DriveMode::incremental;
            const HockeyCurve curve =
                hockey_curve(h_n, h_lambda, h_rho_max, h_grid, seed, mode, h_budget_factor * h_n * h_n);
            const std::string body = hockey_csv(curve, h_seed);
            write_file(h_out, body);
            ManifestBuilder mf("hockey", h_seed);
            mf.param("n", h_n);
            mf.param("lambda", h_lambda);
            mf.param("rho_max", h_rho_max);
            mf.param("grid", h_grid);
            mf.param("mode", h_mode);
            mf.param("budget_factor", h_budget_factor);
            mf.output(h_out, body);
            if (!h_svg.empty()) {
                const std::string svg = hockey_svg(curve, hockey_plateau_level(curve));
                write_file(h_svg, svg);
                mf.output(h_svg, svg);
            }
            mf.wall_clock(timer.seconds());
            mf.write(h_out + ".manifest.json");
            out << "wrote " << h_out << "\n";
        } else if (critical->parsed()) {
            const std::uint64_t seed = parse_seed(c_seed);
            CriticalEstimate est;
            if (c_method == "fe")
                est = estimate_zeta_fe(c_lambda, c_n, c_trials, c_budget_factor, seed);
            else
                est = estimate_zeta_dd(c_lambda, c_n, c_burn, c_samples, seed);
            const std::string body = estimates_csv_header(c_seed) + estimate_csv_row(est);
            write_file(c_out, body);
            ManifestBuilder mf("critical", c_seed);
            mf.param("lambda", c_lambda);
            mf.param("n", c_n);
            mf.param("method", c_method);
            mf.param("trials", c_trials);
            mf.param("budget_factor", c_budget_factor);
            mf.param("burn_in", c_burn);
            mf.param("samples", c_samples);
            mf.output(c_out, body);
            mf.wall_clock(timer.seconds());
            mf.write(c_out + ".manifest.json");
            out << "zeta_hat " << fmt_double(est.zeta_hat) << " +- " << fmt_double(est.ci_halfwidth)
                << "\n";
        } else if (stab->parsed()) {
            std::ifstream is(s_input);
            if (!is) {
                err << "cannot open " << s_input << "\n";
                return 1;
            }
            Snapshot snap;
            try {
                snap = read_snapshot(is);
            } catch (const SnapshotParseError& e) {
                err << "malformed snapshot: " << e.what() << "\n";
                return 1;
            }
            const std::uint64_t seed = parse_seed(s_seed);
            const InstructionTape tape(stream_seed(seed, Stream::tape), snap.lambda);
            StabilizeOptions opts;
            opts.budget = s_budget_factor * snap.config.n * snap.config.n;
            opts.policy = s_policy == "leftmost" ? PolicyKind::leftmost
                          : s_policy == "random" ? PolicyKind::random
                                                 : PolicyKind::sweep;
            opts.policy_seed = stream_seed(seed, Stream::policy);
            const StabilizationResult r = stabilize(snap.config, tape, opts);

            std::ostringstream snap_os;
            write_snapshot(snap_os, r.final_config, snap.lambda, s_seed);
            const std::string snap_body = snap_os.str();
            const std::string odo_body = odometer_csv(r.odometer, tape, s_seed);
            std::ostringstream sum_os;
            sum_os << "# " << kVersionTag << " stabilize summary\n"
                   << "particles_in=" << r.particles_in << "\n"
                   << "sleeping=" << r.sleeping_count << "\n"
                   << "ejected_left=" << r.ejected_left << "\n"
                   << "ejected_right=" << r.ejected_right << "\n"
                   << "topplings=" << r.topplings << "\n"
                   << "conserved="
                   << (r.particles_in == r.sleeping_count + r.ejected_left + r.ejected_right
                           ? "true"
                           : "false")
                   << "\n";
            const std::string sum_body = sum_os.str();
            write_file(s_prefix + ".snapshot", snap_body);
            write_file(s_prefix + ".odometer.csv", odo_body);
            write_file(s_prefix + ".summary.txt", sum_body);
            ManifestBuilder mf("stabilize", s_seed);
            mf.param("input", s_input);
            mf.param("policy", s_policy);
            mf.param("budget_factor", s_budget_factor);
            mf.output(s_prefix + ".snapshot", snap_body);
            mf.output(s_prefix + ".odometer.csv", odo_body);
            mf.output(s_prefix + ".summary.txt", sum_body);
            mf.wall_clock(timer.seconds());
            mf.write(s_prefix + ".manifest.json");
            out << sum_body;
        } else if (layer->parsed()) {
            const std::uint64_t seed = parse_seed(l_seed);
            const InstructionTape tape(stream_seed(seed, Stream::tape), l_lambda);
            BoundaryData bd;
            bd.n = l_n;
            bd.sigma = parse_sigma(l_sigma, l_n, seed);
            bd.u0 = l_u0;
            bd.f0 = l_f0;
            ManifestBuilder mf("layer " + l_action, l_seed);
            mf.param("n", l_n);
            mf.param("lambda", l_lambda);
            mf.param("sigma", l_sigma);
            mf.param("u0", l_u0);
            mf.param("f0", l_f0);
            mf.param("window_cap", l_window);
            std::string body;
            bool truncated = false;
            if (l_action == "min") {
                const MinimalOdometer m = minimal_odometer(tape, bd);
                body = extended_odometer_csv(m.odo, tape, l_seed);
            } else if (l_action == "enum") {
                const InfectionSets sets = l_oracle
                                               ? brute_force_infections(tape, bd, l_window, 12).sets
                                               : enumerate_infections(tape, bd, l_window);
                truncated = sets.truncated;
                body = infection_sets_dump(sets, l_seed, l_lambda);
            } else if (l_action == "greedy") {
                const std::int64_t horizon = l_horizon > 0 ? l_horizon : l_n;
                const GreedyPathResult g = greedy_path(tape, bd, l_k, horizon, l_window);
                truncated = g.truncated;
                body = greedy_blocks_csv(g, l_seed, l_lambda);
            } else { // zeta-star
                const std::int64_t horizon = l_horizon > 0 ? l_horizon : 240;
                mf.param("k", l_k);
                mf.param("horizon", horizon);
                mf.param("replicas", l_replicas);
                const ZetaStarEstimate est =
                    estimate_zeta_star(seed, l_lambda, l_k, horizon, l_replicas, l_window);
                truncated = est.truncated;
                std::ostringstream os;
                os << estimates_csv_header(l_seed);
                os << fmt_double(l_lambda) << ',' << horizon << ",zeta_star,"
                   << fmt_double(est.zeta_hat) << ',' << fmt_double(est.std_error) << ','
                   << l_replicas << ',' << seed << "\n";
                os << "# xk_over_k=" << fmt_double(est.xk_over_k) << " se=" << fmt_double(est.xk_std_error)
                   << "\n";
                body = os.str();
            }
            write_file(l_out, body);
            mf.output(l_out, body);
            mf.wall_clock(timer.seconds());
            mf.write(l_out + ".manifest.json");
            if (truncated)
                err << "warning: window cap truncated the enumeration; rows are lower bounds\n";
            out << "wrote " << l_out << "\n";
        } else if (sw->parsed()) {
            const std::uint64_t seed = parse_seed(w_seed);
            std::vector<double> lambdas;
            std::vector<std::int64_t> ns;
            {
                std::stringstream ss(w_lambdas);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    lambdas.push_back(std::stod(tok));
            }
            {
                std::stringstream ss(w_ns);
                std::string tok;
                while (std::getline(ss, tok, ','))
                    ns.push_back(std::stoll(tok));
            }
            SweepOptions opt;
            opt.trials = w_trials;
            opt.budget_factor = w_budget_factor;
            opt.burn_in = w_burn;
            opt.samples = w_samples;
            opt.run_fe = !w_no_fe;
            opt.run_dd = !w_no_dd;
            opt.jobs = w_jobs;
            const auto cells = sweep(lambdas, ns, w_replicas, seed, opt);
            const std::string body = sweep_csv(cells, w_seed);
            write_file(w_out, body);
            ManifestBuilder mf("sweep", w_seed);
            mf.param("lambdas", w_lambdas);
            mf.param("ns", w_ns);
            mf.param("replicas", w_replicas);
            mf.param("jobs", w_jobs);
            mf.output(w_out, body);
            mf.wall_clock(timer.seconds());
            mf.write(w_out + ".manifest.json");
            out << "wrote " << w_out << "\n";
        }
    } catch (const InconclusiveEstimate& e) {
        err << "inconclusive: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleBoundary& e) {
        err << "infeasible boundary: " << e.what() << "\n";
        return 4;
    } catch (const EngineError& e) {
        err << "engine error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace arw
