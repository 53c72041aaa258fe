#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdmac/config.hpp"
#include "bdmac/delay.hpp"
#include "bdmac/platoon.hpp"
#include "bdmac/sim.hpp"

namespace fs = std::filesystem;
using namespace bdmac;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt_ms(double seconds) { return fmt(seconds * 1e3); }

struct SweepRange {
    double from = 0, to = 0;
    int steps = 0;
    bool log_spaced = false;
    std::vector<double> values;  // wins over from/to when non-empty

    std::vector<double> expand() const {
        if (!values.empty()) return values;
        if (steps < 1) throw ConfigError("sweep: need --steps >= 1 or --values");
        std::vector<double> xs;
        if (steps == 1) {
            xs.push_back(from);
            return xs;
        }
        if (log_spaced) {
            if (from <= 0 || to <= 0)
                throw ConfigError("sweep: log spacing needs positive endpoints");
            const double lf = std::log(from), lt = std::log(to);
            for (int i = 0; i < steps; ++i)
                xs.push_back(std::exp(lf + (lt - lf) * i / (steps - 1)));
        } else {
            for (int i = 0; i < steps; ++i)
                xs.push_back(from + (to - from) * i / (steps - 1));
        }
        return xs;
    }
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot open output file " + (dir / name).string());
    return out;
}

std::string resolve_config_path(const std::string& given) {
    if (given.empty()) return given;
    if (fs::exists(given)) return given;
    if (const char* dir = std::getenv("BDMAC_CONFIG_DIR")) {
        const fs::path alt = fs::path(dir) / given;
        if (fs::exists(alt)) return alt.string();
    }
    return given;  // let load_config produce the error
}

AppConfig load_or_default(const std::string& path) {
    if (path.empty()) return AppConfig{};
    return load_config(resolve_config_path(path));
}

void apply_axis(NetworkScenario& s, const std::string& axis, double x) {
    if (axis == "n_stations") {
        s.n_stations = int(std::lround(x));
    } else if (axis == "data_rate") {
        s.phy.data_rate_bps = x;
    } else if (axis == "packet_bits") {
        s.phy.packet_bits = x;
    } else if (axis == "lambda0") {
        s.ac[0].arrival = ArrivalModel{ArrivalKind::Poisson, x, 0.0};
    } else if (axis == "lambda1") {
        s.ac[1].arrival = ArrivalModel{ArrivalKind::Periodic, x, 0.0};
    } else {
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    }
}

int cmd_analyze(const AppConfig& cfg, const fs::path& out_dir,
                const std::vector<double>& taus_ms, bool export_dist) {
    const NetworkScenario& s = cfg.scenario;
    const FixedPointSolution sol = solve_fixed_point(s);
    const DelayMoments m0 = service_delay_ac0(s, sol);
    const DelayMoments m1 = service_delay_ac1(s, sol);
    const ZDistribution z = z_distribution(s.detection);
    const TransmissionProfile prof = make_profile(s, z);

    std::ostringstream rep;
    rep << "fixed point (" << sol.iterations << " iterations, residual "
        << fmt(sol.residual) << ")\n";
    rep << "  omega0 " << fmt(sol.omega[0]) << "  omega1 " << fmt(sol.omega[1])
        << "\n";
    rep << "  beta0  " << fmt(sol.beta[0]) << "  beta1  " << fmt(sol.beta[1])
        << "\n";
    rep << "  p_b0 " << fmt(sol.p_busy[0]) << "  p_b1 " << fmt(sol.p_busy[1])
        << "  p_ex " << fmt(sol.p_ext_single) << "  p_o " << fmt(sol.p_ext)
        << "\n";
    rep << "  p_v1 " << fmt(sol.p_internal[1]) << "  p_c1 " << fmt(sol.p_coll_ac1)
        << "  rho0 " << fmt(sol.rho[0]) << "  rho1 " << fmt(sol.rho[1]) << "\n";
    rep << "t_tr " << fmt_ms(prof.t_tr_s) << " ms, mean packet "
        << fmt(prof.mean_packet_bits) << " bits\n";
    rep << "AC0 delay: mean " << fmt_ms(m0.mean_s) << " ms, stddev "
        << fmt_ms(m0.stddev_s) << " ms\n";
    rep << "AC1 delay: mean " << fmt_ms(m1.mean_s) << " ms, stddev "
        << fmt_ms(m1.stddev_s) << " ms\n";
    std::cout << rep.str();

    auto rel = open_out(out_dir, "reliability.csv");
    rel << "tau_ms,reliability_ac0,reliability_ac1\n";
    std::vector<double> taus = taus_ms;
    if (taus.empty())
        for (int i = 0; i <= 80; ++i) taus.push_back(0.25 * i);
    for (double t_ms : taus) {
        const double t = t_ms * 1e-3;
        rel << fmt(t_ms) << ',' << fmt(reliability(m0, prof.t_tr_s, t)) << ','
            << fmt(reliability(m1, prof.t_tr_s, t)) << '\n';
    }

    auto report = open_out(out_dir, "analysis.txt");
    report << rep.str();

    if (export_dist) {
        const auto d0 = pgf_service_ac0(s, sol);
        const auto d1 = pgf_service_ac1(s, sol);
        for (int a = 0; a < 2; ++a) {
            const auto& d = a == 0 ? d0 : d1;
            auto out = open_out(out_dir, a == 0 ? "dist_ac0.csv" : "dist_ac1.csv");
            out << "time_us,probability\n";
            for (const auto& [tick, p] : d.atoms())
                out << fmt(double(tick) * d.tick_s() * 1e6) << ',' << fmt(p) << '\n';
        }
    }
    return 0;
}

int cmd_sweep(const AppConfig& cfg, const fs::path& out_dir,
              const std::string& axis, const SweepRange& range) {
    const std::vector<double> xs = range.expand();
    if (xs.empty()) throw ConfigError("sweep: empty axis range");
    auto out = open_out(out_dir, "sweep_" + axis + ".csv");
    out << "x,mean_ac0_ms,mean_ac1_ms,std_ac0_ms,std_ac1_ms\n";
    for (double x : xs) {
        NetworkScenario s = cfg.scenario;
        try {
            apply_axis(s, axis, x);
            const FixedPointSolution sol = solve_fixed_point(s);
            const DelayMoments m0 = service_delay_ac0(s, sol);
            const DelayMoments m1 = service_delay_ac1(s, sol);
            out << fmt(x) << ',' << fmt_ms(m0.mean_s) << ',' << fmt_ms(m1.mean_s)
                << ',' << fmt_ms(m0.stddev_s) << ',' << fmt_ms(m1.stddev_s) << '\n';
        } catch (const Error& e) {
            std::cerr << "warning: sweep point " << fmt(x) << " failed: " << e.what()
                      << "\n";
            out << fmt(x) << ",nan,nan,nan,nan\n";
        }
    }
    return 0;
}

int cmd_simulate(const AppConfig& cfg, const fs::path& out_dir) {
    SimConfig sim = make_sim_config(cfg);
    const auto runs = run_many(sim);
    auto out = open_out(out_dir, "sim.csv");
    out << "run,ac,n_samples,mean_ms,stddev_ms,internal_collisions,"
           "external_collisions,drops\n";
    for (std::size_t r = 0; r < runs.size(); ++r)
        for (int a = 0; a < 2; ++a) {
            const auto& st = runs[r].ac[static_cast<std::size_t>(a)];
            out << r << ',' << a << ',' << st.n_samples << ','
                << fmt_ms(st.mean_s) << ',' << fmt_ms(st.stddev_s()) << ','
                << st.internal_collisions << ',' << st.external_collisions << ','
                << st.drops << '\n';
        }
    const PooledStats pool = pool_stats(runs);
    for (int a = 0; a < 2; ++a) {
        long ic = 0, ec = 0, dr = 0;
        for (const auto& r : runs) {
            ic += r.ac[static_cast<std::size_t>(a)].internal_collisions;
            ec += r.ac[static_cast<std::size_t>(a)].external_collisions;
            dr += r.ac[static_cast<std::size_t>(a)].drops;
        }
        out << "all," << a << ',' << pool.n_samples[static_cast<std::size_t>(a)]
            << ',' << fmt_ms(pool.mean_s[static_cast<std::size_t>(a)]) << ','
            << fmt_ms(pool.stddev_s[static_cast<std::size_t>(a)]) << ',' << ic
            << ',' << ec << ',' << dr << '\n';
        std::cout << "AC" << a << ": " << pool.n_samples[static_cast<std::size_t>(a)]
                  << " samples, mean "
                  << fmt_ms(pool.mean_s[static_cast<std::size_t>(a)])
                  << " ms, stddev "
                  << fmt_ms(pool.stddev_s[static_cast<std::size_t>(a)]) << " ms\n";
    }
    return 0;
}

int cmd_platoon(const AppConfig& cfg, const fs::path& out_dir,
                const SweepRange& range, bool with_sim,
                std::optional<Lambda0Mapping> only_mapping) {
    const std::vector<double> ys = range.expand();
    for (Lambda0Mapping mapping :
         {Lambda0Mapping::Linear, Lambda0Mapping::Logarithmic}) {
        if (only_mapping && *only_mapping != mapping) continue;
        PlatoonSweepConfig pc = cfg.platoon;
        pc.gap.mapping = mapping;
        const std::string name = mapping == Lambda0Mapping::Linear
                                     ? "platoon_linear.csv"
                                     : "platoon_log.csv";
        auto out = open_out(out_dir, name);
        out << "headway_m,p_accept,lambda0_pps,tau_c_ms,tau_cr_ms,"
               "mean_delay_ac0_ms,mean_delay_ac1_ms,stddev_ac0_ms,stddev_ac1_ms,"
               "reliability_ac0,reliability_ac1";
        if (with_sim) out << ",sim_mean_ac0_ms,sim_mean_ac1_ms,sim_std_ac0_ms,sim_std_ac1_ms";
        out << '\n';
        for (double y : ys) {
            try {
                const HeadwayPoint pt = evaluate_headway(cfg.scenario, pc, y);
                out << fmt(y) << ',' << fmt(pt.p_accept) << ','
                    << fmt(pt.lambda0_pps) << ',' << fmt_ms(pt.tau_c_s) << ','
                    << fmt_ms(pt.tau_cr_s) << ',' << fmt_ms(pt.ac0.mean_s) << ','
                    << fmt_ms(pt.ac1.mean_s) << ',' << fmt_ms(pt.ac0.stddev_s)
                    << ',' << fmt_ms(pt.ac1.stddev_s) << ','
                    << fmt(pt.reliability_ac0) << ',' << fmt(pt.reliability_ac1);
                if (with_sim) {
                    SimConfig sim = make_sim_config(cfg);
                    sim.scenario = pt.scenario;
                    const PooledStats pool = pool_stats(run_many(sim));
                    out << ',' << fmt_ms(pool.mean_s[0]) << ','
                        << fmt_ms(pool.mean_s[1]) << ',' << fmt_ms(pool.stddev_s[0])
                        << ',' << fmt_ms(pool.stddev_s[1]);
                }
                out << '\n';
            } catch (const Error& e) {
                std::cerr << "warning: headway " << fmt(y) << " failed: " << e.what()
                          << "\n";
                out << fmt(y) << ",nan,nan,nan,nan,nan,nan,nan,nan,nan,nan";
                if (with_sim) out << ",nan,nan,nan,nan";
                out << '\n';
            }
        }
    }
    return 0;
}

int cmd_stability(const AppConfig& cfg, const fs::path& out_dir,
                  const SweepRange& range) {
    const std::vector<double> ys = range.expand();
    auto out = open_out(out_dir, "stability.csv");
    out << "headway_m,v_prime,d_tilde,sigma,tau_c_ms,tau_cr_ms,residual\n";
    for (double y : ys) {
        try {
            const StabilityResult st = critical_delay(cfg.platoon.fvd, y);
            const double tau_cr =
                st.tau_c_s > 0 ? comm_delay_budget(st.tau_c_s, cfg.platoon.kappa_mode,
                                                   cfg.platoon.kappa_seed)
                               : 0.0;
            const double resid = characteristic_residual(
                cfg.platoon.fvd.a, cfg.platoon.fvd.l, st.v_prime, st.sigma_root,
                st.tau_c_s);
            out << fmt(y) << ',' << fmt(st.v_prime) << ',' << fmt(st.d_tilde) << ','
                << fmt(st.sigma_root) << ',' << fmt_ms(st.tau_c_s) << ','
                << fmt_ms(tau_cr) << ',' << fmt(resid) << '\n';
            std::cout << "y*=" << fmt(y) << " m: tau_C " << fmt_ms(st.tau_c_s)
                      << " ms, tau_cr " << fmt_ms(tau_cr) << " ms (sigma "
                      << fmt(st.sigma_root) << " 1/s, residual " << fmt(resid)
                      << ")\n";
        } catch (const Error& e) {
            std::cerr << "warning: headway " << fmt(y) << " failed: " << e.what()
                      << "\n";
            out << fmt(y) << ",nan,nan,nan,nan,nan,nan\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"802.11bd EDCA delay/reliability model, simulator and "
                 "platoon-stability sweeps"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    app.add_option("--config", config_path,
                   "configuration document (JSON); searched in "
                   "$BDMAC_CONFIG_DIR when not found directly");
    app.add_option("--out", out_dir, "output directory");

    bool dump_config_flag = false;
    bool export_dist = false;
    std::vector<double> taus_ms;
    auto* analyze = app.add_subcommand("analyze", "solve one scenario");
    analyze->add_flag("--dump-config", dump_config_flag,
                      "print the canonical configuration and exit");
    analyze->add_flag("--export-dist", export_dist,
                      "write the service-time distributions as CSV");
    analyze->add_option("--tau", taus_ms, "reliability evaluation points (ms)");

    std::string axis = "n_stations";
    SweepRange range;
    auto* sweep = app.add_subcommand("sweep", "sweep one scenario axis");
    sweep->add_option("--axis", axis,
                      "n_stations|data_rate|packet_bits|lambda0|lambda1");
    sweep->add_option("--from", range.from, "axis start");
    sweep->add_option("--to", range.to, "axis end");
    sweep->add_option("--steps", range.steps, "number of points");
    sweep->add_flag("--log-spaced", range.log_spaced, "logarithmic spacing");
    sweep->add_option("--values", range.values, "explicit axis values");

    std::uint64_t seed_override = 0;
    int runs_override = 0;
    auto* simulate = app.add_subcommand("simulate", "run the event simulator");
    simulate->add_option("--seed", seed_override, "RNG seed");
    simulate->add_option("--runs", runs_override, "independent runs");

    bool with_sim = false;
    std::string mapping_str;
    std::string kappa_mode_str;
    SweepRange prange;
    prange.from = 2;
    prange.to = 10;
    prange.steps = 9;
    auto* platoon = app.add_subcommand(
        "platoon", "gap-acceptance headway sweep (both lambda0 mappings)");
    platoon->add_option("--from", prange.from, "headway start (m)");
    platoon->add_option("--to", prange.to, "headway end (m)");
    platoon->add_option("--steps", prange.steps, "number of points");
    platoon->add_option("--values", prange.values, "explicit headways (m)");
    platoon->add_flag("--simulate", with_sim, "append simulator columns");
    platoon->add_option("--mapping", mapping_str, "linear|log (default: both)");
    platoon->add_option("--kappa-mode", kappa_mode_str, "deterministic|sampled");
    platoon->add_option("--seed", seed_override, "RNG seed");
    platoon->add_option("--runs", runs_override, "simulation runs per point");

    SweepRange srange;
    srange.from = 2;
    srange.to = 10;
    srange.steps = 9;
    auto* stability = app.add_subcommand("stability", "critical delay vs headway");
    stability->add_option("--from", srange.from, "headway start (m)");
    stability->add_option("--to", srange.to, "headway end (m)");
    stability->add_option("--steps", srange.steps, "number of points");
    stability->add_option("--values", srange.values, "explicit headways (m)");
    stability->add_option("--kappa-mode", kappa_mode_str, "deterministic|sampled");

    CLI11_PARSE(app, argc, argv);

    try {
        AppConfig cfg = load_or_default(config_path);
        if (seed_override != 0) cfg.seed = seed_override;
        if (runs_override != 0) cfg.runs = runs_override;
        if (!kappa_mode_str.empty())
            cfg.platoon.kappa_mode = kappa_mode_str == "sampled"
                                         ? KappaMode::Sampled
                                         : KappaMode::Deterministic;

        if (app.got_subcommand(analyze)) {
            if (dump_config_flag) {
                std::cout << dump_config(cfg);
                return 0;
            }
            return cmd_analyze(cfg, out_dir, taus_ms, export_dist);
        }
        if (app.got_subcommand(sweep)) return cmd_sweep(cfg, out_dir, axis, range);
        if (app.got_subcommand(simulate)) {
            try {
                return cmd_simulate(cfg, out_dir);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                std::cerr << "simulation error: " << e.what() << "\n";
                return 4;
            }
        }
        if (app.got_subcommand(platoon)) {
            std::optional<Lambda0Mapping> only;
            if (mapping_str == "linear") only = Lambda0Mapping::Linear;
            if (mapping_str == "log" || mapping_str == "logarithmic")
                only = Lambda0Mapping::Logarithmic;
            return cmd_platoon(cfg, out_dir, prange, with_sim, only);
        }
        if (app.got_subcommand(stability))
            return cmd_stability(cfg, out_dir, srange);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "solver error: " << e.what() << " (residual " << e.residual
                  << ")\n";
        return 3;
    } catch (const SingularityError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
