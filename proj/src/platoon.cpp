#include "bdmac/platoon.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bdmac/delay.hpp"

namespace bdmac {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

void FvdParams::validate() const {
    if (a <= 0) throw ConfigError("fvd: a must be positive");
    if (l < 0) throw ConfigError("fvd: l must be non-negative");
    if (v0 <= 0) throw ConfigError("fvd: v0 must be positive");
    if (y_tilde <= 0) throw ConfigError("fvd: y_tilde must be positive");
    if (n_vehicles < 2) throw ConfigError("fvd: need at least two vehicles");
    if (tau_s < 0) throw ConfigError("fvd: tau must be non-negative");
}

double bovf(double y, const FvdParams& p) {
    if (y < 0) throw DomainError("bovf: headway must be non-negative");
    return p.v0 * (std::tanh((y - p.y_m) / p.y_tilde) + std::tanh(p.y_m / p.y_tilde));
}

double bovf_slope(double y, const FvdParams& p) {
    if (y < 0) throw DomainError("bovf_slope: headway must be non-negative");
    const double c = std::cosh((y - p.y_m) / p.y_tilde);
    return p.v0 / p.y_tilde / (c * c);
}

void GapAcceptanceModel::validate() const {
    if (eta <= 0) throw ConfigError("gap: eta must be positive");
}

double gap_acceptance(double y_star, double speed_mps, const GapAcceptanceModel& g) {
    g.validate();
    if (speed_mps <= 0) throw DomainError("gap_acceptance: speed must be positive");
    const double u = g.alpha + g.gamma * y_star / speed_mps;
    if (g.strict_form) {
        // printed nesting: exp(alpha + (gamma y*/x) / (1 + e^u))
        return std::exp(g.alpha + (g.gamma * y_star / speed_mps) / (1.0 + std::exp(u)));
    }
    return 1.0 / (1.0 + std::exp(-u));
}

double lambda0_from_gap(double p_accept, const GapAcceptanceModel& g) {
    g.validate();
    if (p_accept < 0 || p_accept > 1)
        throw DomainError("lambda0_from_gap: p_accept outside [0,1]");
    if (g.mapping == Lambda0Mapping::Linear) return g.eta * p_accept;
    if (p_accept >= 1.0)
        throw DomainError("lambda0_from_gap: log mapping undefined at p_accept = 1");
    return 1.0 - g.eta * std::log(1.0 - p_accept);
}

double characteristic_residual(double a, double l, double v_prime, double sigma,
                               double tau_s) {
    const double e = std::exp(-sigma * tau_s);
    return std::abs(sigma * sigma + (a + l) * sigma * e + a * v_prime * e);
}

StabilityResult critical_delay(const FvdParams& p, double y_star) {
    p.validate();
    StabilityResult r;
    r.y_star = y_star;
    r.v_prime = bovf_slope(y_star, p);
    if (r.v_prime <= 0) throw DomainError("critical_delay: V'(y*) must be positive");
    r.d_tilde = p.a * r.v_prime / (p.a + p.l);
    r.sigma_root = r.d_tilde * (-2.0 - kSqrt2);
    r.sigma_other = r.d_tilde * (-2.0 + kSqrt2);
    // e^{-sigma tau} = -sigma^2 / ((a+l) sigma + a V')
    const double denom = (p.a + p.l) * r.sigma_root + p.a * r.v_prime;
    r.log_argument = -r.sigma_root * r.sigma_root / denom;
    if (r.log_argument <= 0)
        throw DomainError("critical_delay: non-positive log argument " +
                          std::to_string(r.log_argument));
    r.tau_c_s = std::log(r.log_argument) / (r.d_tilde * (2.0 + kSqrt2));
    const double resid =
        characteristic_residual(p.a, p.l, r.v_prime, r.sigma_root, r.tau_c_s);
    if (resid > 1e-6 * std::max(1.0, r.sigma_root * r.sigma_root))
        throw NumericError("critical_delay: characteristic residual " +
                           std::to_string(resid));
    return r;
}

std::complex<double> rightmost_root(double a, double l, double v_prime,
                                    double tau_s, double re_min, double re_max,
                                    double im_max) {
    using C = std::complex<double>;
    auto f = [&](C s) { return s * s + std::exp(-s * tau_s) * ((a + l) * s + a * v_prime); };
    auto fp = [&](C s) {
        return 2.0 * s +
               std::exp(-s * tau_s) * ((a + l) - tau_s * ((a + l) * s + a * v_prime));
    };
    C best(-1e30, 0.0);
    bool found = false;
    const int nr = 36, ni = 36;
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < ni; ++j) {
            C s(re_min + (re_max - re_min) * i / (nr - 1), im_max * j / (ni - 1));
            bool ok = true;
            for (int it = 0; it < 100; ++it) {
                const C d = fp(s);
                if (std::abs(d) < 1e-14) { ok = false; break; }
                const C sn = s - f(s) / d;
                if (std::abs(sn - s) < 1e-13) { s = sn; break; }
                s = sn;
                if (std::abs(s) > 1e8) { ok = false; break; }
            }
            if (!ok || std::abs(f(s)) > 1e-8) continue;
            if (s.imag() < 0) s = std::conj(s);
            if (std::abs(s.imag()) < 1e-9) s = C(s.real(), 0.0);
            if (!found || s.real() > best.real() + 1e-12) {
                best = s;
                found = true;
            }
        }
    }
    if (!found) throw NumericError("rightmost_root: no root located in window");
    return best;
}

double comm_delay_budget(double tau_c_s, KappaMode mode, std::uint64_t seed) {
    if (tau_c_s <= 0) throw DomainError("comm_delay_budget: tau_c must be positive");
    if (mode == KappaMode::Deterministic) return 0.1 * tau_c_s;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.1, 0.1);  // variance 0.01
    double kappa = 0.0;
    do {
        kappa = n(rng);
    } while (kappa <= 0.0 || kappa > 1.0);
    return kappa * tau_c_s;
}

namespace {

struct DdeSystem {
    const FvdParams& p;
    double y_star;
    double v_eq;
    double v_prime;  // used by the linearized variant
    const LeadProfile& lead;
    bool linearized;

    double lead_speed(double t) const {
        return lead.speed ? lead.speed(t) : v_eq;
    }
    double lead_accel(double t) const { return lead.accel ? lead.accel(t) : 0.0; }

    // state layout: [v_1..v_{n-1}, y_1..y_{n-1}] (followers only)
    void deriv(double t, const std::vector<double>& s,
               const std::vector<double>& sd, std::vector<double>& out) const {
        const int n = p.n_vehicles - 1;
        for (int i = 0; i < n; ++i) {
            const double vd = sd[static_cast<std::size_t>(i)];
            const double yd = sd[static_cast<std::size_t>(n + i)];
            double acc;
            if (i == 0) {
                if (linearized) {
                    acc = -p.a * v_prime * (yd - y_star) - (p.a + p.l) * vd;
                } else {
                    acc = lead_accel(t) +
                          p.a * (lead_speed(t) - bovf(yd, p) - vd) - p.l * vd;
                }
            } else {
                const double vprev = sd[static_cast<std::size_t>(i - 1)];
                const double yprev = sd[static_cast<std::size_t>(n + i - 1)];
                if (linearized) {
                    acc = p.a * v_prime * ((yprev - y_star) - (yd - y_star)) -
                          p.a * vd + p.l * (vprev - vd);
                } else {
                    acc = p.a * (bovf(yprev, p) - bovf(yd, p) - vd) +
                          p.l * (vprev - vd);
                }
            }
            out[static_cast<std::size_t>(i)] = acc;
            out[static_cast<std::size_t>(n + i)] = s[static_cast<std::size_t>(i)];
        }
    }
};

}  // namespace

PlatoonTrajectory integrate_platoon(const FvdParams& p, double y_star,
                                    const std::vector<double>& headway_offset0,
                                    double horizon_s, double dt_s,
                                    const LeadProfile& lead, bool linearized) {
    p.validate();
    if (horizon_s <= 0 || dt_s <= 0)
        throw DomainError("integrate_platoon: need positive horizon and step");
    if (p.tau_s > 0 && dt_s >= p.tau_s / 10.0)
        throw DomainError("integrate_platoon: dt must be below tau/10");
    const int n = p.n_vehicles - 1;
    const std::size_t dim = static_cast<std::size_t>(2 * n);

    // snap the step so the delay is an integral number of steps
    long nlag = 0;
    double dt = dt_s;
    if (p.tau_s > 0) {
        nlag = std::lround(std::ceil(p.tau_s / dt_s));
        dt = p.tau_s / double(nlag);
    }
    const long steps = std::lround(std::ceil(horizon_s / dt));

    std::vector<double> init(dim, 0.0);
    for (int i = 0; i < n && i < int(headway_offset0.size()); ++i)
        init[static_cast<std::size_t>(n + i)] = headway_offset0[static_cast<std::size_t>(i)];
    for (std::size_t i = static_cast<std::size_t>(n); i < dim; ++i)
        init[i] += y_star;

    DdeSystem sys{p, y_star, bovf(y_star, p), bovf_slope(y_star, p), lead,
                  linearized};

    std::vector<std::vector<double>> hist;
    hist.reserve(static_cast<std::size_t>(steps + 1));
    hist.push_back(init);

    auto delayed = [&](long i_now, double frac) -> std::vector<double> {
        if (nlag == 0) {
            // no delay: the "delayed" state is the current one; callers only
            // use frac in {0, 0.5, 1} relative to the step being computed
            if (frac == 0.0) return hist[static_cast<std::size_t>(i_now)];
            const auto& a = hist[static_cast<std::size_t>(i_now)];
            return a;
        }
        const long j = i_now - nlag;
        auto at = [&](long k) -> const std::vector<double>& {
            return k < 0 ? hist.front() : hist[static_cast<std::size_t>(k)];
        };
        if (frac == 0.0) return at(j);
        if (frac == 1.0) return at(j + 1);
        const auto& a = at(j);
        const auto& b = at(j + 1);
        std::vector<double> out(dim);
        for (std::size_t k = 0; k < dim; ++k) out[k] = 0.5 * (a[k] + b[k]);
        return out;
    };

    PlatoonTrajectory traj;
    traj.dt_s = dt;
    traj.t_s.reserve(static_cast<std::size_t>(steps + 1));
    traj.headway_m.assign(static_cast<std::size_t>(n), {});
    traj.relvel_mps.assign(static_cast<std::size_t>(n), {});
    auto record = [&](long i, const std::vector<double>& s) {
        traj.t_s.push_back(double(i) * dt);
        for (int k = 0; k < n; ++k) {
            traj.relvel_mps[static_cast<std::size_t>(k)].push_back(
                s[static_cast<std::size_t>(k)]);
            traj.headway_m[static_cast<std::size_t>(k)].push_back(
                s[static_cast<std::size_t>(n + k)]);
        }
    };
    record(0, init);

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    for (long i = 0; i < steps; ++i) {
        const auto& s = hist[static_cast<std::size_t>(i)];
        const double t = double(i) * dt;
        const auto d0 = delayed(i, 0.0);
        const auto dh = delayed(i, 0.5);
        const auto d1 = delayed(i, 1.0);

        sys.deriv(t, s, nlag == 0 ? s : d0, k1);
        for (std::size_t k = 0; k < dim; ++k) tmp[k] = s[k] + 0.5 * dt * k1[k];
        sys.deriv(t + 0.5 * dt, tmp, nlag == 0 ? tmp : dh, k2);
        for (std::size_t k = 0; k < dim; ++k) tmp[k] = s[k] + 0.5 * dt * k2[k];
        sys.deriv(t + 0.5 * dt, tmp, nlag == 0 ? tmp : dh, k3);
        for (std::size_t k = 0; k < dim; ++k) tmp[k] = s[k] + dt * k3[k];
        sys.deriv(t + dt, tmp, nlag == 0 ? tmp : d1, k4);

        std::vector<double> next(dim);
        for (std::size_t k = 0; k < dim; ++k)
            next[k] = s[k] + dt / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
        for (double v : next)
            if (!std::isfinite(v))
                throw DivergenceError("integrate_platoon: non-finite state at t=" +
                                      std::to_string(t + dt) + " s");
        hist.push_back(std::move(next));
        record(i + 1, hist.back());
    }
    return traj;
}

int count_sign_changes(const std::vector<double>& series, double floor_abs) {
    int changes = 0, last = 0;
    for (double x : series) {
        if (std::abs(x) < floor_abs) continue;
        const int cur = x > 0 ? 1 : -1;
        if (last != 0 && cur != last) ++changes;
        last = cur;
    }
    return changes;
}

HeadwayPoint evaluate_headway(const NetworkScenario& base,
                              const PlatoonSweepConfig& cfg, double headway_m) {
    if (headway_m <= 0) throw DomainError("evaluate_headway: headway must be positive");
    HeadwayPoint pt;
    pt.headway_m = headway_m;
    const double speed = bovf(headway_m, cfg.fvd);
    pt.p_accept = gap_acceptance(headway_m, speed, cfg.gap);
    pt.lambda0_pps = lambda0_from_gap(pt.p_accept, cfg.gap);
    pt.n_stations = int(cfg.comm_range_m / headway_m) + 1;

    NetworkScenario s = base;
    s.n_stations = pt.n_stations;
    s.ac[0].arrival = ArrivalModel{ArrivalKind::Poisson, pt.lambda0_pps, 0.0};
    s.ac[1].arrival = ArrivalModel{ArrivalKind::Periodic, cfg.lambda1_pps, 0.0};
    pt.scenario = s;

    pt.solution = solve_fixed_point(s);
    pt.ac0 = service_delay_ac0(s, pt.solution);
    pt.ac1 = service_delay_ac1(s, pt.solution);

    const ZDistribution z = z_distribution(s.detection);
    pt.t_tr_s = make_profile(s, z).t_tr_s;

    const StabilityResult st = critical_delay(cfg.fvd, headway_m);
    pt.tau_c_s = st.tau_c_s;
    pt.tau_cr_s = st.tau_c_s > 0
                      ? comm_delay_budget(st.tau_c_s, cfg.kappa_mode, cfg.kappa_seed)
                      : 0.0;
    pt.reliability_ac0 = reliability(pt.ac0, pt.t_tr_s, pt.tau_cr_s);
    pt.reliability_ac1 = reliability(pt.ac1, pt.t_tr_s, pt.tau_cr_s);
    return pt;
}

}  // namespace bdmac
