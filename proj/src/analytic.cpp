#include "bdmac/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdmac/delay.hpp"

namespace bdmac {

void ZDistribution::validate() const {
    for (double p : probs)
        if (p < -1e-12 || p > 1 + 1e-12)
            throw DomainError("z-distribution: mass outside [0,1]");
    if (std::abs(sum() - 1.0) > 1e-12)
        throw DomainError("z-distribution: masses do not sum to 1");
}

ZDistribution z_distribution(const DetectionModel& d) {
    d.validate();
    const double q = d.p_preamble * d.p_decode;  // per-copy success
    ZDistribution z;
    z.probs[0] = q;
    z.probs[1] = q * (1 - q);
    z.probs[2] = q * (1 - q) * (1 - q);
    z.probs[3] = 1.0 - z.probs[0] - z.probs[1] - z.probs[2];
    return z;
}

int cw_schedule(const AccessCategoryConfig& ac, int stage) {
    if (stage < 0 || stage > ac.retry_limit)
        throw DomainError("cw_schedule: stage outside [0, retry_limit]");
    const int m = std::min(stage, ac.max_doublings());
    return (1 << m) * ac.base_window();
}

ExternalCollision external_collision(double beta_sum, int n_stations,
                                     const ZDistribution& z) {
    if (beta_sum < 0 || beta_sum > 1)
        throw DomainError("external_collision: beta_sum outside [0,1]");
    if (n_stations < 1)
        throw DomainError("external_collision: n_stations must be >= 1");
    const double comp = std::pow(1.0 - beta_sum, n_stations - 1);
    ExternalCollision out;
    out.p_ex = 1.0 - comp;
    double compk = 1.0;
    for (int k = 0; k < 4; ++k) {
        compk *= comp;                 // comp^(k+1)
        out.p_o += z[k] * (1.0 - compk);
    }
    return out;
}

std::array<double, 2> internal_collision(double omega0) {
    if (omega0 < 0 || omega0 > 1)
        throw DomainError("internal_collision: omega0 outside [0,1]");
    return {0.0, omega0};
}

double busy_probability(const std::array<double, 2>& beta, int n_stations,
                        int ac_index, double omega0) {
    if (ac_index != 0 && ac_index != 1)
        throw DomainError("busy_probability: ac_index must be 0 or 1");
    if (omega0 < 0 || omega0 > 1)
        throw DomainError("busy_probability: omega0 outside [0,1]");
    const double comp = std::pow(1.0 - beta[0] - beta[1], n_stations - 1);
    if (ac_index == 0) return 1.0 - comp;
    return 1.0 - comp * (1.0 - omega0);
}

double arrival_probability(const ArrivalModel& m, double default_epsilon_s) {
    m.validate();
    if (m.kind == ArrivalKind::Saturated) return 1.0;
    const double eps = m.epsilon_s > 0 ? m.epsilon_s : default_epsilon_s;
    if (eps <= 0) throw DomainError("arrival_probability: epsilon must be positive");
    if (m.kind == ArrivalKind::Poisson) return 1.0 - std::exp(-m.rate_pps * eps);
    const double p = m.rate_pps * eps;
    if (p > 1.0) throw DomainError("arrival_probability: periodic rate*epsilon > 1");
    return p;
}

namespace {

// geometric sums evaluated term by term; exact at the removable
// singularities of the printed closed forms
double power_sum(double r, int j_lo, int j_hi) {
    double s = 0.0, rj = std::pow(r, j_lo);
    for (int j = j_lo; j <= j_hi; ++j) {
        s += rj;
        rj *= r;
    }
    return j_hi < j_lo ? 0.0 : s;
}

double omega0_core(int w00, double idle, double rho0, double p_a0) {
    if (p_a0 <= 0 || idle <= 0) return 0.0;
    return 1.0 / ((w00 + 1) / (2.0 * idle) + (1.0 - rho0) / p_a0);
}

double omega1_core(int w10, int m, int retry_limit, double p_c1, double idle,
                   double rho1, double p_a1) {
    if (p_a1 <= 0 || idle <= 0) return 0.0;
    const double attempts = power_sum(p_c1, 0, retry_limit);
    const double mean_backoff = (w10 - 1) / (2.0 * idle);
    const double doubling = w10 * power_sum(2.0 * p_c1, 1, m) / (2.0 * idle);
    const double overlap = -power_sum(p_c1, 1, m);
    const double tail =
        ((1 << m) * w10 - 1) * power_sum(p_c1, m + 1, retry_limit);
    const double queue_idle = (1.0 - rho1) / p_a1;
    return attempts /
           (attempts + mean_backoff + doubling + overlap + tail + queue_idle);
}

}  // namespace

double omega_ac0(int w00, double p_b0, double rho0, double p_a0) {
    if (p_b0 >= 1.0)
        throw SingularityError("omega_ac0: p_b0 = 1 (1-p_b0 denominator vanishes)");
    if (p_a0 <= 0.0) throw SingularityError("omega_ac0: p_a0 = 0");
    if (p_b0 < 0 || rho0 < 0 || rho0 > 1)
        throw DomainError("omega_ac0: probability outside its range");
    return omega0_core(w00, 1.0 - p_b0, rho0, p_a0);
}

double omega_ac1(int w10, int doublings, int retry_limit, double p_c1,
                 double p_b1, double rho1, double p_a1) {
    if (p_b1 >= 1.0)
        throw SingularityError("omega_ac1: p_b1 = 1 (1-p_b1 denominator vanishes)");
    if (p_a1 <= 0.0) throw SingularityError("omega_ac1: p_a1 = 0");
    if (p_b1 < 0 || p_c1 < 0 || p_c1 > 1 || rho1 < 0 || rho1 > 1)
        throw DomainError("omega_ac1: probability outside its range");
    return omega1_core(w10, doublings, retry_limit, p_c1, 1.0 - p_b1, rho1, p_a1);
}

namespace {

double guard_probability(double p, const char* name) {
    if (p < -1e-9 || p > 1.0 + 1e-9)
        throw DivergenceError(std::string("solver: ") + name +
                              " left [0,1]: " + std::to_string(p));
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

FixedPointSolution solve_fixed_point(const NetworkScenario& scenario,
                                     const SolverOptions& opts) {
    scenario.validate();
    const int n = scenario.n_stations;
    const ZDistribution z = z_distribution(scenario.detection);
    const TransmissionProfile prof = make_profile(scenario, z, opts.tick_s);
    const int w00 = scenario.ac[0].base_window();
    const int w10 = scenario.ac[1].base_window();
    const int m1 = scenario.ac[1].max_doublings();
    const int l1 = scenario.ac[1].retry_limit;

    const bool sat0 = scenario.ac[0].arrival.kind == ArrivalKind::Saturated;
    const bool sat1 = scenario.ac[1].arrival.kind == ArrivalKind::Saturated;
    const double pa0 = arrival_probability(scenario.ac[0].arrival, scenario.phy.slot_time_s);
    const double pa1 = arrival_probability(scenario.ac[1].arrival, scenario.phy.slot_time_s);

    double rho0 = sat0 ? 1.0 : 0.5;
    double rho1 = sat1 ? 1.0 : 0.5;
    // interior seed from the p_b = p_c = 0 closed forms
    double om0 = omega0_core(w00, 1.0, rho0, pa0);
    double om1 = omega1_core(w10, m1, l1, 0.0, 1.0, rho1, pa1);

    FixedPointSolution sol;
    double comp = 1.0, pex = 0.0, po = 0.0, pc1 = 0.0;
    double mean0 = 0.0, mean1 = 0.0;

    // one sweep of the collision/busy relations from (om0, om1)
    auto refresh = [&]() {
        const double bsum = om0 + om1 * (1.0 - om0);
        comp = std::pow(std::max(1.0 - bsum, 0.0), n - 1);
        pex = 1.0 - comp;
        po = 0.0;
        double compk = 1.0;
        for (int k = 0; k < 4; ++k) {
            compk *= comp;
            po += z[k] * (1.0 - compk);
        }
        pc1 = om0 + (1.0 - om0) * po;
    };

    auto solve_omegas = [&]() {
        double damp = opts.inner_damping;
        for (int attempt = 0; attempt < 4; ++attempt, damp *= 0.5) {
            for (long it = 0; it < opts.max_inner; ++it) {
                refresh();
                const double next0 = omega0_core(w00, comp, rho0, pa0);
                const double next1 =
                    omega1_core(w10, m1, l1, pc1, comp * (1.0 - om0), rho1, pa1);
                guard_probability(next0, "omega0");
                guard_probability(next1, "omega1");
                const double step =
                    std::max(std::abs(next0 - om0), std::abs(next1 - om1));
                om0 += damp * (next0 - om0);
                om1 += damp * (next1 - om1);
                if (step < opts.omega_tol) {
                    refresh();
                    return;
                }
            }
        }
        throw ConvergenceError("solver: omega fixed point did not converge", 0.0,
                               0);
    };

    long outer = 0;
    double residual = 0.0;
    bool converged = false;
    for (outer = 1; outer <= opts.max_outer; ++outer) {
        solve_omegas();

        mean0 = service_moments_ac0(scenario, z, prof, 1.0 - comp).mean;
        mean1 = service_moments_ac1(scenario, z, prof,
                                    1.0 - comp * (1.0 - om0), pc1).mean;
        const double r0 =
            sat0 ? 1.0
                 : std::min(1.0, scenario.ac[0].arrival.rate_pps * mean0);
        const double r1 =
            sat1 ? 1.0
                 : std::min(1.0, scenario.ac[1].arrival.rate_pps * mean1);
        residual = std::max(std::abs(r0 - rho0), std::abs(r1 - rho1));
        rho0 += opts.damping * (r0 - rho0);
        rho1 += opts.damping * (r1 - rho1);
        if (residual <= opts.rho_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("solver: rho feedback did not converge", residual,
                               opts.max_outer);

    // re-converge the omegas against the final rho so the returned tuple
    // solves the coupled relations at the reported utilization exactly
    solve_omegas();
    mean0 = service_moments_ac0(scenario, z, prof, 1.0 - comp).mean;
    mean1 = service_moments_ac1(scenario, z, prof, 1.0 - comp * (1.0 - om0), pc1)
                .mean;

    sol.omega = {guard_probability(om0, "omega0"), guard_probability(om1, "omega1")};
    sol.beta = {sol.omega[0], sol.omega[1] * (1.0 - sol.omega[0])};
    sol.p_busy = {guard_probability(1.0 - comp, "p_b0"),
                  guard_probability(1.0 - comp * (1.0 - om0), "p_b1")};
    sol.p_ext_single = guard_probability(pex, "p_ex");
    sol.p_ext = guard_probability(po, "p_o");
    sol.p_internal = internal_collision(sol.omega[0]);
    sol.p_coll_ac1 = guard_probability(pc1, "p_c1");
    sol.rho = {guard_probability(rho0, "rho0"), guard_probability(rho1, "rho1")};
    sol.mean_service_s = {mean0, mean1};
    sol.iterations = outer;
    sol.residual = residual;
    sol.idle_complement = comp;
    return sol;
}

}  // namespace bdmac
