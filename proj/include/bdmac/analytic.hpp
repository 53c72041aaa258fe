#pragma once

#include <array>

#include "bdmac/scenario.hpp"

namespace bdmac {

// Masses of Z, the number of copies sent in one access (1..4).
struct ZDistribution {
    std::array<double, 4> probs{1.0, 0.0, 0.0, 0.0};

    double operator[](int i) const { return probs[static_cast<std::size_t>(i)]; }
    double sum() const { return probs[0] + probs[1] + probs[2] + probs[3]; }
    double mean_copies() const {
        return probs[0] + 2 * probs[1] + 3 * probs[2] + 4 * probs[3];
    }
    void validate() const;
};

// Per-copy protocol: preamble detected w.p. p_d, detected copy decoded
// w.p. p_s, repetitions stop at the first decoded copy, at most 4 copies.
ZDistribution z_distribution(const DetectionModel& d);

// W_{i,stage}: doubles per stage up to M doublings, then stays flat.
int cw_schedule(const AccessCategoryConfig& ac, int stage);

struct ExternalCollision {
    double p_ex = 0.0;  // single-copy collision probability
    double p_o = 0.0;   // burst collision probability, averaged over Z
};

// p_ex = 1-(1-beta_sum)^(N-1); p_o = sum_k p(Z=k) (1-(1-p_ex)^k).
ExternalCollision external_collision(double beta_sum, int n_stations,
                                     const ZDistribution& z);

// (p_v0, p_v1): AC0 always wins the virtual collision.
std::array<double, 2> internal_collision(double omega0);

// Busy probability seen by one AC. AC1 additionally sees its own
// station's AC0 transmissions; at a converged point omega0 == beta[0].
double busy_probability(const std::array<double, 2>& beta, int n_stations,
                        int ac_index, double omega0);

// Probability of >=1 arrival in one observation interval.
double arrival_probability(const ArrivalModel& m, double default_epsilon_s);

// Internal transmission probability of AC0 given the window, busy
// probability, utilization and arrival probability.
double omega_ac0(int w00, double p_b0, double rho0, double p_a0);

// Internal transmission probability of AC1 with the full retry structure
// (window w10, M doublings, retry limit L).
double omega_ac1(int w10, int doublings, int retry_limit, double p_c1,
                 double p_b1, double rho1, double p_a1);

struct SolverOptions {
    double rho_tol = 1e-5;       // outer threshold on |rho_new - rho_old|
    long max_outer = 10000;
    double damping = 0.5;        // outer rho relaxation
    double omega_tol = 1e-13;    // inner fixed point on (omega0, omega1)
    long max_inner = 200000;
    double inner_damping = 0.3;  // halved on a stalled inner iteration
    double tick_s = 1e-6;        // time quantization used for service moments
};

struct FixedPointSolution {
    std::array<double, 2> omega{};       // internal transmission probability
    std::array<double, 2> beta{};        // external transmission probability
    std::array<double, 2> p_busy{};
    double p_ext_single = 0.0;           // p_ex
    double p_ext = 0.0;                  // p_o
    std::array<double, 2> p_internal{};  // p_v0 = 0, p_v1 = omega0
    double p_coll_ac1 = 0.0;             // p_c1
    std::array<double, 2> rho{};
    std::array<double, 2> mean_service_s{};  // T_Si backing the rho update
    long iterations = 0;
    double residual = 0.0;
    // carried so downstream PGFs use exactly the solver's geometry
    double idle_complement = 1.0;        // (1-beta0-beta1)^(N-1)
};

// Coupled fixed point of the transmission/collision/busy relations with
// the rho = lambda*T_S feedback closed through the service-time moments.
FixedPointSolution solve_fixed_point(const NetworkScenario& scenario,
                                     const SolverOptions& opts = {});

}  // namespace bdmac
