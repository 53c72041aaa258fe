#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "bdmac/analytic.hpp"
#include "bdmac/dist.hpp"
#include "bdmac/scenario.hpp"

namespace bdmac {

// Full Velocity Difference car-following parameters; l = 0 reduces to the
// modified optimal-velocity model.
struct FvdParams {
    double a = 0.6;        // headway sensitivity, 1/s
    double l = 0.5;        // velocity-difference gain, 1/s
    double v0 = 15.0;      // m/s
    double y_m = 5.0;      // m
    double y_tilde = 2.0;  // m
    int n_vehicles = 10;   // platoon size including the lead
    double tau_s = 0.0;    // feedback delay

    void validate() const;
};

// Optimal velocity and its slope (tanh-shaped headway-to-speed map).
double bovf(double y_m_headway, const FvdParams& p);
double bovf_slope(double y_m_headway, const FvdParams& p);

enum class Lambda0Mapping { Linear, Logarithmic };
enum class KappaMode { Deterministic, Sampled };

struct GapAcceptanceModel {
    double alpha = -1.933;
    double gamma = 0.652;
    double eta = 30.0;
    Lambda0Mapping mapping = Lambda0Mapping::Linear;
    bool strict_form = false;  // keep the source's printed nesting

    void validate() const;
};

// Probability a two-wheeler accepts the gap y_star at platoon speed.
double gap_acceptance(double y_star, double speed_mps, const GapAcceptanceModel& g);

// Safety-packet rate from the acceptance probability.
double lambda0_from_gap(double p_accept, const GapAcceptanceModel& g);

struct StabilityResult {
    double y_star = 0.0;
    double v_prime = 0.0;      // V'(y*)
    double d_tilde = 0.0;      // a V'(y*)/(a+l)
    double sigma_root = 0.0;   // d_tilde (-2-sqrt2), the root backing tau_c
    double sigma_other = 0.0;  // d_tilde (-2+sqrt2)
    double log_argument = 0.0;
    double tau_c_s = 0.0;      // may be <= 0: no positive delay budget
    double tau_cr_s = 0.0;
    double p_accept = 0.0;
    double lambda0_pps = 0.0;
};

// Critical feedback delay for a real characteristic root at sigma_root;
// verifies the root residual internally.
StabilityResult critical_delay(const FvdParams& p, double y_star);

// |s^2 + (a+l) s e^{-s tau} + a V' e^{-s tau}| at real s.
double characteristic_residual(double a, double l, double v_prime, double sigma,
                               double tau_s);

// Rightmost root of the transcendental characteristic function, located by
// Newton iterations from a grid of starting points.
std::complex<double> rightmost_root(double a, double l, double v_prime,
                                    double tau_s, double re_min = -60.0,
                                    double re_max = 10.0, double im_max = 60.0);

// kappa * tau_c with kappa = 0.1, or drawn from N(0.1, variance 0.01)
// truncated to (0, 1].
double comm_delay_budget(double tau_c_s, KappaMode mode, std::uint64_t seed = 0);

struct LeadProfile {
    std::function<double(double)> speed;  // null: constant equilibrium speed
    std::function<double(double)> accel;  // null: zero
};

struct PlatoonTrajectory {
    double dt_s = 0.0;
    std::vector<double> t_s;
    // headway[i][step], relative velocity[i][step]; i over followers 1..N-1
    std::vector<std::vector<double>> headway_m;
    std::vector<std::vector<double>> relvel_mps;
};

// Fixed-step RK4 integration of the delayed car-following system with a
// linearly interpolated history buffer. History over [-tau, 0] is the
// given initial state held constant.
PlatoonTrajectory integrate_platoon(const FvdParams& p, double y_star,
                                    const std::vector<double>& headway_offset0,
                                    double horizon_s, double dt_s,
                                    const LeadProfile& lead = {},
                                    bool linearized = false);

// Zero crossings of a series, ignoring samples below the amplitude floor.
int count_sign_changes(const std::vector<double>& series, double floor_abs);

// --- gap-acceptance-driven headway sweep ---------------------------------

struct HeadwayPoint {
    double headway_m = 0.0;
    int n_stations = 0;
    double p_accept = 0.0;
    double lambda0_pps = 0.0;
    double tau_c_s = 0.0;
    double tau_cr_s = 0.0;
    DelayMoments ac0;
    DelayMoments ac1;
    double reliability_ac0 = 0.0;
    double reliability_ac1 = 0.0;
    double t_tr_s = 0.0;
    FixedPointSolution solution;
    NetworkScenario scenario;
};

struct PlatoonSweepConfig {
    FvdParams fvd;
    GapAcceptanceModel gap;
    KappaMode kappa_mode = KappaMode::Deterministic;
    std::uint64_t kappa_seed = 1;
    // Contention neighborhood radius. With lambda1 = 30 pkts/s per station
    // the shared channel saturates once ~45 stations contend; the default
    // keeps airtime utilization below ~10% across headways 2..10 m, where
    // the station-independent chain tracks the event simulation.
    double comm_range_m = 10.0;
    double lambda1_pps = 30.0;
};

// One sweep point: contention population from the communication range,
// AC0 rate from gap acceptance, delay moments from the fixed point, and
// reliability at the communication-delay budget.
HeadwayPoint evaluate_headway(const NetworkScenario& base,
                              const PlatoonSweepConfig& cfg, double headway_m);

}  // namespace bdmac
