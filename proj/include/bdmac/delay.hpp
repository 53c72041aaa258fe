#pragma once

#include <array>

#include "bdmac/analytic.hpp"
#include "bdmac/dist.hpp"
#include "bdmac/scenario.hpp"

namespace bdmac {

// E[P]: expected total payload bits over the repetition burst.
double mean_packet_bits(const ZDistribution& z, double packet_bits);

// T_tr = PHY_H/R_b + (MAC_H + E[P])/R_d + delta. Unquantized.
double transmission_time(const PhyProfile& phy, double mean_packet);

// Scenario-derived timing constants, snapped once to the quantization grid
// so the analytic distributions, closed-form moments and the simulator all
// share the same atom times.
struct TransmissionProfile {
    double tick_s = 1e-6;
    double t_tr_s = 0.0;    // per-copy airtime, grid-snapped
    double sifs_s = 0.0;
    double slot_s = 0.0;
    std::array<double, 2> aifs_s{};
    std::array<double, 4> burst_s{};  // k copies: k*t_tr + (k-1)*sifs
    double mean_packet_bits = 0.0;

    double mean_burst_s(const ZDistribution& z) const {
        return burst_s[0] * z[0] + burst_s[1] * z[1] + burst_s[2] * z[2] +
               burst_s[3] * z[3];
    }
};

TransmissionProfile make_profile(const NetworkScenario& s, const ZDistribution& z,
                                 double tick_s = 1e-6);

// --- PGFs as explicit distributions -------------------------------------

// Burst duration: atom at k*t_tr+(k-1)*sifs with mass p(Z=k).
DiscreteTimeDistribution pgf_transmission(const ZDistribution& z, double t_tr_s,
                                          double sifs_s,
                                          double tick_s = 1e-6);

// One backoff decrement: idle slot, or a foreign burst plus AIFS.
DiscreteTimeDistribution pgf_backoff_step(double p_b, const ZDistribution& z,
                                          double slot_s, double t_tr_s,
                                          double sifs_s, double aifs_s,
                                          double tick_s = 1e-6);

// Service time of AC0: uniform backoff over W00 then one burst.
DiscreteTimeDistribution pgf_service_ac0(const NetworkScenario& s,
                                         const FixedPointSolution& sol,
                                         double tick_s = 1e-6);

// Service time of AC1: success after n collisions (stages 0..L) or retry
// exhaustion with mass p_c1^(L+1).
DiscreteTimeDistribution pgf_service_ac1(const NetworkScenario& s,
                                         const FixedPointSolution& sol,
                                         double tick_s = 1e-6);

// --- Closed-form moment route (used inside the solver and for sweeps) ---

struct MomentPair {
    double mean = 0.0;
    double var = 0.0;
};

MomentPair transmission_moments(const ZDistribution& z,
                                const TransmissionProfile& prof);
MomentPair backoff_step_moments(double p_b, const ZDistribution& z,
                                const TransmissionProfile& prof, int ac_index);
MomentPair service_moments_ac0(const NetworkScenario& s, const ZDistribution& z,
                               const TransmissionProfile& prof, double p_b0);
MomentPair service_moments_ac1(const NetworkScenario& s, const ZDistribution& z,
                               const TransmissionProfile& prof, double p_b1,
                               double p_c1);

DelayMoments service_delay_ac0(const NetworkScenario& s,
                               const FixedPointSolution& sol,
                               double tick_s = 1e-6);
DelayMoments service_delay_ac1(const NetworkScenario& s,
                               const FixedPointSolution& sol,
                               double tick_s = 1e-6);

// Shifted-exponential reliability: P(delay <= tau) with rate 1/stddev and
// shift t_tr; 0 below the shift, step function when stddev is 0.
double reliability(const DelayMoments& m, double t_tr_s, double tau_s);

}  // namespace bdmac
