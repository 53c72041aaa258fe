#include "bdmac/delay.hpp"

#include <cmath>
#include <vector>

namespace bdmac {

double mean_packet_bits(const ZDistribution& z, double packet_bits) {
    return packet_bits * z.mean_copies();
}

double transmission_time(const PhyProfile& phy, double mean_packet) {
    phy.validate();
    return phy.phy_header_bits / phy.basic_rate_bps +
           (phy.mac_header_bits + mean_packet) / phy.data_rate_bps +
           phy.propagation_delay_s;
}

namespace {
double snap(double t, double tick) { return std::llround(t / tick) * tick; }
}  // namespace

TransmissionProfile make_profile(const NetworkScenario& s, const ZDistribution& z,
                                 double tick_s) {
    TransmissionProfile p;
    p.tick_s = tick_s;
    p.t_tr_s = snap(transmission_time(s.phy, mean_packet_bits(z, s.phy.packet_bits)),
                    tick_s);
    p.sifs_s = snap(s.phy.sifs_s, tick_s);
    p.slot_s = snap(s.phy.slot_time_s, tick_s);
    p.aifs_s = {p.sifs_s + s.ac[0].aifsn * p.slot_s,
                p.sifs_s + s.ac[1].aifsn * p.slot_s};
    for (int k = 1; k <= 4; ++k)
        p.burst_s[static_cast<std::size_t>(k - 1)] = k * p.t_tr_s + (k - 1) * p.sifs_s;
    p.mean_packet_bits = mean_packet_bits(z, s.phy.packet_bits);
    return p;
}

DiscreteTimeDistribution pgf_transmission(const ZDistribution& z, double t_tr_s,
                                          double sifs_s, double tick_s) {
    std::vector<std::pair<double, double>> atoms;
    for (int k = 1; k <= 4; ++k)
        atoms.emplace_back(k * t_tr_s + (k - 1) * sifs_s, z[k - 1]);
    return DiscreteTimeDistribution::from_atoms(atoms, tick_s);
}

DiscreteTimeDistribution pgf_backoff_step(double p_b, const ZDistribution& z,
                                          double slot_s, double t_tr_s,
                                          double sifs_s, double aifs_s,
                                          double tick_s) {
    if (p_b < 0 || p_b > 1) throw DomainError("pgf_backoff_step: p_b outside [0,1]");
    std::vector<std::pair<double, double>> atoms;
    atoms.emplace_back(slot_s, 1.0 - p_b);
    for (int k = 1; k <= 4; ++k)
        atoms.emplace_back(k * t_tr_s + (k - 1) * sifs_s + aifs_s, p_b * z[k - 1]);
    return DiscreteTimeDistribution::from_atoms(atoms, tick_s);
}

DiscreteTimeDistribution pgf_service_ac0(const NetworkScenario& s,
                                         const FixedPointSolution& sol,
                                         double tick_s) {
    const ZDistribution z = z_distribution(s.detection);
    const TransmissionProfile prof = make_profile(s, z, tick_s);
    const auto tr = pgf_transmission(z, prof.t_tr_s, prof.sifs_s, tick_s);
    const auto h = pgf_backoff_step(sol.p_busy[0], z, prof.slot_s, prof.t_tr_s,
                                    prof.sifs_s, prof.aifs_s[0], tick_s);
    const auto backoff = uniform_backoff_mixture(h, s.ac[0].base_window());
    return convolve(backoff, tr);
}

DiscreteTimeDistribution pgf_service_ac1(const NetworkScenario& s,
                                         const FixedPointSolution& sol,
                                         double tick_s) {
    const ZDistribution z = z_distribution(s.detection);
    const TransmissionProfile prof = make_profile(s, z, tick_s);
    const auto tr = pgf_transmission(z, prof.t_tr_s, prof.sifs_s, tick_s);
    const auto h = pgf_backoff_step(sol.p_busy[1], z, prof.slot_s, prof.t_tr_s,
                                    prof.sifs_s, prof.aifs_s[1], tick_s);
    const double pc1 = sol.p_coll_ac1;
    const int l = s.ac[1].retry_limit;

    // (1-p) sum_n p^n prod_{j<=n} B_j  (+ TR once, factored out), then the
    // exhaustion branch p^(L+1) prod_{j<=L} B_j without a transmission.
    DiscreteTimeDistribution stages;  // running product of B_{1,j}
    std::vector<std::pair<double, DiscreteTimeDistribution>> success_parts;
    double pn = 1.0;
    for (int stage = 0; stage <= l; ++stage) {
        const auto b = uniform_backoff_mixture(h, cw_schedule(s.ac[1], stage));
        stages = (stage == 0) ? b : convolve(stages, b);
        success_parts.emplace_back((1.0 - pc1) * pn, stages);
        pn *= pc1;
    }
    const auto success = convolve(mix(success_parts), tr);
    std::vector<std::pair<double, DiscreteTimeDistribution>> all;
    all.emplace_back(1.0, success);
    all.emplace_back(pn, stages);  // pn == pc1^(L+1)
    return mix(all);
}

MomentPair transmission_moments(const ZDistribution& z,
                                const TransmissionProfile& prof) {
    double mean = 0.0;
    for (int k = 0; k < 4; ++k) mean += z[k] * prof.burst_s[static_cast<std::size_t>(k)];
    double var = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double d = prof.burst_s[static_cast<std::size_t>(k)] - mean;
        var += z[k] * d * d;
    }
    return {mean, var};
}

MomentPair backoff_step_moments(double p_b, const ZDistribution& z,
                                const TransmissionProfile& prof, int ac_index) {
    const double aifs = prof.aifs_s[static_cast<std::size_t>(ac_index)];
    double mean = (1.0 - p_b) * prof.slot_s;
    for (int k = 0; k < 4; ++k)
        mean += p_b * z[k] * (prof.burst_s[static_cast<std::size_t>(k)] + aifs);
    double var = (1.0 - p_b) * (prof.slot_s - mean) * (prof.slot_s - mean);
    for (int k = 0; k < 4; ++k) {
        const double d = prof.burst_s[static_cast<std::size_t>(k)] + aifs - mean;
        var += p_b * z[k] * d * d;
    }
    return {mean, var};
}

namespace {

// K uniform on {0..W-1} copies of one backoff step.
MomentPair uniform_sum(int window, const MomentPair& h) {
    const double ek = (window - 1) / 2.0;
    const double vk = (double(window) * window - 1) / 12.0;
    return {ek * h.mean, ek * h.var + vk * h.mean * h.mean};
}

}  // namespace

MomentPair service_moments_ac0(const NetworkScenario& s, const ZDistribution& z,
                               const TransmissionProfile& prof, double p_b0) {
    const auto tr = transmission_moments(z, prof);
    const auto h = backoff_step_moments(p_b0, z, prof, 0);
    const auto b = uniform_sum(s.ac[0].base_window(), h);
    return {tr.mean + b.mean, tr.var + b.var};
}

MomentPair service_moments_ac1(const NetworkScenario& s, const ZDistribution& z,
                               const TransmissionProfile& prof, double p_b1,
                               double p_c1) {
    const auto tr = transmission_moments(z, prof);
    const auto h = backoff_step_moments(p_b1, z, prof, 1);
    const int l = s.ac[1].retry_limit;
    double cum_mean = 0.0, cum_var = 0.0;
    double pn = 1.0;
    double e1 = 0.0, e2 = 0.0;  // raw mixture moments
    for (int stage = 0; stage <= l; ++stage) {
        const auto b = uniform_sum(cw_schedule(s.ac[1], stage), h);
        cum_mean += b.mean;
        cum_var += b.var;
        const double w = (1.0 - p_c1) * pn;
        const double m = tr.mean + cum_mean;
        e1 += w * m;
        e2 += w * (tr.var + cum_var + m * m);
        pn *= p_c1;
    }
    e1 += pn * cum_mean;
    e2 += pn * (cum_var + cum_mean * cum_mean);
    return {e1, e2 - e1 * e1};
}

namespace {
DelayMoments to_moments(const MomentPair& mv) {
    double var = mv.var;
    if (var < -1e-12) throw NumericError("service moments: negative variance");
    if (var < 0) var = 0.0;
    return DelayMoments{mv.mean, std::sqrt(var)};
}
}  // namespace

DelayMoments service_delay_ac0(const NetworkScenario& s,
                               const FixedPointSolution& sol, double tick_s) {
    const ZDistribution z = z_distribution(s.detection);
    const TransmissionProfile prof = make_profile(s, z, tick_s);
    return to_moments(service_moments_ac0(s, z, prof, sol.p_busy[0]));
}

DelayMoments service_delay_ac1(const NetworkScenario& s,
                               const FixedPointSolution& sol, double tick_s) {
    const ZDistribution z = z_distribution(s.detection);
    const TransmissionProfile prof = make_profile(s, z, tick_s);
    return to_moments(
        service_moments_ac1(s, z, prof, sol.p_busy[1], sol.p_coll_ac1));
}

double reliability(const DelayMoments& m, double t_tr_s, double tau_s) {
    if (m.stddev_s < 0) throw DomainError("reliability: negative stddev");
    if (tau_s < t_tr_s) return 0.0;
    if (m.stddev_s == 0.0) return 1.0;  // degenerate step at t_tr
    return 1.0 - std::exp(-(tau_s - t_tr_s) / m.stddev_s);
}

}  // namespace bdmac
