#include <cmath>
#include <functional>
#include <random>

#include <doctest.h>

#include "bdmac/analytic.hpp"
#include "bdmac/delay.hpp"

using namespace bdmac;

namespace {

NetworkScenario small_scenario(int w0, int cw1_min, int cw1_max, int l1,
                               double pd, double ps) {
    NetworkScenario s = default_scenario();
    s.ac[0].cw_min = w0 - 1;
    s.ac[0].cw_max = w0 - 1;
    s.ac[1].cw_min = cw1_min;
    s.ac[1].cw_max = cw1_max;
    s.ac[1].retry_limit = l1;
    s.detection = {pd, ps};
    return s;
}

FixedPointSolution stub_solution(double pb0, double pb1, double pc1) {
    FixedPointSolution sol;
    sol.p_busy = {pb0, pb1};
    sol.p_coll_ac1 = pc1;
    return sol;
}

// brute force over (counter value, per-decrement idle/busy-Z outcome, final
// burst Z): every path of the AC0 service time
void enumerate_ac0(const NetworkScenario& s, double pb0, double& mean,
                   double& var) {
    const auto z = z_distribution(s.detection);
    const auto prof = make_profile(s, z);
    const int w = s.ac[0].base_window();
    double e1 = 0.0, e2 = 0.0;
    struct Step {
        double p;
        double t;
    };
    std::vector<Step> h;
    h.push_back({1.0 - pb0, prof.slot_s});
    for (int k = 0; k < 4; ++k)
        h.push_back({pb0 * z[k],
                     prof.burst_s[static_cast<std::size_t>(k)] + prof.aifs_s[0]});
    // recursion over the k decrements
    std::function<void(int, double, double)> rec = [&](int left, double p,
                                                       double t) {
        if (p == 0.0) return;
        if (left == 0) {
            for (int k = 0; k < 4; ++k) {
                const double tt = t + prof.burst_s[static_cast<std::size_t>(k)];
                e1 += p * z[k] * tt;
                e2 += p * z[k] * tt * tt;
            }
            return;
        }
        for (const auto& step : h) rec(left - 1, p * step.p, t + step.t);
    };
    for (int k = 0; k < w; ++k) rec(k, 1.0 / w, 0.0);
    mean = e1;
    var = e2 - e1 * e1;
}

}  // namespace

TEST_CASE("mean packet size over the burst") {
    const auto z = z_distribution({0.9, 0.8});
    CHECK(mean_packet_bits(z, 4000.0) == doctest::Approx(5521.408).epsilon(1e-12));
    CHECK(mean_packet_bits(z_distribution({1.0, 1.0}), 4000.0) == 4000.0);
}

TEST_CASE("transmission time") {
    SUBCASE("single-term evaluation") {
        PhyProfile phy;
        phy.basic_rate_bps = 1e6;
        phy.data_rate_bps = 27e6;
        phy.phy_header_bits = 0;
        phy.mac_header_bits = 0;
        phy.propagation_delay_s = 0;
        CHECK(transmission_time(phy, 27e6 * 1e-3) == doctest::Approx(1e-3).epsilon(1e-12));
    }
    SUBCASE("reference parameters, deterministic packet") {
        PhyProfile phy;  // defaults
        const double t = transmission_time(phy, 4000.0);
        CHECK(t == doctest::Approx(48e-6 + 4000.0 / 27e6).epsilon(1e-12));
        CHECK(t * 1e6 == doctest::Approx(196.148).epsilon(1e-5));
    }
}

TEST_CASE("transmission PGF") {
    SUBCASE("single copy is a point mass") {
        const auto d = pgf_transmission(z_distribution({1.0, 1.0}), 196e-6, 32e-6);
        CHECK(d.size() == 1);
        CHECK(d.mass_at(196e-6) == doctest::Approx(1.0));
    }
    SUBCASE("all four copies land at 4T+3S") {
        ZDistribution z;
        z.probs = {0.0, 0.0, 0.0, 1.0};
        const auto d = pgf_transmission(z, 200e-6, 32e-6);
        CHECK(d.size() == 1);
        CHECK(d.mass_at(896e-6) == doctest::Approx(1.0));
    }
    SUBCASE("mean equals the atom expectation") {
        const auto z = z_distribution({0.7, 0.6});
        const auto d = pgf_transmission(z, 200e-6, 32e-6);
        double expect = 0.0;
        for (int k = 1; k <= 4; ++k)
            expect += z[k - 1] * (k * 200e-6 + (k - 1) * 32e-6);
        CHECK(d.mean_s() == doctest::Approx(expect).epsilon(1e-12));
        CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("backoff step PGF") {
    const auto z1 = z_distribution({1.0, 1.0});
    SUBCASE("idle channel always") {
        const auto d = pgf_backoff_step(0.0, z1, 13e-6, 200e-6, 32e-6, 71e-6);
        CHECK(d.size() == 1);
        CHECK(d.mass_at(13e-6) == doctest::Approx(1.0));
    }
    SUBCASE("always-busy single-copy branch") {
        const auto d = pgf_backoff_step(1.0, z1, 13e-6, 200e-6, 32e-6, 71e-6);
        CHECK(d.size() == 1);
        CHECK(d.mass_at(271e-6) == doctest::Approx(1.0));
    }
    SUBCASE("half busy") {
        const auto d = pgf_backoff_step(0.5, z1, 13e-6, 200e-6, 32e-6, 71e-6);
        CHECK(d.mass_at(13e-6) == doctest::Approx(0.5));
        CHECK(d.mass_at(271e-6) == doctest::Approx(0.5));
    }
}

TEST_CASE("AC0 service PGF structure") {
    SUBCASE("window of one is the transmission distribution") {
        NetworkScenario s = small_scenario(1, 15, 31, 2, 0.9, 0.8);
        const auto d = pgf_service_ac0(s, stub_solution(0.3, 0.3, 0.1));
        const auto z = z_distribution(s.detection);
        const auto prof = make_profile(s, z);
        const auto tr = pgf_transmission(z, prof.t_tr_s, prof.sifs_s);
        REQUIRE(d.size() == tr.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            CHECK(d.atoms()[i].first == tr.atoms()[i].first);
            CHECK(d.atoms()[i].second ==
                  doctest::Approx(tr.atoms()[i].second).epsilon(1e-12));
        }
    }
    SUBCASE("two slots, idle channel") {
        NetworkScenario s = small_scenario(2, 15, 31, 2, 1.0, 1.0);
        const auto d = pgf_service_ac0(s, stub_solution(0.0, 0.0, 0.0));
        const auto prof = make_profile(s, z_distribution(s.detection));
        CHECK(d.mass_at(prof.t_tr_s) == doctest::Approx(0.5));
        CHECK(d.mass_at(prof.t_tr_s + prof.slot_s) == doctest::Approx(0.5));
    }
    SUBCASE("normalization") {
        NetworkScenario s = default_scenario();
        const auto d = pgf_service_ac0(s, stub_solution(0.4, 0.45, 0.3));
        CHECK(std::abs(d.total_mass() - 1.0) <= 1e-9);
    }
}

TEST_CASE("AC1 service PGF structure") {
    SUBCASE("collision-free equals a single stage") {
        NetworkScenario s = default_scenario();
        const auto d = pgf_service_ac1(s, stub_solution(0.2, 0.2, 0.0));
        const auto z = z_distribution(s.detection);
        const auto prof = make_profile(s, z);
        const auto tr = pgf_transmission(z, prof.t_tr_s, prof.sifs_s);
        const auto h = pgf_backoff_step(0.2, z, prof.slot_s, prof.t_tr_s,
                                        prof.sifs_s, prof.aifs_s[1]);
        const auto expect = convolve(uniform_backoff_mixture(h, 16), tr);
        REQUIRE(d.size() == expect.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK(d.atoms()[i].second ==
                  doctest::Approx(expect.atoms()[i].second).epsilon(1e-9));
    }
    SUBCASE("L = 0 splits into success and exhaustion") {
        NetworkScenario s = default_scenario();
        s.ac[1].cw_max = 15;
        s.ac[1].retry_limit = 0;
        const double pc1 = 0.3;
        const auto d = pgf_service_ac1(s, stub_solution(0.2, 0.2, pc1));
        const auto z = z_distribution(s.detection);
        const auto prof = make_profile(s, z);
        const auto tr = pgf_transmission(z, prof.t_tr_s, prof.sifs_s);
        const auto h = pgf_backoff_step(0.2, z, prof.slot_s, prof.t_tr_s,
                                        prof.sifs_s, prof.aifs_s[1]);
        const auto b = uniform_backoff_mixture(h, 16);
        auto success = convolve(b, tr);
        success.scale_mass(1.0 - pc1);
        auto exhausted = b;
        exhausted.scale_mass(pc1);
        const auto expect = mix({{1.0, success}, {1.0, exhausted}});
        // construction order shuffles which sub-1e-12 atoms get truncated;
        // compare by mass lookup
        CHECK(d.total_mass() == doctest::Approx(expect.total_mass()).epsilon(1e-9));
        for (const auto& [tick, mass] : expect.atoms()) {
            if (mass < 1e-11) continue;
            CHECK(d.mass_at(double(tick) * expect.tick_s()) ==
                  doctest::Approx(mass).epsilon(1e-9));
        }
    }
    SUBCASE("normalization with retries") {
        NetworkScenario s = default_scenario();
        const auto d = pgf_service_ac1(s, stub_solution(0.5, 0.55, 0.6));
        CHECK(std::abs(d.total_mass() - 1.0) <= 1e-9);
    }
}

TEST_CASE("moment extraction against brute-force enumeration") {
    NetworkScenario s = small_scenario(4, 3, 7, 2, 1.0, 1.0);
    double mean = 0.0, var = 0.0;
    enumerate_ac0(s, 0.3, mean, var);
    const auto d = pgf_service_ac0(s, stub_solution(0.3, 0.3, 0.1));
    const auto m = moments_from_pgf(d);
    CHECK(m.mean_s == doctest::Approx(mean).epsilon(1e-12));
    CHECK(m.stddev_s == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("closed-form moments equal the distribution route") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 8; ++t) {
        NetworkScenario s = small_scenario(1 << (1 + rng() % 3), 3, 7, 2,
                                           0.3 + 0.7 * u(rng), 0.3 + 0.7 * u(rng));
        const double pb0 = 0.8 * u(rng);
        const double pb1 = 0.8 * u(rng);
        const double pc1 = 0.9 * u(rng);
        const auto sol = stub_solution(pb0, pb1, pc1);
        const auto z = z_distribution(s.detection);
        const auto prof = make_profile(s, z);

        const auto d0 = moments_from_pgf(pgf_service_ac0(s, sol));
        const auto c0 = service_moments_ac0(s, z, prof, pb0);
        CHECK(d0.mean_s == doctest::Approx(c0.mean).epsilon(1e-10));
        CHECK(d0.stddev_s == doctest::Approx(std::sqrt(c0.var)).epsilon(1e-10));

        const auto d1 = moments_from_pgf(pgf_service_ac1(s, sol));
        const auto c1 = service_moments_ac1(s, z, prof, pb1, pc1);
        CHECK(d1.mean_s == doctest::Approx(c1.mean).epsilon(1e-10));
        CHECK(d1.stddev_s == doctest::Approx(std::sqrt(c1.var)).epsilon(1e-10));
    }
}

TEST_CASE("reliability of the shifted exponential") {
    const DelayMoments m{2e-3, 1e-3};
    const double ttr = 0.2e-3;
    CHECK(reliability(m, ttr, 0.0) == 0.0);
    CHECK(reliability(m, ttr, ttr) == 0.0);
    CHECK(reliability(m, ttr, 1.2e-3) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(reliability(m, ttr, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    double last = -1.0;
    for (int i = 0; i <= 200; ++i) {
        const double r = reliability(m, ttr, i * 1e-4);
        CHECK(r >= last);
        last = r;
    }
    const DelayMoments degenerate{2e-3, 0.0};
    CHECK(reliability(degenerate, ttr, ttr - 1e-9) == 0.0);
    CHECK(reliability(degenerate, ttr, ttr) == 1.0);
}

TEST_CASE("AC0 outranks AC1 in reliability for the default scenario") {
    NetworkScenario s = default_scenario();
    const auto sol = solve_fixed_point(s);
    const auto m0 = service_delay_ac0(s, sol);
    const auto m1 = service_delay_ac1(s, sol);
    const auto prof = make_profile(s, z_distribution(s.detection));
    for (int i = 0; i <= 40; ++i) {
        const double tau = i * 0.5e-3;
        CHECK(reliability(m0, prof.t_tr_s, tau) >=
              reliability(m1, prof.t_tr_s, tau));
    }
}
