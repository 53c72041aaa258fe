#include <cmath>
#include <random>

#include <doctest.h>

#include "bdmac/dist.hpp"

using namespace bdmac;

namespace {

DiscreteTimeDistribution random_dist(std::mt19937_64& rng, int max_atoms = 8) {
    std::uniform_int_distribution<int> n_atoms(1, max_atoms);
    std::uniform_int_distribution<int> tick(0, 2000);
    std::uniform_real_distribution<double> mass(0.01, 1.0);
    std::vector<std::pair<double, double>> atoms;
    const int n = n_atoms(rng);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        atoms.emplace_back(tick(rng) * 1e-6, mass(rng));
        total += atoms.back().second;
    }
    for (auto& a : atoms) a.second /= total;
    return DiscreteTimeDistribution::from_atoms(atoms);
}

// independent second implementation: variance as the pairwise double loop
// (1/2) sum_i sum_j p_i p_j (t_i - t_j)^2
double pairwise_variance(const DiscreteTimeDistribution& d) {
    double v = 0.0;
    for (const auto& [ti, pi] : d.atoms())
        for (const auto& [tj, pj] : d.atoms()) {
            const double dt = double(ti - tj) * d.tick_s();
            v += pi * pj * dt * dt;
        }
    return 0.5 * v;
}

double loop_mean(const DiscreteTimeDistribution& d) {
    double m = 0.0;
    for (const auto& [t, p] : d.atoms()) m += double(t) * d.tick_s() * p;
    return m;
}

}  // namespace

TEST_CASE("delta and atom merging") {
    const auto d = DiscreteTimeDistribution::delta(5e-3);
    CHECK(d.size() == 1);
    CHECK(d.mass_at(5e-3) == doctest::Approx(1.0));
    CHECK(d.mass_at(4e-3) == 0.0);

    const auto m = DiscreteTimeDistribution::from_atoms(
        {{1e-6, 0.25}, {1e-6, 0.25}, {2e-6, 0.5}});
    CHECK(m.size() == 2);
    CHECK(m.mass_at(1e-6) == doctest::Approx(0.5));
}

TEST_CASE("pmf lookup demands the grid") {
    const auto d = DiscreteTimeDistribution::from_atoms({{1e-3, 0.5}, {3e-3, 0.5}});
    CHECK(pmf_from_pgf(d, 1e-3) == doctest::Approx(0.5));
    CHECK(pmf_from_pgf(d, 2e-3) == 0.0);  // on grid, no atom
    CHECK_THROWS_AS((void)pmf_from_pgf(d, 1.5e-7), DomainError);
}

TEST_CASE("convolution adds means and multiplies mass") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_dist(rng);
        const auto b = random_dist(rng);
        const auto c = convolve(a, b);
        CHECK(c.total_mass() ==
              doctest::Approx(a.total_mass() * b.total_mass()).epsilon(1e-9));
        CHECK(c.mean_s() == doctest::Approx(a.mean_s() + b.mean_s()).epsilon(1e-12));
        CHECK(c.variance_s2() ==
              doctest::Approx(a.variance_s2() + b.variance_s2()).epsilon(1e-9));
    }
}

TEST_CASE("moment extraction matches the naive double loop") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = random_dist(rng, 12);
        const auto m = moments_from_pgf(d);
        CHECK(m.mean_s == doctest::Approx(loop_mean(d)).epsilon(1e-12));
        CHECK(m.stddev_s * m.stddev_s ==
              doctest::Approx(pairwise_variance(d)).epsilon(1e-11));
    }
}

TEST_CASE("moments of simple distributions") {
    const auto point = DiscreteTimeDistribution::delta(5e-3);
    const auto mp = moments_from_pgf(point);
    CHECK(mp.mean_s == doctest::Approx(5e-3));
    CHECK(mp.stddev_s == doctest::Approx(0.0));

    const auto two = DiscreteTimeDistribution::from_atoms({{1e-3, 0.5}, {3e-3, 0.5}});
    const auto mt = moments_from_pgf(two);
    CHECK(mt.mean_s == doctest::Approx(2e-3).epsilon(1e-12));
    CHECK(mt.stddev_s == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("moments reject unnormalized input") {
    auto d = DiscreteTimeDistribution::from_atoms({{1e-3, 0.4}});
    CHECK_THROWS_AS((void)moments_from_pgf(d), NumericError);
}

TEST_CASE("uniform backoff mixture") {
    const auto h = DiscreteTimeDistribution::delta(13e-6);
    const auto w1 = uniform_backoff_mixture(h, 1);
    CHECK(w1.size() == 1);
    CHECK(w1.mass_at(0.0) == doctest::Approx(1.0));

    const auto w2 = uniform_backoff_mixture(h, 2);
    CHECK(w2.mass_at(0.0) == doctest::Approx(0.5));
    CHECK(w2.mass_at(13e-6) == doctest::Approx(0.5));

    const auto w16 = uniform_backoff_mixture(h, 16);
    CHECK(w16.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w16.mean_s() == doctest::Approx(7.5 * 13e-6).epsilon(1e-12));
}

TEST_CASE("convolution truncation records dropped mass") {
    std::vector<std::pair<double, double>> atoms{{0.0, 1.0 - 8e-16}};
    for (int i = 1; i <= 4; ++i) atoms.emplace_back(i * 1e-6, 2e-16);
    const auto a = DiscreteTimeDistribution::from_atoms(atoms);
    const auto b = DiscreteTimeDistribution::delta(1e-6);
    const auto c = convolve(a, b);
    CHECK(c.dropped_mass() > 0.0);
    CHECK(c.dropped_mass() <= 1e-15);
    CHECK(c.total_mass() + c.dropped_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mixture combines weights and grids") {
    const auto a = DiscreteTimeDistribution::delta(1e-6);
    const auto b = DiscreteTimeDistribution::delta(2e-6);
    const auto m = mix({{0.25, a}, {0.75, b}});
    CHECK(m.mass_at(1e-6) == doctest::Approx(0.25));
    CHECK(m.mass_at(2e-6) == doctest::Approx(0.75));
    CHECK_THROWS_AS((void)mix({{-0.1, a}}), DomainError);
}

TEST_CASE("builders reject invalid atoms") {
    CHECK_THROWS_AS((void)DiscreteTimeDistribution::from_atoms({{-1e-6, 1.0}}),
                    DomainError);
    CHECK_THROWS_AS((void)DiscreteTimeDistribution::from_atoms({{1e-6, -0.5}}),
                    DomainError);
    CHECK_THROWS_AS((void)DiscreteTimeDistribution::from_atoms({{1e-6, 1.0}}, 0.0),
                    DomainError);
}
