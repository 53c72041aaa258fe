#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bdmac/errors.hpp"

namespace bdmac {

struct DelayMoments {
    double mean_s = 0.0;
    double stddev_s = 0.0;
};

// Finite discrete distribution on a quantized time grid. This is the
// concrete realization of the service-time PGFs: atoms are integer ticks,
// convolution and mixture are exact on the grid, and the k-th PMF value is
// a direct lookup.
class DiscreteTimeDistribution {
public:
    static constexpr double kDefaultTick = 1e-6;

    DiscreteTimeDistribution() = default;

    // Single atom of mass 1 at time t (snapped to the grid).
    static DiscreteTimeDistribution delta(double t_s, double tick_s = kDefaultTick);
    // Atoms given as (time_s, probability); duplicates accumulate.
    static DiscreteTimeDistribution from_atoms(
        const std::vector<std::pair<double, double>>& atoms,
        double tick_s = kDefaultTick);

    double tick_s() const { return tick_; }
    const std::vector<std::pair<std::int64_t, double>>& atoms() const { return atoms_; }
    bool empty() const { return atoms_.empty(); }
    std::size_t size() const { return atoms_.size(); }

    // Mass removed by convolution truncation, accumulated over the
    // distribution's construction history.
    double dropped_mass() const { return dropped_; }

    double total_mass() const;
    double mean_s() const;
    double variance_s2() const;

    // Exact PMF lookup; t must lie on the grid.
    double mass_at(double t_s) const;

    void scale_mass(double factor);

private:
    friend DiscreteTimeDistribution convolve(const DiscreteTimeDistribution&,
                                             const DiscreteTimeDistribution&);
    friend DiscreteTimeDistribution mix(
        const std::vector<std::pair<double, DiscreteTimeDistribution>>&);
    friend DiscreteTimeDistribution uniform_backoff_mixture(
        const DiscreteTimeDistribution&, int);

    double tick_ = kDefaultTick;
    double dropped_ = 0.0;
    std::vector<std::pair<std::int64_t, double>> atoms_;  // sorted by tick
};

// Exact convolution on the shared grid; atoms whose sorted cumulative mass
// stays below the truncation budget (1e-15) are dropped and recorded.
DiscreteTimeDistribution convolve(const DiscreteTimeDistribution& a,
                                  const DiscreteTimeDistribution& b);

// Weighted mixture; weights need not sum to one (sub-distributions are a
// valid intermediate, e.g. the branches of the retry chain).
DiscreteTimeDistribution mix(
    const std::vector<std::pair<double, DiscreteTimeDistribution>>& parts);

// (1/W) sum_{k=0}^{W-1} H^k  -- uniform backoff draw over a window of W slots.
DiscreteTimeDistribution uniform_backoff_mixture(const DiscreteTimeDistribution& h,
                                                 int window);

// Mean and standard deviation of a normalized distribution.
DelayMoments moments_from_pgf(const DiscreteTimeDistribution& dist);

// Stored mass at time k (0 if no atom); k must lie on the grid.
double pmf_from_pgf(const DiscreteTimeDistribution& dist, double k_s);

}  // namespace bdmac
