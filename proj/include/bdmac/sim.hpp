#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bdmac/scenario.hpp"

namespace bdmac {

// Statistics of one simulation run. Delay moments accumulate via Welford;
// samples completing before the warmup cutoff are excluded.
struct SimStats {
    struct AcStats {
        long n_samples = 0;
        double mean_s = 0.0;
        double m2 = 0.0;  // sum of squared deviations
        long internal_collisions = 0;
        long external_collisions = 0;
        long drops = 0;

        double stddev_s() const;
        void add_sample(double delay_s);
    };
    std::array<AcStats, 2> ac{};
    std::array<long, 4> z_histogram{};  // copies sent per burst, all stations
    std::uint64_t seed = 0;

    long z_total() const {
        return z_histogram[0] + z_histogram[1] + z_histogram[2] + z_histogram[3];
    }
};

// Event-driven slotted EDCA with up to four blind repetitions. Stations
// share one ideal channel; backoff decrements follow the idle-slot /
// busy-burst semantics of the analytic chain.
SimStats run_simulation(const SimConfig& cfg, std::uint64_t seed);

// cfg.runs independent runs seeded seed, seed+1, ...
std::vector<SimStats> run_many(const SimConfig& cfg);

// Two runs with the same seed reproduce SimStats bit for bit.
bool replay_determinism(const SimConfig& cfg, std::uint64_t seed);

// Pooled mean/stddev over several runs (per AC, sample-weighted).
struct PooledStats {
    std::array<double, 2> mean_s{};
    std::array<double, 2> stddev_s{};
    std::array<long, 2> n_samples{};
};
PooledStats pool_stats(const std::vector<SimStats>& runs);

}  // namespace bdmac
