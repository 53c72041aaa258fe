#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "bdmac/errors.hpp"

namespace bdmac {

// PHY/MAC constants of the shared channel. All times in seconds, rates in
// bits/s, header and payload sizes in bits.
struct PhyProfile {
    double basic_rate_bps = 1e6;        // R_b, carries the PHY header
    double data_rate_bps = 27e6;        // R_d, carries MAC header + payload
    double phy_header_bits = 48.0;
    double mac_header_bits = 0.0;
    double slot_time_s = 13e-6;         // sigma
    double sifs_s = 32e-6;
    double propagation_delay_s = 0.0;   // delta
    double packet_bits = 4000.0;        // P

    void validate() const;
};

enum class ArrivalKind { Saturated, Poisson, Periodic };

// Queue feed for one access category. epsilon_s == 0 selects the slot time
// as the arrival observation interval.
struct ArrivalModel {
    ArrivalKind kind = ArrivalKind::Saturated;
    double rate_pps = 0.0;   // lambda_i
    double epsilon_s = 0.0;

    void validate() const;
};

// Contention parameters of one access category.
struct AccessCategoryConfig {
    int index = 0;           // 0 = highest priority
    int aifsn = 2;
    int cw_min = 15;
    int cw_max = 15;
    int retry_limit = 0;     // L
    ArrivalModel arrival;

    // W_{i,0}: window counts slots 0..cw_min.
    int base_window() const { return cw_min + 1; }
    // M of the doubling schedule; integral by the cw invariant.
    int max_doublings() const;
    double aifs_s(const PhyProfile& phy) const {
        return phy.sifs_s + aifsn * phy.slot_time_s;
    }

    void validate() const;
};

// Per-copy receiver model: preamble detection then payload decode.
struct DetectionModel {
    double p_preamble = 0.9;  // p_d
    double p_decode = 0.8;    // p_s

    void validate() const;
};

struct NetworkScenario {
    int n_stations = 100;                        // N_cs
    PhyProfile phy;
    std::array<AccessCategoryConfig, 2> ac{};    // exactly AC0, AC1
    DetectionModel detection;

    NetworkScenario();
    void validate() const;
};

// Simulation block of the configuration document.
struct SimConfig {
    NetworkScenario scenario;
    double sim_duration_s = 10.0;
    double warmup_s = 1.0;
    std::uint64_t rng_seed = 1;
    int runs = 1;

    void validate() const;
};

// Table 1 defaults with saturated queues.
NetworkScenario default_scenario();

}  // namespace bdmac
