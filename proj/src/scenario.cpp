#include "bdmac/scenario.hpp"

#include <cmath>

namespace bdmac {

void PhyProfile::validate() const {
    if (basic_rate_bps <= 0 || data_rate_bps <= 0)
        throw ConfigError("phy: rates must be positive");
    if (phy_header_bits < 0 || mac_header_bits < 0)
        throw ConfigError("phy: header sizes must be non-negative");
    if (slot_time_s <= 0) throw ConfigError("phy: slot_time must be positive");
    if (sifs_s <= 0) throw ConfigError("phy: sifs must be positive");
    if (propagation_delay_s < 0)
        throw ConfigError("phy: propagation delay must be non-negative");
    if (packet_bits <= 0) throw ConfigError("phy: packet_bits must be positive");
}

void ArrivalModel::validate() const {
    if (rate_pps < 0) throw ConfigError("arrival: rate must be non-negative");
    if (epsilon_s < 0) throw ConfigError("arrival: epsilon must be non-negative");
}

int AccessCategoryConfig::max_doublings() const {
    const double ratio = double(cw_max + 1) / double(cw_min + 1);
    return int(std::lround(std::log2(ratio)));
}

void AccessCategoryConfig::validate() const {
    if (aifsn <= 0) throw ConfigError("ac: aifsn must be positive");
    if (cw_min < 0 || cw_max < 0) throw ConfigError("ac: cw bounds must be non-negative");
    if (cw_max < cw_min) throw ConfigError("ac: cw_max must be >= cw_min");
    const double ratio = double(cw_max + 1) / double(cw_min + 1);
    const double m = std::log2(ratio);
    if (std::abs(m - std::lround(m)) > 1e-9)
        throw ConfigError("ac: (cw_max+1)/(cw_min+1) must be a power of two");
    if (retry_limit < 0) throw ConfigError("ac: retry_limit must be non-negative");
    arrival.validate();
}

void DetectionModel::validate() const {
    if (p_preamble < 0 || p_preamble > 1 || p_decode < 0 || p_decode > 1)
        throw ConfigError("detection: probabilities must be in [0,1]");
}

NetworkScenario::NetworkScenario() {
    ac[0].index = 0;
    ac[0].aifsn = 2;
    ac[0].cw_min = 15;
    ac[0].cw_max = 15;
    ac[0].retry_limit = 0;
    ac[1].index = 1;
    ac[1].aifsn = 3;
    ac[1].cw_min = 15;
    ac[1].cw_max = 31;
    ac[1].retry_limit = 2;
}

void NetworkScenario::validate() const {
    if (n_stations < 1) throw ConfigError("scenario: n_stations must be >= 1");
    phy.validate();
    detection.validate();
    if (ac[0].index != 0 || ac[1].index != 1)
        throw ConfigError("scenario: ac indices must be 0 and 1");
    if (ac[0].aifsn >= ac[1].aifsn)
        throw ConfigError("scenario: AC0 must have strictly smaller aifsn than AC1");
    for (const auto& a : ac) {
        a.validate();
        if (a.arrival.kind == ArrivalKind::Periodic) {
            const double eps = a.arrival.epsilon_s > 0 ? a.arrival.epsilon_s
                                                       : phy.slot_time_s;
            if (a.arrival.rate_pps * eps > 1.0)
                throw ConfigError("arrival: periodic rate*epsilon exceeds 1");
        }
    }
}

void SimConfig::validate() const {
    scenario.validate();
    if (warmup_s < 0 || sim_duration_s <= warmup_s)
        throw ConfigError("sim: need duration > warmup >= 0");
    if (runs < 1) throw ConfigError("sim: runs must be >= 1");
}

NetworkScenario default_scenario() { return NetworkScenario{}; }

}  // namespace bdmac
