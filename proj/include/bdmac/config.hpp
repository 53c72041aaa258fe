#pragma once

#include <cstdint>
#include <string>

#include "bdmac/platoon.hpp"
#include "bdmac/scenario.hpp"

namespace bdmac {

// Everything the CLI reads from one configuration document.
struct AppConfig {
    NetworkScenario scenario;
    double duration_s = 10.0;
    double warmup_s = 1.0;
    std::uint64_t seed = 1;
    int runs = 5;
    PlatoonSweepConfig platoon;
};

// Strict JSON parsing: unknown keys are configuration errors, messages name
// the offending key.
AppConfig config_from_json_text(const std::string& text);
AppConfig load_config(const std::string& path);

// Canonical document; re-parsing reproduces the configuration exactly.
std::string dump_config(const AppConfig& cfg);

SimConfig make_sim_config(const AppConfig& cfg);

}  // namespace bdmac
