#include "bdmac/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bdmac {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for key '" + key + "': " + e.what());
    }
}

ArrivalKind parse_arrival_kind(const std::string& s) {
    if (s == "saturated") return ArrivalKind::Saturated;
    if (s == "poisson") return ArrivalKind::Poisson;
    if (s == "periodic") return ArrivalKind::Periodic;
    throw ConfigError("config: unknown arrival_kind '" + s + "'");
}

const char* arrival_kind_name(ArrivalKind k) {
    switch (k) {
        case ArrivalKind::Saturated: return "saturated";
        case ArrivalKind::Poisson: return "poisson";
        case ArrivalKind::Periodic: return "periodic";
    }
    return "saturated";
}

AccessCategoryConfig parse_ac(const json& j, int index,
                              const AccessCategoryConfig& defaults) {
    check_keys(j,
               {"aifsn", "cw_min", "cw_max", "retry_limit", "arrival_kind",
                "rate_pps", "epsilon_us"},
               "ac" + std::to_string(index));
    AccessCategoryConfig ac = defaults;
    ac.index = index;
    ac.aifsn = get_or(j, "aifsn", ac.aifsn);
    ac.cw_min = get_or(j, "cw_min", ac.cw_min);
    ac.cw_max = get_or(j, "cw_max", ac.cw_max);
    ac.retry_limit = get_or(j, "retry_limit", ac.retry_limit);
    if (j.contains("arrival_kind"))
        ac.arrival.kind = parse_arrival_kind(j.at("arrival_kind").get<std::string>());
    ac.arrival.rate_pps = get_or(j, "rate_pps", ac.arrival.rate_pps);
    ac.arrival.epsilon_s = get_or(j, "epsilon_us", ac.arrival.epsilon_s * 1e6) * 1e-6;
    return ac;
}

Lambda0Mapping parse_mapping(const std::string& s) {
    if (s == "linear") return Lambda0Mapping::Linear;
    if (s == "logarithmic" || s == "log") return Lambda0Mapping::Logarithmic;
    throw ConfigError("config: unknown lambda0 mapping '" + s + "'");
}

KappaMode parse_kappa_mode(const std::string& s) {
    if (s == "deterministic") return KappaMode::Deterministic;
    if (s == "sampled") return KappaMode::Sampled;
    throw ConfigError("config: unknown kappa_mode '" + s + "'");
}

}  // namespace

AppConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    check_keys(j,
               {"basic_rate_bps", "data_rate_bps", "phy_header_bits",
                "mac_header_bits", "slot_time_us", "sifs_us",
                "propagation_delay_us", "packet_bits", "n_stations",
                "p_preamble", "p_decode", "ac0", "ac1", "sim", "platoon"},
               "document root");

    AppConfig cfg;
    NetworkScenario& s = cfg.scenario;
    s.phy.basic_rate_bps = get_or(j, "basic_rate_bps", s.phy.basic_rate_bps);
    s.phy.data_rate_bps = get_or(j, "data_rate_bps", s.phy.data_rate_bps);
    s.phy.phy_header_bits = get_or(j, "phy_header_bits", s.phy.phy_header_bits);
    s.phy.mac_header_bits = get_or(j, "mac_header_bits", s.phy.mac_header_bits);
    s.phy.slot_time_s = get_or(j, "slot_time_us", s.phy.slot_time_s * 1e6) * 1e-6;
    s.phy.sifs_s = get_or(j, "sifs_us", s.phy.sifs_s * 1e6) * 1e-6;
    s.phy.propagation_delay_s =
        get_or(j, "propagation_delay_us", s.phy.propagation_delay_s * 1e6) * 1e-6;
    s.phy.packet_bits = get_or(j, "packet_bits", s.phy.packet_bits);
    s.n_stations = get_or(j, "n_stations", s.n_stations);
    s.detection.p_preamble = get_or(j, "p_preamble", s.detection.p_preamble);
    s.detection.p_decode = get_or(j, "p_decode", s.detection.p_decode);
    if (j.contains("ac0")) s.ac[0] = parse_ac(j.at("ac0"), 0, s.ac[0]);
    if (j.contains("ac1")) s.ac[1] = parse_ac(j.at("ac1"), 1, s.ac[1]);

    if (j.contains("sim")) {
        const json& js = j.at("sim");
        check_keys(js, {"duration_s", "warmup_s", "seed", "runs"}, "sim");
        cfg.duration_s = get_or(js, "duration_s", cfg.duration_s);
        cfg.warmup_s = get_or(js, "warmup_s", cfg.warmup_s);
        cfg.seed = get_or(js, "seed", cfg.seed);
        cfg.runs = get_or(js, "runs", cfg.runs);
    }

    if (j.contains("platoon")) {
        const json& jp = j.at("platoon");
        check_keys(jp,
                   {"a", "l", "v0", "y_m", "y_tilde", "n_vehicles", "tau_s",
                    "comm_range_m", "lambda1_pps", "kappa_mode", "kappa_seed",
                    "gap"},
                   "platoon");
        FvdParams& f = cfg.platoon.fvd;
        f.a = get_or(jp, "a", f.a);
        f.l = get_or(jp, "l", f.l);
        f.v0 = get_or(jp, "v0", f.v0);
        f.y_m = get_or(jp, "y_m", f.y_m);
        f.y_tilde = get_or(jp, "y_tilde", f.y_tilde);
        f.n_vehicles = get_or(jp, "n_vehicles", f.n_vehicles);
        f.tau_s = get_or(jp, "tau_s", f.tau_s);
        cfg.platoon.comm_range_m = get_or(jp, "comm_range_m", cfg.platoon.comm_range_m);
        cfg.platoon.lambda1_pps = get_or(jp, "lambda1_pps", cfg.platoon.lambda1_pps);
        if (jp.contains("kappa_mode"))
            cfg.platoon.kappa_mode =
                parse_kappa_mode(jp.at("kappa_mode").get<std::string>());
        cfg.platoon.kappa_seed = get_or(jp, "kappa_seed", cfg.platoon.kappa_seed);
        if (jp.contains("gap")) {
            const json& jg = jp.at("gap");
            check_keys(jg, {"alpha", "gamma", "eta", "mapping", "strict_form"},
                       "platoon.gap");
            GapAcceptanceModel& g = cfg.platoon.gap;
            g.alpha = get_or(jg, "alpha", g.alpha);
            g.gamma = get_or(jg, "gamma", g.gamma);
            g.eta = get_or(jg, "eta", g.eta);
            if (jg.contains("mapping"))
                g.mapping = parse_mapping(jg.at("mapping").get<std::string>());
            g.strict_form = get_or(jg, "strict_form", g.strict_form);
        }
    }

    cfg.scenario.validate();
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string dump_config(const AppConfig& cfg) {
    const NetworkScenario& s = cfg.scenario;
    json j;
    j["basic_rate_bps"] = s.phy.basic_rate_bps;
    j["data_rate_bps"] = s.phy.data_rate_bps;
    j["phy_header_bits"] = s.phy.phy_header_bits;
    j["mac_header_bits"] = s.phy.mac_header_bits;
    j["slot_time_us"] = s.phy.slot_time_s * 1e6;
    j["sifs_us"] = s.phy.sifs_s * 1e6;
    j["propagation_delay_us"] = s.phy.propagation_delay_s * 1e6;
    j["packet_bits"] = s.phy.packet_bits;
    j["n_stations"] = s.n_stations;
    j["p_preamble"] = s.detection.p_preamble;
    j["p_decode"] = s.detection.p_decode;
    for (int i = 0; i < 2; ++i) {
        json ja;
        const auto& ac = s.ac[static_cast<std::size_t>(i)];
        ja["aifsn"] = ac.aifsn;
        ja["cw_min"] = ac.cw_min;
        ja["cw_max"] = ac.cw_max;
        ja["retry_limit"] = ac.retry_limit;
        ja["arrival_kind"] = arrival_kind_name(ac.arrival.kind);
        ja["rate_pps"] = ac.arrival.rate_pps;
        if (ac.arrival.epsilon_s > 0) ja["epsilon_us"] = ac.arrival.epsilon_s * 1e6;
        j[i == 0 ? "ac0" : "ac1"] = ja;
    }
    j["sim"] = {{"duration_s", cfg.duration_s},
                {"warmup_s", cfg.warmup_s},
                {"seed", cfg.seed},
                {"runs", cfg.runs}};
    const FvdParams& f = cfg.platoon.fvd;
    json jg = {{"alpha", cfg.platoon.gap.alpha},
               {"gamma", cfg.platoon.gap.gamma},
               {"eta", cfg.platoon.gap.eta},
               {"mapping", cfg.platoon.gap.mapping == Lambda0Mapping::Linear
                               ? "linear"
                               : "logarithmic"},
               {"strict_form", cfg.platoon.gap.strict_form}};
    j["platoon"] = {{"a", f.a},
                    {"l", f.l},
                    {"v0", f.v0},
                    {"y_m", f.y_m},
                    {"y_tilde", f.y_tilde},
                    {"n_vehicles", f.n_vehicles},
                    {"tau_s", f.tau_s},
                    {"comm_range_m", cfg.platoon.comm_range_m},
                    {"lambda1_pps", cfg.platoon.lambda1_pps},
                    {"kappa_mode", cfg.platoon.kappa_mode == KappaMode::Deterministic
                                       ? "deterministic"
                                       : "sampled"},
                    {"kappa_seed", cfg.platoon.kappa_seed},
                    {"gap", jg}};
    return j.dump(2) + "\n";
}

SimConfig make_sim_config(const AppConfig& cfg) {
    SimConfig sc;
    sc.scenario = cfg.scenario;
    sc.sim_duration_s = cfg.duration_s;
    sc.warmup_s = cfg.warmup_s;
    sc.rng_seed = cfg.seed;
    sc.runs = cfg.runs;
    return sc;
}

}  // namespace bdmac
