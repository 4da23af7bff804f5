#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "channel.hpp"
#include "errors.hpp"
#include "gains.hpp"
#include "policy.hpp"
#include "topology.hpp"

namespace uplink {

enum class SweepAxis { none, rate, load, spreading_factor, exclusion_radius };

inline const char* to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::none: return "none";
        case SweepAxis::rate: return "R";
        case SweepAxis::load: return "load";
        case SweepAxis::spreading_factor: return "G";
        case SweepAxis::exclusion_radius: return "r_bs";
    }
    return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "none") return SweepAxis::none;
    if (name == "R") return SweepAxis::rate;
    if (name == "load") return SweepAxis::load;
    if (name == "G") return SweepAxis::spreading_factor;
    if (name == "r_bs") return SweepAxis::exclusion_radius;
    throw ConfigError("unknown sweep_axis: " + name + " (expected none, R, load, G, or r_bs)");
}

/// Flat key-value experiment description. Every key can come from a JSON
/// config file, a --override key=value pair, or a CLI flag of the same name.
struct ExperimentConfig {
    int C = 50;             // base stations
    int M = 400;            // mobiles (set via `load` as round(load*C) if preferred)
    double r_net = 2.0;
    double r_bs = 0.25;
    double r_m = 0.01;
    double alpha = 3.0;     // path-loss exponent
    double sigma_s = 8.0;   // shadowing std, dB
    std::string fading = "distance_dependent";  // or "constant"
    int fading_m = 1;       // Nakagami m for constant fading
    int G = 16;             // spreading factor
    double h = 2.0 / 3.0;   // chip factor
    double snr_db = 10.0;   // Gamma in dB
    double activity_p = 1.0;
    std::vector<PolicyKind> policies{PolicyKind::OCVR};
    double zeta = 0.1;
    double rate_min = 0.01;  // bpcu
    double rate_max = 10.0;
    double rate_step = 0.01;
    int trials = 500;
    std::uint64_t seed = 1;
    SweepAxis sweep_axis = SweepAxis::none;
    std::vector<double> sweep_values;
    DeniedOutageConvention denied_outage_convention = DeniedOutageConvention::zero;
    double pc_sigma_multiplier = 1.0;  // >1 widens the intercell xi' spread
    int workers = 0;                   // 0 = hardware concurrency
    int panel_uplinks = 8;             // per-uplink curves dumped for rate sweeps
    int max_placement_attempts = 100000;

    double load() const { return static_cast<double>(M) / C; }
    bool half_loaded() const { return 2 * M == G * C; }

    TopologyParams topology_params() const {
        TopologyParams p;
        p.C = C;
        p.M = M;
        p.r_net = r_net;
        p.r_bs = r_bs;
        p.r_m = r_m;
        p.max_placement_attempts = max_placement_attempts;
        return p;
    }

    FadingModel fading_model() const {
        if (fading == "distance_dependent") return FadingModel::distance_dependent(r_bs);
        if (fading == "constant") return FadingModel::constant(fading_m);
        throw ConfigError("unknown fading mode: " + fading +
                          " (expected distance_dependent or constant)");
    }

    SpreadingParams spreading() const { return SpreadingParams{G, h}; }

    PolicySpec policy_spec(PolicyKind kind) const {
        return PolicySpec{kind, zeta, make_rate_grid(rate_min, rate_max, rate_step)};
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
        if (C < 1) fail("C must be >= 1");
        if (M < 0) fail("M must be >= 0");
        if (!(r_net > 0.0)) fail("r_net must be > 0");
        if (!(r_bs > 0.0 && r_bs < r_net)) fail("need 0 < r_bs < r_net");
        if (!(r_m > 0.0 && r_m <= r_bs)) fail("need 0 < r_m <= r_bs");
        if (!(alpha >= 2.0)) fail("alpha must be >= 2");
        if (!(sigma_s >= 0.0)) fail("sigma_s must be >= 0");
        if (fading != "distance_dependent" && fading != "constant")
            fail("fading must be distance_dependent or constant");
        if (fading_m < 1) fail("fading_m must be a positive integer");
        if (G < 1) fail("G must be >= 1");
        if (!(h > 0.0 && h <= 1.0)) fail("need 0 < h <= 1");
        if (!(activity_p >= 0.0 && activity_p <= 1.0)) fail("activity_p must be in [0,1]");
        if (policies.empty()) fail("at least one policy is required");
        if (!(zeta > 0.0 && zeta < 1.0)) fail("zeta must be in (0,1)");
        if (!(rate_min > 0.0 && rate_max >= rate_min && rate_step > 0.0))
            fail("need 0 < rate_min <= rate_max and rate_step > 0");
        if (trials < 1) fail("trials must be >= 1");
        if (workers < 0) fail("workers must be >= 0");
        if (panel_uplinks < 0) fail("panel_uplinks must be >= 0");
        if (max_placement_attempts < 1) fail("max_placement_attempts must be >= 1");
        if (sweep_axis != SweepAxis::none && sweep_values.empty())
            fail("sweep_values required when sweep_axis is set");
        if (sweep_axis == SweepAxis::none && !sweep_values.empty())
            fail("sweep_values given but sweep_axis is none");
        for (double v : sweep_values) {
            switch (sweep_axis) {
                case SweepAxis::rate:
                    if (!(v > 0.0)) fail("rate sweep values must be > 0");
                    break;
                case SweepAxis::load:
                    if (!(v > 0.0)) fail("load sweep values must be > 0");
                    break;
                case SweepAxis::spreading_factor:
                    if (!(v >= 1.0) || v != std::floor(v))
                        fail("G sweep values must be positive integers");
                    break;
                case SweepAxis::exclusion_radius:
                    if (!(v > 0.0 && v < r_net)) fail("r_bs sweep values must be in (0, r_net)");
                    if (!(r_m <= v)) fail("r_bs sweep values must be >= r_m");
                    break;
                case SweepAxis::none: break;
            }
        }
    }
};

namespace detail {

inline double to_double(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError("config key " + key + " must be a number");
    return v.get<double>();
}

inline int to_int(const nlohmann::json& v, const std::string& key) {
    const double d = to_double(v, key);
    if (d != std::floor(d)) throw ConfigError("config key " + key + " must be an integer");
    return static_cast<int>(d);
}

inline std::vector<double> to_double_list(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("config key " + key + " must be a number or array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(to_double(e, key));
    return out;
}

inline std::string to_str(const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError("config key " + key + " must be a string");
    return v.get<std::string>();
}

inline std::vector<PolicyKind> to_policies(const nlohmann::json& v, const std::string& key) {
    std::vector<PolicyKind> out;
    if (v.is_string()) {
        out.push_back(policy_from_string(v.get<std::string>()));
        return out;
    }
    if (!v.is_array()) throw ConfigError("config key " + key + " must be a string or array");
    for (const auto& e : v) out.push_back(policy_from_string(to_str(e, key)));
    return out;
}

} // namespace detail

/// Applies one key. `load` resolves to M immediately (round(load*C)), so put
/// C before load when both are given.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const nlohmann::json& value) {
    using detail::to_double;
    using detail::to_double_list;
    using detail::to_int;
    using detail::to_policies;
    using detail::to_str;
    if (key == "C") cfg.C = to_int(value, key);
    else if (key == "M") cfg.M = to_int(value, key);
    else if (key == "load") {
        const double load = to_double(value, key);
        if (!(load > 0.0)) throw ConfigError("config: load must be > 0");
        cfg.M = static_cast<int>(std::llround(load * cfg.C));
    }
    else if (key == "r_net") cfg.r_net = to_double(value, key);
    else if (key == "r_bs") cfg.r_bs = to_double(value, key);
    else if (key == "r_m") cfg.r_m = to_double(value, key);
    else if (key == "alpha") cfg.alpha = to_double(value, key);
    else if (key == "sigma_s") cfg.sigma_s = to_double(value, key);
    else if (key == "fading") cfg.fading = to_str(value, key);
    else if (key == "fading_m") cfg.fading_m = to_int(value, key);
    else if (key == "G") cfg.G = to_int(value, key);
    else if (key == "h") cfg.h = to_double(value, key);
    else if (key == "snr_db") cfg.snr_db = to_double(value, key);
    else if (key == "activity_p") cfg.activity_p = to_double(value, key);
    else if (key == "policies" || key == "policy") cfg.policies = to_policies(value, key);
    else if (key == "zeta") cfg.zeta = to_double(value, key);
    else if (key == "rate_min") cfg.rate_min = to_double(value, key);
    else if (key == "rate_max") cfg.rate_max = to_double(value, key);
    else if (key == "rate_step") cfg.rate_step = to_double(value, key);
    else if (key == "trials") cfg.trials = to_int(value, key);
    else if (key == "seed") {
        if (!value.is_number_unsigned() && !value.is_number_integer())
            throw ConfigError("config key seed must be an integer");
        cfg.seed = value.get<std::uint64_t>();
    }
    else if (key == "sweep_axis") cfg.sweep_axis = sweep_axis_from_string(to_str(value, key));
    else if (key == "sweep_values") cfg.sweep_values = to_double_list(value, key);
    else if (key == "denied_outage_convention")
        cfg.denied_outage_convention = denied_convention_from_string(to_str(value, key));
    else if (key == "pc_sigma_multiplier") cfg.pc_sigma_multiplier = to_double(value, key);
    else if (key == "workers") cfg.workers = to_int(value, key);
    else if (key == "panel_uplinks") cfg.panel_uplinks = to_int(value, key);
    else if (key == "max_placement_attempts") cfg.max_placement_attempts = to_int(value, key);
    else throw ConfigError("unknown config key: " + key);
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object of flat key-value pairs");
    ExperimentConfig cfg;
    if (j.contains("M") && j.contains("load"))
        throw ConfigError("config: give either M or load, not both");
    // C first so that `load` resolves against the configured cell count.
    if (j.contains("C")) apply_config_key(cfg, "C", j.at("C"));
    for (const auto& [key, value] : j.items()) {
        if (key == "C") continue;
        apply_config_key(cfg, key, value);
    }
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config file " + path + ": " + e.what());
    }
    return config_from_json(j);
}

/// Override value syntax: JSON scalar/array if it parses, else a comma list
/// of numbers, else a bare string.
inline nlohmann::json parse_override_value(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
    }
    if (text.find(',') != std::string::npos) {
        nlohmann::json arr = nlohmann::json::array();
        std::size_t start = 0;
        while (start <= text.size()) {
            const std::size_t comma = text.find(',', start);
            const std::string piece =
                text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            try {
                arr.push_back(nlohmann::json::parse(piece));
            } catch (const nlohmann::json::exception&) {
                arr.push_back(piece);
            }
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return arr;
    }
    return nlohmann::json(text);
}

inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like key=value: " + assignment);
    apply_config_key(cfg, assignment.substr(0, eq),
                     parse_override_value(assignment.substr(eq + 1)));
}

/// Fully resolved config as flat JSON, for run manifests and fixtures.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["C"] = cfg.C;
    j["M"] = cfg.M;
    j["r_net"] = cfg.r_net;
    j["r_bs"] = cfg.r_bs;
    j["r_m"] = cfg.r_m;
    j["alpha"] = cfg.alpha;
    j["sigma_s"] = cfg.sigma_s;
    j["fading"] = cfg.fading;
    j["fading_m"] = cfg.fading_m;
    j["G"] = cfg.G;
    j["h"] = cfg.h;
    j["snr_db"] = cfg.snr_db;
    j["activity_p"] = cfg.activity_p;
    nlohmann::json pol = nlohmann::json::array();
    for (PolicyKind k : cfg.policies) pol.push_back(to_string(k));
    j["policies"] = pol;
    j["zeta"] = cfg.zeta;
    j["rate_min"] = cfg.rate_min;
    j["rate_max"] = cfg.rate_max;
    j["rate_step"] = cfg.rate_step;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["sweep_axis"] = to_string(cfg.sweep_axis);
    j["sweep_values"] = cfg.sweep_values;
    j["denied_outage_convention"] = to_string(cfg.denied_outage_convention);
    j["pc_sigma_multiplier"] = cfg.pc_sigma_multiplier;
    j["workers"] = cfg.workers;
    j["panel_uplinks"] = cfg.panel_uplinks;
    j["max_placement_attempts"] = cfg.max_placement_attempts;
    return j;
}

} // namespace uplink
