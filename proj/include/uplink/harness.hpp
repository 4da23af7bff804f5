#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "gains.hpp"
#include "outage.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "topology.hpp"

namespace uplink {

/// Runs body(0..jobs-1) on up to `workers` threads. Deterministic with
/// respect to worker count as long as jobs do not share mutable state; if
/// several jobs throw, the lowest job index wins.
inline void parallel_for(int jobs, int workers, const std::function<void(int)>& body) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers > jobs) workers = jobs;
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex error_mutex;
    int error_index = jobs;
    std::exception_ptr error;
    auto worker = [&] {
        for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// One fully built network draw: geometry, shadowing, association, admission,
/// and the link environment of every admitted uplink.
struct Realization {
    Topology topology;
    ShadowField shadow;
    std::vector<SectorId> serving;
    std::vector<bool> served;
    std::vector<int> denied;  // ascending mobile indices
    std::vector<AdmittedUplink> uplinks;
};

/// Pipeline for one trial: draw the topology, draw shadowing, associate
/// mobiles with sectors, deny the highest-index overflow mobiles in any
/// sector holding more than G, then apply power control to every admitted
/// uplink. The random streams depend only on (seed, trial_index).
inline Realization build_realization(const ExperimentConfig& cfg, std::uint64_t trial_index) {
    Realization real;
    {
        auto stream = make_stream(cfg.seed, trial_index, RngStage::topology);
        real.topology = generate_topology(cfg.topology_params(), stream);
    }
    {
        auto stream = make_stream(cfg.seed, trial_index, RngStage::shadowing);
        real.shadow = draw_shadowing(cfg.M, cfg.C, cfg.sigma_s, stream);
    }
    real.serving = associate(real.topology, real.shadow, cfg.alpha);

    // Admission: a sector serves at most G mobiles; the "last" (highest
    // placement index) overflow mobiles are denied and stay silent.
    real.served.assign(cfg.M, true);
    std::vector<std::vector<int>> sector_members(static_cast<std::size_t>(3) * cfg.C);
    for (int i = 0; i < cfg.M; ++i) sector_members[real.serving[i].flat()].push_back(i);
    for (const auto& members : sector_members) {
        for (std::size_t pos = cfg.G; pos < members.size(); ++pos) {
            real.served[members[pos]] = false;
            real.denied.push_back(members[pos]);
        }
    }
    std::sort(real.denied.begin(), real.denied.end());

    const FadingModel fading = cfg.fading_model();
    const SpreadingParams spreading = cfg.spreading();
    real.uplinks.reserve(cfg.M - real.denied.size());
    for (int r = 0; r < cfg.M; ++r) {
        if (!real.served[r]) continue;
        AdmittedUplink up;
        up.mobile = r;
        up.env = build_link_environment(real.topology, real.shadow, real.serving, fading,
                                        spreading, cfg.alpha, cfg.snr_db, cfg.activity_p, r,
                                        real.served, cfg.pc_sigma_multiplier);
        up.m0 = nakagami_m(fading, distance(real.topology.bs_positions[real.serving[r].bs_index],
                                            real.topology.mobile_positions[r]));
        real.uplinks.push_back(std::move(up));
    }
    return real;
}

inline NetworkStats run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index,
                              const PolicySpec& spec) {
    const Realization real = build_realization(cfg, trial_index);
    return apply_policy(real.uplinks, spec, cfg.M, real.denied, cfg.r_net,
                        cfg.denied_outage_convention);
}

/// Full single-trial pipeline with the first configured policy.
inline NetworkStats run_trial(const ExperimentConfig& cfg, std::uint64_t trial_index) {
    cfg.validate();
    return run_trial(cfg, trial_index, cfg.policy_spec(cfg.policies.front()));
}

struct SweepPointStats {
    double sweep_value = 0.0;
    PolicyKind policy = PolicyKind::MTFR;
    double mean_outage = 0.0, se_outage = 0.0;
    double mean_throughput = 0.0, se_throughput = 0.0;
    double tau = 0.0, se_tau = 0.0;
    int trials = 0;
};

struct PanelSample {
    int uplink = -1;
    double rate = 0.0;
    double outage = 0.0;
    double throughput = 0.0;
};

struct AggregateResult {
    ExperimentConfig config;             // resolved
    std::vector<SweepPointStats> rows;   // sweep-value major, policy minor
    std::vector<PanelSample> panel;      // rate sweeps only, from trial 0
};

namespace detail {

struct TrialMetrics {
    double mean_outage = 0.0;
    double mean_throughput = 0.0;
    double tau = 0.0;
};

inline ExperimentConfig point_config(const ExperimentConfig& cfg, double value) {
    ExperimentConfig out = cfg;
    switch (cfg.sweep_axis) {
        case SweepAxis::none:
        case SweepAxis::rate:
            break;
        case SweepAxis::load:
            out.M = static_cast<int>(std::llround(value * cfg.C));
            break;
        case SweepAxis::spreading_factor:
            out.G = static_cast<int>(std::llround(value));
            break;
        case SweepAxis::exclusion_radius:
            out.r_bs = value;  // the distance-dependent fading bands follow
            break;
    }
    return out;
}

inline std::vector<int> pick_panel(const Realization& real, int count, std::uint64_t seed) {
    std::vector<int> pool;
    pool.reserve(real.uplinks.size());
    for (const AdmittedUplink& up : real.uplinks) pool.push_back(up.mobile);
    auto stream = make_stream(seed, 0, RngStage::panel);
    std::vector<int> picked;
    const int want = std::min<int>(count, static_cast<int>(pool.size()));
    for (int k = 0; k < want; ++k) {
        std::uniform_int_distribution<int> pick(k, static_cast<int>(pool.size()) - 1);
        std::swap(pool[k], pool[pick(stream)]);
        picked.push_back(pool[k]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

} // namespace detail

/// Monte Carlo over independent network realizations: `trials` trials per
/// sweep point, all policies evaluated on the same realization. Rate sweeps
/// reuse one realization per trial across all rate points and additionally
/// record the per-uplink panel curves from trial 0.
inline AggregateResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<double> sweep_values =
        cfg.sweep_axis == SweepAxis::none ? std::vector<double>{0.0} : cfg.sweep_values;
    const int points = static_cast<int>(sweep_values.size());
    const int n_policies = static_cast<int>(cfg.policies.size());

    // trial-major storage: metrics[trial][point][policy]
    std::vector<std::vector<std::vector<detail::TrialMetrics>>> metrics(cfg.trials);
    std::vector<PanelSample> panel;
    std::mutex panel_mutex;

    auto run_one_trial = [&](int trial) {
        auto& per_point = metrics[trial];
        per_point.resize(points);
        if (cfg.sweep_axis == SweepAxis::rate) {
            const Realization real = build_realization(cfg, trial);
            for (int p = 0; p < points; ++p) {
                std::vector<PolicySpec> specs;
                specs.reserve(n_policies);
                for (PolicyKind kind : cfg.policies)
                    specs.push_back(PolicySpec{kind, cfg.zeta, {sweep_values[p]}});
                const auto stats = apply_policies(real.uplinks, specs, cfg.M, real.denied,
                                                  cfg.r_net, cfg.denied_outage_convention);
                per_point[p].resize(n_policies);
                for (int q = 0; q < n_policies; ++q)
                    per_point[p][q] = {stats[q].mean_outage, stats[q].mean_throughput,
                                       stats[q].transmission_capacity};
            }
            if (trial == 0 && cfg.panel_uplinks > 0) {
                std::vector<PanelSample> local;
                const std::vector<int> chosen = detail::pick_panel(real, cfg.panel_uplinks, cfg.seed);
                for (const AdmittedUplink& up : real.uplinks) {
                    if (std::find(chosen.begin(), chosen.end(), up.mobile) == chosen.end())
                        continue;
                    for (double rate : sweep_values) {
                        const UplinkOutcome o = evaluate_uplink(up.env, up.m0, rate);
                        local.push_back(PanelSample{up.mobile, rate, o.outage, o.throughput});
                    }
                }
                std::lock_guard<std::mutex> lock(panel_mutex);
                panel = std::move(local);
            }
        } else {
            for (int p = 0; p < points; ++p) {
                const ExperimentConfig pt = detail::point_config(cfg, sweep_values[p]);
                const Realization real = build_realization(pt, trial);
                std::vector<PolicySpec> specs;
                specs.reserve(n_policies);
                for (PolicyKind kind : pt.policies) specs.push_back(pt.policy_spec(kind));
                const auto stats = apply_policies(real.uplinks, specs, pt.M, real.denied,
                                                  pt.r_net, pt.denied_outage_convention);
                per_point[p].resize(n_policies);
                for (int q = 0; q < n_policies; ++q)
                    per_point[p][q] = {stats[q].mean_outage, stats[q].mean_throughput,
                                       stats[q].transmission_capacity};
            }
        }
    };

    // A failing trial aborts the run and names the trial; with several
    // failures the lowest trial index wins, independent of scheduling.
    parallel_for(cfg.trials, cfg.workers, [&](int trial) {
        try {
            run_one_trial(trial);
        } catch (const PlacementInfeasible& e) {
            throw PlacementInfeasible("trial " + std::to_string(trial) + ": " + e.what());
        }
    });

    AggregateResult result;
    result.config = cfg;
    result.panel = std::move(panel);
    result.rows.reserve(static_cast<std::size_t>(points) * n_policies);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int p = 0; p < points; ++p) {
        for (int q = 0; q < n_policies; ++q) {
            SweepPointStats row;
            row.sweep_value = sweep_values[p];
            row.policy = cfg.policies[q];
            row.trials = cfg.trials;
            double sum_e = 0.0, sum_t = 0.0, sum_tau = 0.0;
            for (int trial = 0; trial < cfg.trials; ++trial) {
                sum_e += metrics[trial][p][q].mean_outage;
                sum_t += metrics[trial][p][q].mean_throughput;
                sum_tau += metrics[trial][p][q].tau;
            }
            const double n = cfg.trials;
            row.mean_outage = sum_e / n;
            row.mean_throughput = sum_t / n;
            row.tau = sum_tau / n;
            if (cfg.trials > 1) {
                double var_e = 0.0, var_t = 0.0, var_tau = 0.0;
                for (int trial = 0; trial < cfg.trials; ++trial) {
                    const auto& m = metrics[trial][p][q];
                    var_e += (m.mean_outage - row.mean_outage) * (m.mean_outage - row.mean_outage);
                    var_t += (m.mean_throughput - row.mean_throughput) *
                             (m.mean_throughput - row.mean_throughput);
                    var_tau += (m.tau - row.tau) * (m.tau - row.tau);
                }
                row.se_outage = std::sqrt(var_e / (n - 1.0) / n);
                row.se_throughput = std::sqrt(var_t / (n - 1.0) / n);
                row.se_tau = std::sqrt(var_tau / (n - 1.0) / n);
            } else {
                row.se_outage = row.se_throughput = row.se_tau = nan;  // not applicable
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

// --- CSV / manifest emission ---

namespace detail {

inline std::string g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace detail

inline std::string csv_string(const AggregateResult& result) {
    std::string out =
        "sweep_axis,sweep_value,policy,mean_outage,se_outage,mean_throughput,se_throughput,"
        "tau,se_tau,trials,seed\n";
    const char* axis = to_string(result.config.sweep_axis);
    for (const SweepPointStats& row : result.rows) {
        out += axis;
        out += ',';
        out += detail::g9(row.sweep_value);
        out += ',';
        out += to_string(row.policy);
        out += ',';
        out += detail::g9(row.mean_outage);
        out += ',';
        out += detail::g9(row.se_outage);
        out += ',';
        out += detail::g9(row.mean_throughput);
        out += ',';
        out += detail::g9(row.se_throughput);
        out += ',';
        out += detail::g9(row.tau);
        out += ',';
        out += detail::g9(row.se_tau);
        out += ',';
        out += std::to_string(row.trials);
        out += ',';
        out += std::to_string(result.config.seed);
        out += '\n';
    }
    return out;
}

inline std::string panel_csv_string(const AggregateResult& result) {
    std::string out = "uplink_id,R,epsilon,throughput\n";
    for (const PanelSample& s : result.panel) {
        out += std::to_string(s.uplink);
        out += ',';
        out += detail::g9(s.rate);
        out += ',';
        out += detail::g9(s.outage);
        out += ',';
        out += detail::g9(s.throughput);
        out += '\n';
    }
    return out;
}

inline std::string panel_sibling_path(const std::string& path) {
    const std::string suffix = ".csv";
    if (path.size() > suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size()) + "_uplinks.csv";
    return path + "_uplinks.csv";
}

/// Writes the aggregate CSV; per-uplink panel samples, when present, go to a
/// sibling file `<stem>_uplinks.csv`. Emission is byte-reproducible.
inline void emit_csv(const AggregateResult& result, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("emit_csv: cannot open for writing: " + path);
        out << csv_string(result);
        if (!out) throw Error("emit_csv: write failed: " + path);
    }
    if (!result.panel.empty()) {
        const std::string sibling = panel_sibling_path(path);
        std::ofstream out(sibling, std::ios::binary);
        if (!out) throw Error("emit_csv: cannot open for writing: " + sibling);
        out << panel_csv_string(result);
        if (!out) throw Error("emit_csv: write failed: " + sibling);
    }
}

/// Run manifest: the fully resolved config plus derived labels, for
/// provenance next to each result file.
inline nlohmann::json manifest_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["seed"] = cfg.seed;
    j["load"] = cfg.load();
    if (cfg.half_loaded()) j["load_label"] = "half loaded";
    return j;
}

inline void write_manifest(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write_manifest: cannot open for writing: " + path);
    out << manifest_json(cfg).dump(2) << '\n';
}

// --- Figure presets ---

struct FigureExperiment {
    std::string stem;
    ExperimentConfig config;
};

/// Built-in experiment presets reproducing the reference figures; the same
/// presets ship as config files under configs/.
inline std::vector<FigureExperiment> figure_experiments(const std::string& name) {
    ExperimentConfig base;  // defaults already carry the canonical parameter set
    base.policies = {PolicyKind::MTFR, PolicyKind::OCFR, PolicyKind::MTVR, PolicyKind::OCVR};
    base.trials = 500;
    base.seed = 1;

    if (name == "fig2" || name == "fig3") {
        // Per-uplink and average outage (fig2) / throughput (fig3) versus a
        // common fixed rate, half-loaded network.
        ExperimentConfig cfg = base;
        cfg.policies = {PolicyKind::MTFR};
        cfg.sweep_axis = SweepAxis::rate;
        cfg.sweep_values = make_rate_grid(0.1, 4.0, 0.02);
        return {{name, cfg}};
    }
    if (name == "fig4") {
        // Transmission capacity of the four policies versus load, shadowed
        // and unshadowed.
        ExperimentConfig shadowed = base;
        shadowed.sweep_axis = SweepAxis::load;
        shadowed.sweep_values = {1, 2, 4, 8, 16};
        ExperimentConfig unshadowed = shadowed;
        unshadowed.sigma_s = 0.0;
        return {{"fig4_shadowed", shadowed}, {"fig4_unshadowed", unshadowed}};
    }
    if (name == "fig5") {
        // Transmission capacity versus spreading factor at two loads.
        ExperimentConfig load8 = base;
        load8.sweep_axis = SweepAxis::spreading_factor;
        load8.sweep_values = {8, 16, 32, 64};
        load8.M = 400;
        ExperimentConfig load16 = load8;
        load16.M = 800;
        return {{"fig5_load8", load8}, {"fig5_load16", load16}};
    }
    if (name == "fig6") {
        // Transmission capacity versus base-station exclusion radius for two
        // path-loss exponents.
        ExperimentConfig a3 = base;
        a3.sweep_axis = SweepAxis::exclusion_radius;
        a3.sweep_values = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
        ExperimentConfig a35 = a3;
        a35.alpha = 3.5;
        return {{"fig6_alpha3", a3}, {"fig6_alpha35", a35}};
    }
    throw ConfigError("unknown figure: " + name + " (expected fig2..fig6)");
}

// --- Closed form vs oracle validation ---

struct ValidationReport {
    int cases = 0;
    int within = 0;           // cases with |closed - oracle| <= 4 SE
    int required = 0;         // pass threshold (95%)
    bool pass = false;
    std::vector<std::string> mismatches;
};

/// Draws random link environments and compares the closed-form outage with
/// the brute-force fading oracle. Passes when at least 95% of cases agree
/// within four binomial standard errors.
inline ValidationReport run_oracle_validation(int cases, std::int64_t draws, std::uint64_t seed,
                                              int workers = 0) {
    if (cases < 1) throw DomainError("run_oracle_validation: cases must be >= 1");
    struct CaseResult {
        double closed = 0.0;
        OracleEstimate est;
        bool within = false;
        std::string what;
    };
    std::vector<CaseResult> results(cases);

    parallel_for(cases, workers, [&](int c) {
        auto stream = make_stream(seed, c, RngStage::oracle);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto log_uniform = [&](double lo, double hi) {
            return lo * std::pow(hi / lo, unit(stream));
        };
        std::uniform_int_distribution<int> m_pick(1, 3);
        std::uniform_int_distribution<int> n_pick(1, 5);

        LinkEnvironment env;
        env.reference_mobile = 0;
        env.omega_ref = log_uniform(1e-3, 1e1);
        env.snr = db_to_linear(unit(stream) < 0.5 ? 3.0 : 10.0);
        const int n = n_pick(stream);
        for (int i = 0; i < n; ++i) {
            Interferer f;
            f.omega = log_uniform(1e-3, 1e1);
            f.m = m_pick(stream);
            f.p = unit(stream) < 0.5 ? 0.5 : 1.0;
            env.interferers.push_back(f);
        }
        const int m0 = m_pick(stream);
        const double beta = log_uniform(0.1, 10.0);

        CaseResult r;
        r.closed = outage_probability(env, beta, m0);
        r.est = outage_probability_oracle(env, beta, m0, draws, stream);
        r.within = oracle_agrees(r.closed, r.est, draws);
        if (!r.within) {
            std::ostringstream oss;
            oss << "case " << c << ": closed=" << r.closed << " oracle=" << r.est.probability
                << " se=" << r.est.std_error << " (m0=" << m0 << ", beta=" << beta
                << ", interferers=" << n << ")";
            r.what = oss.str();
        }
        results[c] = std::move(r);
    });

    ValidationReport report;
    report.cases = cases;
    report.required = (cases * 95 + 99) / 100;
    for (const CaseResult& r : results) {
        if (r.within)
            ++report.within;
        else
            report.mismatches.push_back(r.what);
    }
    report.pass = report.within >= report.required;
    return report;
}

} // namespace uplink
