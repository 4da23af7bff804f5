// uplinksim: Monte Carlo DS-CDMA cellular uplink simulator.
//
// Subcommands:
//   run      run one experiment from a config file (plus overrides)
//   figure   run a built-in figure preset and emit its CSV datasets
//   validate compare the closed-form outage kernel against the fading oracle

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "uplink/config.hpp"
#include "uplink/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct OverrideList {
    std::vector<std::string> items;
};

void apply_all(uplink::ExperimentConfig& cfg, const OverrideList& overrides) {
    for (const std::string& item : overrides.items) uplink::apply_override(cfg, item);
}

std::string manifest_path(const std::string& csv_path) {
    const std::string suffix = ".csv";
    if (csv_path.size() > suffix.size() &&
        csv_path.compare(csv_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return csv_path.substr(0, csv_path.size() - suffix.size()) + ".manifest.json";
    return csv_path + ".manifest.json";
}

void emit_result(const uplink::AggregateResult& result, const std::string& out_path) {
    uplink::emit_csv(result, out_path);
    uplink::write_manifest(result.config, manifest_path(out_path));
    std::cerr << "wrote " << out_path;
    if (!result.panel.empty()) std::cerr << " and " << uplink::panel_sibling_path(out_path);
    std::cerr << "\n";
}

// Registers --<key> flags mirroring every config key, all funneled into the
// override list. Precedence: config file, then --override pairs, then these
// flags (option callbacks fire in registration order, not token order).
void add_config_flags(CLI::App* cmd, OverrideList& overrides) {
    cmd->set_help_flag("--help", "print help");  // frees -h / --h for the chip factor
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"C", "base station count"},
        {"M", "mobile count"},
        {"load", "mobiles per cell; sets M = round(load*C)"},
        {"r_net", "network disk radius"},
        {"r_bs", "base-station exclusion radius"},
        {"r_m", "mobile exclusion radius"},
        {"alpha", "path-loss exponent"},
        {"sigma_s", "shadowing std in dB"},
        {"fading", "distance_dependent or constant"},
        {"fading_m", "Nakagami m for constant fading"},
        {"G", "spreading factor"},
        {"h", "chip factor"},
        {"snr_db", "SNR Gamma in dB"},
        {"activity_p", "interferer activity probability"},
        {"policies", "comma list of MTFR,OCFR,MTVR,OCVR"},
        {"zeta", "outage constraint"},
        {"rate_min", "rate grid start (bpcu)"},
        {"rate_max", "rate grid end (bpcu)"},
        {"rate_step", "rate grid step (bpcu)"},
        {"trials", "Monte Carlo realizations"},
        {"seed", "base RNG seed"},
        {"sweep_axis", "none, R, load, G, or r_bs"},
        {"sweep_values", "comma list of sweep values"},
        {"denied_outage_convention", "zero or one"},
        {"pc_sigma_multiplier", "imperfect power control spread factor"},
        {"workers", "worker threads (0 = hardware)"},
        {"panel_uplinks", "uplinks dumped per rate sweep"},
        {"max_placement_attempts", "redraw cap per point"},
    };
    for (const auto& [key, help] : keys) {
        cmd->add_option_function<std::string>(
            "--" + key,
            [key, &overrides](const std::string& value) {
                overrides.items.push_back(key + "=" + value);
            },
            help);
    }
}

int run_command(const std::string& config_path, const OverrideList& overrides,
                const std::string& out_path) {
    uplink::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = uplink::load_config_file(config_path);
    apply_all(cfg, overrides);
    cfg.validate();
    const uplink::AggregateResult result = uplink::run_experiment(cfg);
    if (out_path.empty()) {
        std::cout << uplink::csv_string(result);
    } else {
        emit_result(result, out_path);
    }
    return kExitOk;
}

int figure_command(const std::string& name, const std::string& out_dir,
                   const OverrideList& overrides) {
    std::filesystem::create_directories(out_dir);
    for (const uplink::FigureExperiment& exp : uplink::figure_experiments(name)) {
        uplink::ExperimentConfig cfg = exp.config;
        apply_all(cfg, overrides);
        cfg.validate();
        const uplink::AggregateResult result = uplink::run_experiment(cfg);
        emit_result(result, out_dir + "/" + exp.stem + ".csv");
    }
    return kExitOk;
}

int validate_command(int cases, std::int64_t draws, std::uint64_t seed, int workers) {
    const uplink::ValidationReport report =
        uplink::run_oracle_validation(cases, draws, seed, workers);
    for (const std::string& line : report.mismatches) std::cout << "  mismatch " << line << "\n";
    std::cout << (report.pass ? "[PASS]" : "[FAIL]") << " closed form vs fading oracle: "
              << report.within << "/" << report.cases
              << " cases within 4 standard errors (need >= " << report.required << ")\n";
    return report.pass ? kExitOk : kExitNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DS-CDMA cellular uplink Monte Carlo simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    std::string config_path, out_path;
    OverrideList run_overrides;
    run->add_option("--config", config_path, "JSON config file (flat key-value)");
    run->add_option("--out", out_path, "output CSV path (stdout when omitted)");
    run->add_option("--override", run_overrides.items, "key=value config override")
        ->take_all();
    add_config_flags(run, run_overrides);

    auto* figure = app.add_subcommand("figure", "reproduce a figure dataset (fig2..fig6)");
    std::string figure_name, figure_out;
    OverrideList figure_overrides;
    figure->add_option("name", figure_name, "fig2, fig3, fig4, fig5, or fig6")->required();
    figure->add_option("--out", figure_out, "output directory")->required();
    figure->add_option("--override", figure_overrides.items, "key=value config override")
        ->take_all();
    add_config_flags(figure, figure_overrides);

    auto* validate = app.add_subcommand("validate", "closed form vs fading oracle check");
    int cases = 100;
    std::int64_t draws = 1000000;
    std::uint64_t vseed = 7;
    int vworkers = 0;
    validate->add_option("--cases", cases, "number of random link environments");
    validate->add_option("--draws", draws, "oracle draws per case");
    validate->add_option("--seed", vseed, "RNG seed");
    validate->add_option("--workers", vworkers, "worker threads (0 = hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return run_command(config_path, run_overrides, out_path);
        if (figure->parsed()) return figure_command(figure_name, figure_out, figure_overrides);
        return validate_command(cases, draws, vseed, vworkers);
    } catch (const uplink::PlacementInfeasible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const uplink::NumericalInstability& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
