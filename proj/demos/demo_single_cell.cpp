// Walks the full pipeline on a one-cell network: realization, power control,
// closed-form outage versus the fading oracle, and OCVR rate selection.

#include <iostream>

#include "uplink/harness.hpp"

int main() {
    uplink::ExperimentConfig cfg;
    cfg.C = 1;
    cfg.M = 8;
    cfg.trials = 1;
    cfg.seed = 42;
    cfg.policies = {uplink::PolicyKind::OCVR};

    const uplink::Realization real = uplink::build_realization(cfg, 0);
    std::cout << "admitted uplinks: " << real.uplinks.size() << "\n";

    const uplink::AdmittedUplink& up = real.uplinks.front();
    const double beta = uplink::rate_to_threshold(1.0);
    const double closed = uplink::outage_probability(up.env, beta, up.m0);
    auto oracle_stream = uplink::make_stream(cfg.seed, 0, uplink::RngStage::oracle);
    const auto oracle = uplink::outage_probability_oracle(up.env, beta, up.m0, 200000, oracle_stream);
    std::cout << "uplink " << up.mobile << " at R=1: closed form eps=" << closed
              << ", oracle eps=" << oracle.probability << " +- " << oracle.std_error << "\n";

    const uplink::NetworkStats stats = uplink::run_trial(cfg, 0);
    std::cout << "OCVR: mean outage " << stats.mean_outage << ", mean throughput "
              << stats.mean_throughput << ", tau " << stats.transmission_capacity << "\n";
    return 0;
}
