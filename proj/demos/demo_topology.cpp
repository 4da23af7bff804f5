// Draws one constrained network realization and prints it as CSV, suitable
// for scatter-plotting base stations, mobiles, and sector associations.

#include <iostream>

#include "uplink/harness.hpp"

int main(int argc, char** argv) {
    uplink::TopologyParams params;
    params.C = 50;
    params.M = 400;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;

    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
    auto stream = uplink::make_stream(seed, 0, uplink::RngStage::topology);
    const uplink::Topology topo = uplink::generate_topology(params, stream);
    uplink::write_topology_csv(topo, std::cout);

    auto shadow_stream = uplink::make_stream(seed, 0, uplink::RngStage::shadowing);
    const uplink::ShadowField shadow =
        uplink::draw_shadowing(params.M, params.C, 8.0, shadow_stream);
    const auto serving = uplink::associate(topo, shadow, 3.0);
    std::cerr << "mobile 0 serves from sector " << serving[0].flat() << " (base "
              << serving[0].bs_index << ", sector " << serving[0].sector_index << ")\n";
    return 0;
}
