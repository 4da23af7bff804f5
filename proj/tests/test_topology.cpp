#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "uplink/rng.hpp"
#include "uplink/topology.hpp"

using namespace uplink;

namespace {

ShadowField zero_shadow(int mobiles, int bases) {
    ShadowField f;
    f.mobiles = mobiles;
    f.bases = bases;
    f.sigma_s = 0.0;
    f.xi.assign(static_cast<std::size_t>(mobiles) * bases, 0.0);
    return f;
}

void check_invariants(const Topology& topo) {
    const auto& p = topo.params;
    for (Point pt : topo.bs_positions) REQUIRE(std::hypot(pt.x, pt.y) <= p.r_net);
    for (Point pt : topo.mobile_positions) REQUIRE(std::hypot(pt.x, pt.y) <= p.r_net);
    for (std::size_t a = 0; a < topo.bs_positions.size(); ++a)
        for (std::size_t b = a + 1; b < topo.bs_positions.size(); ++b)
            REQUIRE(distance(topo.bs_positions[a], topo.bs_positions[b]) >= p.r_bs);
    for (Point m : topo.mobile_positions)
        for (Point b : topo.bs_positions) REQUIRE(distance(m, b) >= p.r_bs);
    for (std::size_t a = 0; a < topo.mobile_positions.size(); ++a)
        for (std::size_t b = a + 1; b < topo.mobile_positions.size(); ++b)
            REQUIRE(distance(topo.mobile_positions[a], topo.mobile_positions[b]) >= p.r_m);
}

} // namespace

TEST_CASE("generate_topology: single base station, no mobiles") {
    TopologyParams params;
    params.C = 1;
    params.M = 0;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(1, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    REQUIRE(topo.bs_positions.size() == 1);
    REQUIRE(topo.mobile_positions.empty());
    REQUIRE(std::hypot(topo.bs_positions[0].x, topo.bs_positions[0].y) <= 2.0);
}

TEST_CASE("generate_topology: canonical network satisfies every exclusion") {
    TopologyParams params;
    params.C = 50;
    params.M = 400;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(3, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    REQUIRE(topo.bs_positions.size() == 50);
    REQUIRE(topo.mobile_positions.size() == 400);
    check_invariants(topo);
}

TEST_CASE("generate_topology: exclusion invariants hold across seeds") {
    TopologyParams params;
    params.C = 12;
    params.M = 60;
    params.r_net = 1.0;
    params.r_bs = 0.2;
    params.r_m = 0.02;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto rng = make_stream(seed, 0, RngStage::topology);
        check_invariants(generate_topology(params, rng));
    }
}

TEST_CASE("generate_topology: infeasible packing raises PlacementInfeasible") {
    TopologyParams params;
    params.C = 50;
    params.M = 0;
    params.r_net = 0.5;
    params.r_bs = 0.45;
    params.r_m = 0.01;
    params.max_placement_attempts = 2000;
    auto rng = make_stream(1, 0, RngStage::topology);
    REQUIRE_THROWS_AS(generate_topology(params, rng), PlacementInfeasible);
}

TEST_CASE("generate_topology: invalid exclusion geometry is a domain error") {
    // r_bs must stay below r_net; two points 1.0 apart cannot fit in a
    // 0.1-radius disk anyway.
    TopologyParams params;
    params.C = 2;
    params.M = 0;
    params.r_net = 0.1;
    params.r_bs = 1.0;
    auto rng = make_stream(1, 0, RngStage::topology);
    REQUIRE_THROWS_AS(generate_topology(params, rng), DomainError);
}

TEST_CASE("generate_topology is deterministic per stream") {
    TopologyParams params;
    params.C = 10;
    params.M = 50;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto a = make_stream(11, 4, RngStage::topology);
    auto b = make_stream(11, 4, RngStage::topology);
    const Topology ta = generate_topology(params, a);
    const Topology tb = generate_topology(params, b);
    for (std::size_t i = 0; i < ta.bs_positions.size(); ++i) {
        REQUIRE(ta.bs_positions[i].x == tb.bs_positions[i].x);
        REQUIRE(ta.bs_positions[i].y == tb.bs_positions[i].y);
    }
    for (std::size_t i = 0; i < ta.mobile_positions.size(); ++i) {
        REQUIRE(ta.mobile_positions[i].x == tb.mobile_positions[i].x);
        REQUIRE(ta.mobile_positions[i].y == tb.mobile_positions[i].y);
    }
}

TEST_CASE("vanishing exclusion zones approach the binomial point process") {
    // With r_bs, r_m -> 0 the mean mobile count in any fixed sub-disk of area
    // a approaches M * a / (pi r_net^2). Chi-squared over four disjoint
    // sub-disks plus the remainder, coarse threshold.
    TopologyParams params;
    params.C = 1;
    params.M = 200;
    params.r_net = 2.0;
    params.r_bs = 1e-4;
    params.r_m = 1e-5;
    const int trials = 200;

    const Point centers[4] = {{0.7, 0.0}, {-0.7, 0.0}, {0.0, 0.9}, {-0.4, -0.9}};
    const double radius = 0.45;
    double counts[5] = {0, 0, 0, 0, 0};
    for (int t = 0; t < trials; ++t) {
        auto rng = make_stream(100 + t, 0, RngStage::topology);
        const Topology topo = generate_topology(params, rng);
        for (Point m : topo.mobile_positions) {
            bool placed = false;
            for (int c = 0; c < 4; ++c) {
                if (distance(m, centers[c]) <= radius) {
                    counts[c] += 1.0;
                    placed = true;
                    break;
                }
            }
            if (!placed) counts[4] += 1.0;
        }
    }
    const double total = static_cast<double>(params.M) * trials;
    const double cell_prob = radius * radius / (params.r_net * params.r_net);  // area ratio
    double chi2 = 0.0;
    double expected_rest = total;
    for (int c = 0; c < 4; ++c) {
        const double expected = total * cell_prob;
        expected_rest -= expected;
        chi2 += (counts[c] - expected) * (counts[c] - expected) / expected;
    }
    chi2 += (counts[4] - expected_rest) * (counts[4] - expected_rest) / expected_rest;
    REQUIRE(chi2 < 30.0);  // chi2_{0.9999, 4} is about 23.5
}

TEST_CASE("sector intervals are half-open and partition the circle") {
    REQUIRE(sector_index_for_angle(0.0, 0.0) == 0);
    REQUIRE(sector_index_for_angle(0.0, std::numbers::pi / 3.0) == 0);
    REQUIRE(sector_index_for_angle(0.0, 2.0 * std::numbers::pi / 3.0) == 1);  // boundary
    REQUIRE(sector_index_for_angle(0.0, std::numbers::pi) == 1);
    REQUIRE(sector_index_for_angle(0.0, 4.0 * std::numbers::pi / 3.0) == 2);
    REQUIRE(sector_index_for_angle(0.0, -0.1) == 2);
    // offset shifts every boundary identically
    REQUIRE(sector_index_for_angle(0.5, 0.5) == 0);
    REQUIRE(sector_index_for_angle(0.5, 0.4) == 2);
}

TEST_CASE("covers: exactly one sector of each base station covers any mobile") {
    TopologyParams params;
    params.C = 5;
    params.M = 40;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(9, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    for (int i = 0; i < params.M; ++i) {
        for (int c = 0; c < params.C; ++c) {
            int covering = 0;
            for (int s = 0; s < 3; ++s)
                if (covers(topo, SectorId{c, s}, i)) ++covering;
            REQUIRE(covering == 1);
        }
    }
}

TEST_CASE("covers: mobile at pi/3 from a base station at the origin") {
    Topology topo;
    topo.params.C = 1;
    topo.params.M = 1;
    topo.bs_positions = {{0.0, 0.0}};
    topo.mobile_positions = {{std::cos(std::numbers::pi / 3.0), std::sin(std::numbers::pi / 3.0)}};
    REQUIRE(covers(topo, SectorId{0, 0}, 0));
    REQUIRE_FALSE(covers(topo, SectorId{0, 1}, 0));
    REQUIRE_FALSE(covers(topo, SectorId{0, 2}, 0));
}

TEST_CASE("associate: nearest base station wins without shadowing") {
    Topology topo;
    topo.params.C = 2;
    topo.params.M = 1;
    topo.bs_positions = {{0.0, 0.0}, {1.0, 0.0}};
    topo.mobile_positions = {{0.3, 0.1}};
    const auto serving = associate(topo, zero_shadow(1, 2), 3.0);
    REQUIRE(serving[0].bs_index == 0);
    REQUIRE(covers(topo, serving[0], 0));
}

TEST_CASE("associate: single base station serves through its covering sector") {
    Topology topo;
    topo.params.C = 1;
    topo.params.M = 3;
    topo.bs_positions = {{0.0, 0.0}};
    topo.mobile_positions = {{0.5, 0.2}, {-0.5, 0.2}, {0.1, -0.5}};
    const auto serving = associate(topo, zero_shadow(3, 1), 3.0);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(serving[i].bs_index == 0);
        REQUIRE(covers(topo, serving[i], i));
    }
}

TEST_CASE("associate: shadowing can tilt the argmax to the farther base station") {
    // Exhaustive check over a grid of shadowing pairs: BS 1 wins exactly when
    // xi_1 - xi_0 exceeds 10 * alpha * log10(d1 / d0).
    Topology topo;
    topo.params.C = 2;
    topo.params.M = 1;
    topo.bs_positions = {{0.0, 0.0}, {1.4, 0.0}};
    topo.mobile_positions = {{0.4, 0.3}};
    const double alpha = 3.0;
    const double d0 = distance(topo.bs_positions[0], topo.mobile_positions[0]);
    const double d1 = distance(topo.bs_positions[1], topo.mobile_positions[0]);
    REQUIRE(d1 > d0);
    const double threshold_db = 10.0 * alpha * std::log10(d1 / d0);

    for (int x0 = -12; x0 <= 12; ++x0) {
        for (int x1 = -12; x1 <= 12; ++x1) {
            const double diff = static_cast<double>(x1 - x0);
            if (std::abs(diff - threshold_db) < 1e-9) continue;  // knife edge
            ShadowField shadow = zero_shadow(1, 2);
            shadow.xi_db(0, 0) = x0;
            shadow.xi_db(0, 1) = x1;
            const auto serving = associate(topo, shadow, alpha);
            REQUIRE(serving[0].bs_index == (diff > threshold_db ? 1 : 0));
        }
    }
}

TEST_CASE("associate is invariant under per-mobile constant shadowing shifts") {
    TopologyParams params;
    params.C = 8;
    params.M = 30;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(21, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    auto srng = make_stream(21, 0, RngStage::shadowing);
    ShadowField shadow = draw_shadowing(params.M, params.C, 8.0, srng);
    const auto base = associate(topo, shadow, 3.0);
    for (int i = 0; i < params.M; ++i)
        for (int c = 0; c < params.C; ++c) shadow.xi_db(i, c) += 7.25;
    const auto shifted = associate(topo, shadow, 3.0);
    for (int i = 0; i < params.M; ++i) REQUIRE(base[i] == shifted[i]);
}

TEST_CASE("SectorId flat ids are a bijection") {
    for (int flat = 0; flat < 3 * 17; ++flat) {
        const SectorId id = SectorId::from_flat(flat);
        REQUIRE(id.flat() == flat);
        REQUIRE(id.sector_index >= 0);
        REQUIRE(id.sector_index < 3);
    }
}

TEST_CASE("topology CSV round-trips exactly") {
    TopologyParams params;
    params.C = 6;
    params.M = 25;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(31, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);

    std::stringstream ss;
    write_topology_csv(topo, ss);
    const Topology back = read_topology_csv(ss, params);
    REQUIRE(back.params.C == params.C);
    REQUIRE(back.params.M == params.M);
    for (int c = 0; c < params.C; ++c) {
        REQUIRE(back.bs_positions[c].x == topo.bs_positions[c].x);
        REQUIRE(back.bs_positions[c].y == topo.bs_positions[c].y);
    }
    for (int m = 0; m < params.M; ++m) {
        REQUIRE(back.mobile_positions[m].x == topo.mobile_positions[m].x);
        REQUIRE(back.mobile_positions[m].y == topo.mobile_positions[m].y);
    }

    std::stringstream again;
    write_topology_csv(back, again);
    REQUIRE(again.str() == ss.str());
}
