#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "uplink/gains.hpp"
#include "uplink/rng.hpp"

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

const FadingModel kRayleigh = FadingModel::constant(1);

} // namespace

TEST_CASE("lone reference has no interferers and omega_ref = d^-alpha") {
    Topology topo;
    topo.params.C = 1;
    topo.params.M = 1;
    topo.bs_positions = {{0.0, 0.0}};
    topo.mobile_positions = {{0.3, 0.1}};
    const auto shadow = zero_shadow(1, 1);
    const auto serving = associate(topo, shadow, 3.0);
    const auto env = build_link_environment(topo, shadow, serving, kRayleigh, SpreadingParams{16},
                                            3.0, 10.0, 1.0, 0, std::vector<bool>{true});
    REQUIRE(env.interferers.empty());
    const double d = distance(topo.bs_positions[0], topo.mobile_positions[0]);
    REQUIRE_THAT(env.omega_ref, Catch::Matchers::WithinRel(std::pow(d, -3.0), 1e-14));
    REQUIRE_THAT(env.snr, Catch::Matchers::WithinRel(10.0, 1e-14));
}

TEST_CASE("intracell interferer omega is exactly (h/G) * omega_ref") {
    Topology topo;
    topo.params.C = 1;
    topo.params.M = 2;
    topo.bs_positions = {{0.0, 0.0}};
    topo.mobile_positions = {{0.3, 0.1}, {0.6, 0.05}};  // both in sector 0
    const auto shadow = zero_shadow(2, 1);
    const auto serving = associate(topo, shadow, 3.0);
    REQUIRE(serving[0] == serving[1]);
    const SpreadingParams spreading{16, 2.0 / 3.0};
    const auto env = build_link_environment(topo, shadow, serving, kRayleigh, spreading, 3.0,
                                            10.0, 1.0, 0, std::vector<bool>{true, true});
    REQUIRE(env.interferers.size() == 1);
    REQUIRE(env.interferers[0].omega == (2.0 / 3.0 / 16.0) * env.omega_ref);
    REQUIRE(2.0 / 3.0 / 16.0 == 1.0 / 24.0);
    // the interferer's own position never enters the intracell omega
    Topology moved = topo;
    moved.mobile_positions[1] = {0.2, 0.35};
    const auto serving2 = associate(moved, shadow, 3.0);
    REQUIRE(serving2[1] == serving[1]);
    const auto env2 = build_link_environment(moved, shadow, serving2, kRayleigh, spreading, 3.0,
                                             10.0, 1.0, 0, std::vector<bool>{true, true});
    REQUIRE(env2.interferers[0].omega == env.interferers[0].omega);
}

TEST_CASE("equidistant intercell interferer collapses to the intracell value") {
    // The interferer sits exactly between its own base station and the
    // reference one, so the power-control distance ratio cancels.
    Topology topo;
    topo.params.C = 2;
    topo.params.M = 2;
    topo.bs_positions = {{0.0, 0.0}, {2.0, 0.0}};
    topo.mobile_positions = {{0.4, 0.3}, {1.0, 0.4}};
    const auto shadow = zero_shadow(2, 2);
    // force the association: reference on BS 0, interferer on BS 1
    std::vector<SectorId> serving(2);
    serving[0] = SectorId{0, sector_index_of(topo, 0, topo.mobile_positions[0])};
    serving[1] = SectorId{1, sector_index_of(topo, 1, topo.mobile_positions[1])};
    REQUIRE(sector_index_of(topo, 0, topo.mobile_positions[1]) == serving[0].sector_index);

    const double alpha = 3.0;
    const SpreadingParams spreading{16, 2.0 / 3.0};
    const auto env = build_link_environment(topo, shadow, serving, kRayleigh, spreading, alpha,
                                            10.0, 1.0, 0, std::vector<bool>{true, true});
    REQUIRE(env.interferers.size() == 1);
    const double d_ref = distance(topo.bs_positions[0], topo.mobile_positions[0]);
    const double intracell = (2.0 / 3.0 / 16.0) * std::pow(d_ref, -alpha);
    REQUIRE_THAT(env.interferers[0].omega, Catch::Matchers::WithinRel(intracell, 1e-12));

    // direct evaluation of the intercell expression
    const double d_ij = distance(topo.bs_positions[0], topo.mobile_positions[1]);
    const double d_ik = distance(topo.bs_positions[1], topo.mobile_positions[1]);
    const double direct = (2.0 / 3.0 / 16.0) * std::pow(d_ij * d_ref / d_ik, -alpha);
    REQUIRE_THAT(env.interferers[0].omega, Catch::Matchers::WithinRel(direct, 1e-12));
}

TEST_CASE("doubling G halves every interferer omega and fixes omega_ref") {
    TopologyParams params;
    params.C = 4;
    params.M = 30;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(5, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    auto srng = make_stream(5, 0, RngStage::shadowing);
    const ShadowField shadow = draw_shadowing(params.M, params.C, 8.0, srng);
    const auto serving = associate(topo, shadow, 3.0);
    const std::vector<bool> served(params.M, true);

    const auto env16 = build_link_environment(topo, shadow, serving, kRayleigh,
                                              SpreadingParams{16}, 3.0, 10.0, 1.0, 0, served);
    const auto env32 = build_link_environment(topo, shadow, serving, kRayleigh,
                                              SpreadingParams{32}, 3.0, 10.0, 1.0, 0, served);
    REQUIRE(env16.omega_ref == env32.omega_ref);
    REQUIRE(env16.interferers.size() == env32.interferers.size());
    for (std::size_t i = 0; i < env16.interferers.size(); ++i)
        REQUIRE(env32.interferers[i].omega == 0.5 * env16.interferers[i].omega);
}

TEST_CASE("without shadowing no intercell omega exceeds the intracell omega") {
    TopologyParams params;
    params.C = 6;
    params.M = 50;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    for (std::uint64_t seed = 40; seed < 44; ++seed) {
        auto rng = make_stream(seed, 0, RngStage::topology);
        const Topology topo = generate_topology(params, rng);
        const auto shadow = zero_shadow(params.M, params.C);
        const auto serving = associate(topo, shadow, 3.0);
        const std::vector<bool> served(params.M, true);
        for (int r = 0; r < params.M; ++r) {
            const auto env = build_link_environment(topo, shadow, serving, kRayleigh,
                                                    SpreadingParams{16}, 3.0, 10.0, 1.0, r, served);
            const double intracell = (2.0 / 3.0 / 16.0) * env.omega_ref;
            for (const Interferer& f : env.interferers)
                REQUIRE(f.omega <= intracell * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("interferer count equals covered admitted mobiles minus the reference") {
    TopologyParams params;
    params.C = 5;
    params.M = 60;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(51, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    auto srng = make_stream(51, 0, RngStage::shadowing);
    const ShadowField shadow = draw_shadowing(params.M, params.C, 8.0, srng);
    const auto serving = associate(topo, shadow, 3.0);
    std::vector<bool> served(params.M, true);
    served[3] = served[17] = served[44] = false;  // arbitrary denials

    for (int r = 0; r < params.M; ++r) {
        if (!served[r]) continue;
        const auto env = build_link_environment(topo, shadow, serving, kRayleigh,
                                                SpreadingParams{16}, 3.0, 10.0, 1.0, r, served);
        std::size_t covered = 0;
        for (int i = 0; i < params.M; ++i)
            if (served[i] && covers(topo, serving[r], i)) ++covered;
        REQUIRE(env.interferers.size() == covered - 1);
    }
}

TEST_CASE("fading model and activity stamp every interferer") {
    TopologyParams params;
    params.C = 3;
    params.M = 25;
    params.r_net = 2.0;
    params.r_bs = 0.25;
    params.r_m = 0.01;
    auto rng = make_stream(61, 0, RngStage::topology);
    const Topology topo = generate_topology(params, rng);
    const auto shadow = zero_shadow(params.M, params.C);
    const auto serving = associate(topo, shadow, 3.0);
    const std::vector<bool> served(params.M, true);
    const auto env = build_link_environment(topo, shadow, serving, FadingModel::constant(2),
                                            SpreadingParams{16}, 3.0, 10.0, 0.75, 0, served);
    for (const Interferer& f : env.interferers) {
        REQUIRE(f.m == 2);
        REQUIRE(f.p == 0.75);
    }
    // distance-dependent fading on the canonical geometry is Rayleigh for
    // every link, because mobiles stay outside the exclusion radius
    const auto env_dd =
        build_link_environment(topo, shadow, serving, FadingModel::distance_dependent(0.25),
                               SpreadingParams{16}, 3.0, 10.0, 1.0, 0, served);
    for (const Interferer& f : env_dd.interferers) REQUIRE(f.m == 1);
}

TEST_CASE("denied reference raises NotAdmitted") {
    Topology topo;
    topo.params.C = 1;
    topo.params.M = 1;
    topo.bs_positions = {{0.0, 0.0}};
    topo.mobile_positions = {{0.3, 0.1}};
    const auto shadow = zero_shadow(1, 1);
    const auto serving = associate(topo, shadow, 3.0);
    REQUIRE_THROWS_AS(build_link_environment(topo, shadow, serving, kRayleigh,
                                             SpreadingParams{16}, 3.0, 10.0, 1.0, 0,
                                             std::vector<bool>{false}),
                      NotAdmitted);
}

TEST_CASE("pc_sigma_multiplier scales only the intercell xi terms") {
    Topology topo;
    topo.params.C = 2;
    topo.params.M = 3;
    topo.bs_positions = {{0.0, 0.0}, {2.0, 0.0}};
    topo.mobile_positions = {{0.4, 0.3}, {0.9, 0.5}, {0.5, 0.2}};
    ShadowField shadow = zero_shadow(3, 2);
    shadow.xi_db(1, 0) = 4.0;   // interferer to reference base
    shadow.xi_db(0, 0) = -2.0;  // reference to its base
    shadow.xi_db(1, 1) = 3.0;   // interferer to its own base
    std::vector<SectorId> serving(3);
    serving[0] = SectorId{0, sector_index_of(topo, 0, topo.mobile_positions[0])};
    serving[1] = SectorId{1, sector_index_of(topo, 1, topo.mobile_positions[1])};
    serving[2] = serving[0];
    REQUIRE(sector_index_of(topo, 0, topo.mobile_positions[1]) == serving[0].sector_index);
    REQUIRE(sector_index_of(topo, 0, topo.mobile_positions[2]) == serving[0].sector_index);

    const std::vector<bool> served(3, true);
    const auto plain = build_link_environment(topo, shadow, serving, kRayleigh,
                                              SpreadingParams{16}, 3.0, 10.0, 1.0, 0, served, 1.0);
    const auto widened = build_link_environment(topo, shadow, serving, kRayleigh,
                                                SpreadingParams{16}, 3.0, 10.0, 1.0, 0, served, 2.0);
    REQUIRE(plain.interferers.size() == 2);
    REQUIRE(widened.omega_ref == plain.omega_ref);
    // xi' = 4 + (-2) - 3 = -1 dB, doubled to -2 dB by the multiplier
    const double ratio = widened.interferers[0].omega / plain.interferers[0].omega;
    REQUIRE_THAT(ratio, Catch::Matchers::WithinRel(db_to_linear(-1.0), 1e-12));
    // the intracell interferer never moves
    REQUIRE(widened.interferers[1].omega == plain.interferers[1].omega);
}
