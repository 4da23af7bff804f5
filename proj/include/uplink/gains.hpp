#pragma once

#include <string>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"
#include "topology.hpp"

namespace uplink {

struct SpreadingParams {
    int G = 16;            // spreading factor
    double h = 2.0 / 3.0;  // chip factor; 2/3 for rectangular chip waveforms

    void validate() const {
        if (G < 1) throw DomainError("SpreadingParams: G must be >= 1");
        if (!(h > 0.0 && h <= 1.0)) throw DomainError("SpreadingParams: need 0 < h <= 1");
    }
};

struct Interferer {
    double omega = 0.0;  // normalized mean despread power at the serving antenna
    int m = 1;           // Nakagami shape of the interferer -> antenna link
    double p = 1.0;      // activity probability
};

/// Everything the outage kernel needs to know about one reference uplink:
/// the normalized reference power, the SNR, and the interferer list. Mobiles
/// not covered by the serving sector contribute nothing and are not listed.
struct LinkEnvironment {
    int reference_mobile = -1;
    SectorId serving_sector;
    double omega_ref = 0.0;  // linear, dimensionless
    double snr = 0.0;        // Gamma, linear
    std::vector<Interferer> interferers;
};

/// Computes the normalized mean despread powers seen by one reference uplink
/// under ideal per-sector power control. With j the serving sector and r the
/// reference:
///   reference   omega = 10^(xi_rj/10) * |S_j - X_r|^(-alpha)
///   intracell   omega = (h/G) * 10^(xi_rj/10) * |S_j - X_r|^(-alpha)
///               (power control makes this independent of the interferer's
///                own position)
///   intercell   omega = (h/G) * 10^(xi'/10)
///                       * (|S_j - X_i| * |S_j - X_r| / |S_k - X_i|)^(-alpha)
///               with xi' = xi_ij + xi_rj - xi_ik and k the interferer's own
///               serving sector.
/// pc_sigma_multiplier scales the xi terms entering xi', which models
/// imperfect power control as extra shadowing spread. Denied mobiles are
/// assumed silent and must be excluded via `served`.
inline LinkEnvironment build_link_environment(
    const Topology& topo, const ShadowField& shadow, const std::vector<SectorId>& serving,
    const FadingModel& fading, const SpreadingParams& spreading, double alpha, double snr_db,
    double activity_p, int reference, const std::vector<bool>& served,
    double pc_sigma_multiplier = 1.0) {
    spreading.validate();
    if (!(activity_p >= 0.0 && activity_p <= 1.0))
        throw DomainError("build_link_environment: activity_p must be in [0,1]");
    if (reference < 0 || reference >= topo.params.M)
        throw DomainError("build_link_environment: reference index out of range");
    if (!served[reference])
        throw NotAdmitted("build_link_environment: mobile " + std::to_string(reference) +
                          " was denied admission");

    const SectorId j = serving[reference];
    const Point sj = topo.bs_positions[j.bs_index];
    const Point xr = topo.mobile_positions[reference];
    const double dist_ref = distance(sj, xr);
    const double hg = spreading.h / spreading.G;

    LinkEnvironment env;
    env.reference_mobile = reference;
    env.serving_sector = j;
    env.omega_ref = db_to_linear(shadow.xi_db(reference, j.bs_index)) * path_gain(dist_ref, alpha);
    env.snr = db_to_linear(snr_db);
    env.interferers.reserve(topo.params.M / 3 + 1);

    const double intracell_omega = hg * env.omega_ref;
    for (int i = 0; i < topo.params.M; ++i) {
        if (i == reference || !served[i]) continue;
        const Point xi = topo.mobile_positions[i];
        if (sector_index_for_angle(topo.params.sector_offset_angle,
                                   std::atan2(xi.y - sj.y, xi.x - sj.x)) != j.sector_index)
            continue;  // outside the covered angle, no contribution

        const double dist_ij = distance(sj, xi);
        double omega;
        if (serving[i] == j) {
            omega = intracell_omega;
        } else {
            const SectorId k = serving[i];
            const double dist_ik = distance(topo.bs_positions[k.bs_index], xi);
            const double xi_prime =
                pc_sigma_multiplier * (shadow.xi_db(i, j.bs_index) +
                                       shadow.xi_db(reference, j.bs_index) -
                                       shadow.xi_db(i, k.bs_index));
            omega = hg * db_to_linear(xi_prime) * path_gain(dist_ij * dist_ref / dist_ik, alpha);
        }
        if (omega <= 0.0) continue;
        env.interferers.push_back(Interferer{omega, nakagami_m(fading, dist_ij), activity_p});
    }
    return env;
}

} // namespace uplink
