#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace uplink {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Log-normal shadowing factors for one realization, one value per
/// (mobile, base station) in dB. The three sector antennas of a base station
/// are colocated, so they share the mobile's shadowing factor.
struct ShadowField {
    int mobiles = 0;
    int bases = 0;
    double sigma_s = 0.0;    // dB
    std::vector<double> xi;  // row-major [mobile][base], dB

    double xi_db(int mobile, int base) const {
        return xi[static_cast<std::size_t>(mobile) * bases + base];
    }
    double& xi_db(int mobile, int base) {
        return xi[static_cast<std::size_t>(mobile) * bases + base];
    }
};

/// Draws an M x C field of i.i.d. zero-mean Gaussians with std sigma_s dB.
/// All entries are exactly zero when sigma_s is zero.
inline ShadowField draw_shadowing(int mobiles, int bases, double sigma_s, std::mt19937_64& rng) {
    if (mobiles < 0 || bases < 0) throw DomainError("draw_shadowing: negative dimensions");
    if (!(sigma_s >= 0.0)) throw DomainError("draw_shadowing: sigma_s must be >= 0");
    ShadowField field;
    field.mobiles = mobiles;
    field.bases = bases;
    field.sigma_s = sigma_s;
    field.xi.resize(static_cast<std::size_t>(mobiles) * bases);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (double& v : field.xi) v = sigma_s * unit(rng);
    return field;
}

/// Attenuation power law d^(-alpha). Distances are in network-radius units.
inline double path_gain(double distance, double alpha) {
    if (!(distance > 0.0)) throw DomainError("path_gain: distance must be > 0");
    return std::pow(distance, -alpha);
}

/// Nakagami shape selector. Distance-dependent mode models line-of-sight
/// conditions near the base station: m = 3 inside r_bs/2, m = 2 out to r_bs,
/// Rayleigh (m = 1) beyond. Band upper edges are inclusive.
struct FadingModel {
    enum class Mode { constant, distance_dependent };

    Mode mode = Mode::distance_dependent;
    int m = 1;           // constant mode only
    double r_bs = 0.25;  // distance-dependent band scale

    static FadingModel constant(int m) {
        if (m < 1) throw DomainError("FadingModel: constant m must be a positive integer");
        FadingModel f;
        f.mode = Mode::constant;
        f.m = m;
        return f;
    }

    static FadingModel distance_dependent(double r_bs) {
        if (!(r_bs > 0.0)) throw DomainError("FadingModel: r_bs must be > 0");
        FadingModel f;
        f.mode = Mode::distance_dependent;
        f.r_bs = r_bs;
        return f;
    }
};

inline int nakagami_m(const FadingModel& fading, double distance) {
    if (fading.mode == FadingModel::Mode::constant) return fading.m;
    if (distance <= fading.r_bs / 2.0) return 3;
    if (distance <= fading.r_bs) return 2;
    return 1;
}

// --- CSV fixtures: mobile,base,xi_db; serialized alongside topology dumps ---

inline void write_shadow_csv(const ShadowField& field, std::ostream& os) {
    os << "mobile,base,xi_db\n";
    char buf[64];
    for (int i = 0; i < field.mobiles; ++i) {
        for (int c = 0; c < field.bases; ++c) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i, c, field.xi_db(i, c));
            os << buf;
        }
    }
}

inline ShadowField read_shadow_csv(std::istream& is, double sigma_s) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("mobile,base,xi_db", 0) != 0)
        throw ConfigError("shadow csv: missing mobile,base,xi_db header");
    int mobiles = 0, bases = 0;
    std::vector<std::array<double, 3>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string m, c, v;
        if (!std::getline(ss, m, ',') || !std::getline(ss, c, ',') || !std::getline(ss, v))
            throw ConfigError("shadow csv: malformed row: " + line);
        rows.push_back({std::stod(m), std::stod(c), std::stod(v)});
        mobiles = std::max(mobiles, static_cast<int>(rows.back()[0]) + 1);
        bases = std::max(bases, static_cast<int>(rows.back()[1]) + 1);
    }
    ShadowField field;
    field.mobiles = mobiles;
    field.bases = bases;
    field.sigma_s = sigma_s;
    field.xi.assign(static_cast<std::size_t>(mobiles) * bases, 0.0);
    for (const auto& row : rows)
        field.xi_db(static_cast<int>(row[0]), static_cast<int>(row[1])) = row[2];
    return field;
}

} // namespace uplink
