#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "channel.hpp"
#include "errors.hpp"

namespace uplink {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct TopologyParams {
    int C = 1;             // base stations
    int M = 0;             // mobiles
    double r_net = 2.0;    // network disk radius
    double r_bs = 0.25;    // base-station exclusion radius (keeps out BSs and mobiles)
    double r_m = 0.01;     // mobile exclusion radius (keeps out other mobiles)
    int sector_count_per_bs = 3;
    double sector_offset_angle = 0.0;  // radians, first sector boundary
    int max_placement_attempts = 100000;

    void validate() const {
        if (C < 1) throw DomainError("TopologyParams: C must be >= 1");
        if (M < 0) throw DomainError("TopologyParams: M must be >= 0");
        if (!(r_net > 0.0)) throw DomainError("TopologyParams: r_net must be > 0");
        if (!(r_bs > 0.0 && r_bs < r_net))
            throw DomainError("TopologyParams: need 0 < r_bs < r_net");
        if (!(r_m > 0.0 && r_m <= r_bs))
            throw DomainError("TopologyParams: need 0 < r_m <= r_bs");
        if (sector_count_per_bs != 3)
            throw DomainError("TopologyParams: sector geometry is fixed at 3 per base station");
        if (max_placement_attempts < 1)
            throw DomainError("TopologyParams: max_placement_attempts must be >= 1");
    }
};

/// Sector antennas are numbered flat: j = 3*bs_index + sector_index.
struct SectorId {
    int bs_index = 0;
    int sector_index = 0;

    constexpr int flat() const { return 3 * bs_index + sector_index; }
    static constexpr SectorId from_flat(int id) { return SectorId{id / 3, id % 3}; }

    friend constexpr bool operator==(SectorId a, SectorId b) = default;
};

struct Topology {
    TopologyParams params;
    std::vector<Point> bs_positions;
    std::vector<Point> mobile_positions;
};

namespace detail {

inline Point draw_in_disk(double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r = radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    return Point{r * std::cos(theta), r * std::sin(theta)};
}

} // namespace detail

/// Draws a constrained random realization: points are placed one at a time,
/// uniformly over the disk; a draw that lands inside any exclusion zone of an
/// already-placed point is discarded and redrawn. Base stations go first,
/// then mobiles. Deterministic given the stream state.
inline Topology generate_topology(const TopologyParams& params, std::mt19937_64& rng) {
    params.validate();
    Topology topo;
    topo.params = params;
    topo.bs_positions.reserve(params.C);
    topo.mobile_positions.reserve(params.M);

    auto place = [&](std::vector<Point>& out, const char* kind, int index, auto&& accept) {
        for (int attempt = 0; attempt < params.max_placement_attempts; ++attempt) {
            Point p = detail::draw_in_disk(params.r_net, rng);
            if (accept(p)) {
                out.push_back(p);
                return;
            }
        }
        throw PlacementInfeasible(std::string("generate_topology: could not place ") + kind +
                                  " " + std::to_string(index) + " within " +
                                  std::to_string(params.max_placement_attempts) + " attempts");
    };

    for (int c = 0; c < params.C; ++c) {
        place(topo.bs_positions, "base station", c, [&](Point p) {
            for (Point q : topo.bs_positions)
                if (distance(p, q) < params.r_bs) return false;
            return true;
        });
    }
    for (int m = 0; m < params.M; ++m) {
        place(topo.mobile_positions, "mobile", m, [&](Point p) {
            for (Point q : topo.bs_positions)
                if (distance(p, q) < params.r_bs) return false;
            for (Point q : topo.mobile_positions)
                if (distance(p, q) < params.r_m) return false;
            return true;
        });
    }
    return topo;
}

/// Sector index covering a given azimuth. Sector s covers the half-open
/// interval [offset + s*2pi/3, offset + (s+1)*2pi/3), angles mod 2pi;
/// boundary angles are shared by all base stations.
inline int sector_index_for_angle(double sector_offset_angle, double angle) {
    const double two_pi = 2.0 * std::numbers::pi;
    double rel = std::fmod(angle - sector_offset_angle, two_pi);
    if (rel < 0.0) rel += two_pi;
    int s = static_cast<int>(rel / (two_pi / 3.0));
    return s >= 3 ? 0 : s;  // rel can round up to exactly 2pi, which wraps to sector 0
}

/// Index of the sector of base station bs_index whose angular interval
/// contains p.
inline int sector_index_of(const Topology& topo, int bs_index, Point p) {
    const Point b = topo.bs_positions[bs_index];
    return sector_index_for_angle(topo.params.sector_offset_angle,
                                  std::atan2(p.y - b.y, p.x - b.x));
}

inline bool covers(const Topology& topo, SectorId j, int mobile_index) {
    return sector_index_of(topo, j.bs_index, topo.mobile_positions[mobile_index]) ==
           j.sector_index;
}

/// Serving sector per mobile: among the sectors that cover the mobile (one
/// per base station), pick the one with the largest shadowing-weighted gain
/// 10^(xi/10) * d^(-alpha). Ties go to the lowest flat sector id.
inline std::vector<SectorId> associate(const Topology& topo, const ShadowField& shadow,
                                       double alpha) {
    const int C = topo.params.C;
    const int M = topo.params.M;
    if (shadow.mobiles != M || shadow.bases != C)
        throw DomainError("associate: shadow field dimensions do not match topology");

    std::vector<SectorId> serving(M);
    for (int i = 0; i < M; ++i) {
        const Point p = topo.mobile_positions[i];
        double best = -1.0;
        int best_bs = 0;
        for (int c = 0; c < C; ++c) {
            const double gain =
                db_to_linear(shadow.xi_db(i, c)) * path_gain(distance(topo.bs_positions[c], p), alpha);
            if (gain > best) {
                best = gain;
                best_bs = c;
            }
        }
        serving[i] = SectorId{best_bs, sector_index_of(topo, best_bs, p)};
    }
    return serving;
}

// --- CSV fixtures: kind,index,x,y with kind in {bs, mobile} ---

inline void write_topology_csv(const Topology& topo, std::ostream& os) {
    os << "kind,index,x,y\n";
    char buf[96];
    auto row = [&](const char* kind, int index, Point p) {
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g\n", kind, index, p.x, p.y);
        os << buf;
    };
    for (int c = 0; c < static_cast<int>(topo.bs_positions.size()); ++c)
        row("bs", c, topo.bs_positions[c]);
    for (int m = 0; m < static_cast<int>(topo.mobile_positions.size()); ++m)
        row("mobile", m, topo.mobile_positions[m]);
}

/// Reads positions written by write_topology_csv. Geometry parameters other
/// than the point counts are taken from `params`.
inline Topology read_topology_csv(std::istream& is, TopologyParams params) {
    Topology topo;
    std::string line;
    if (!std::getline(is, line) || line.rfind("kind,index,x,y", 0) != 0)
        throw ConfigError("topology csv: missing kind,index,x,y header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string kind, index, x, y;
        if (!std::getline(ss, kind, ',') || !std::getline(ss, index, ',') ||
            !std::getline(ss, x, ',') || !std::getline(ss, y))
            throw ConfigError("topology csv: malformed row: " + line);
        Point p{std::stod(x), std::stod(y)};
        if (kind == "bs")
            topo.bs_positions.push_back(p);
        else if (kind == "mobile")
            topo.mobile_positions.push_back(p);
        else
            throw ConfigError("topology csv: unknown kind: " + kind);
    }
    params.C = static_cast<int>(topo.bs_positions.size());
    params.M = static_cast<int>(topo.mobile_positions.size());
    topo.params = params;
    return topo;
}

} // namespace uplink
