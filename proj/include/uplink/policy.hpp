#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "outage.hpp"

namespace uplink {

enum class PolicyKind { MTFR, OCFR, MTVR, OCVR };

inline const char* to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::MTFR: return "MTFR";
        case PolicyKind::OCFR: return "OCFR";
        case PolicyKind::MTVR: return "MTVR";
        case PolicyKind::OCVR: return "OCVR";
    }
    return "?";
}

inline PolicyKind policy_from_string(const std::string& name) {
    if (name == "MTFR") return PolicyKind::MTFR;
    if (name == "OCFR") return PolicyKind::OCFR;
    if (name == "MTVR") return PolicyKind::MTVR;
    if (name == "OCVR") return PolicyKind::OCVR;
    throw ConfigError("unknown policy: " + name + " (expected MTFR, OCFR, MTVR, or OCVR)");
}

struct PolicySpec {
    PolicyKind kind = PolicyKind::OCVR;
    double zeta = 0.1;               // outage constraint for OCFR / OCVR
    std::vector<double> rate_grid;   // candidate rates in bpcu, strictly increasing

    void validate() const {
        if (rate_grid.empty()) throw EmptyGrid("PolicySpec: rate grid is empty");
        double prev = 0.0;
        for (double r : rate_grid) {
            if (!(r > prev)) throw DomainError("PolicySpec: rate grid must be strictly increasing and > 0");
            prev = r;
        }
        if ((kind == PolicyKind::OCFR || kind == PolicyKind::OCVR) && !(zeta > 0.0 && zeta < 1.0))
            throw DomainError("PolicySpec: zeta must be in (0,1)");
    }
};

inline std::vector<double> make_rate_grid(double lo, double hi, double step) {
    if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0))
        throw DomainError("make_rate_grid: need 0 < lo <= hi and step > 0");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
    std::vector<double> grid;
    grid.reserve(n);
    for (int k = 0; k < n; ++k) grid.push_back(lo + k * step);
    return grid;
}

struct UplinkOutcome {
    int mobile = -1;
    double rate = 0.0;        // bpcu
    double outage = 0.0;      // eps, zero for silent (rate 0) mobiles
    double throughput = 0.0;  // R * (1 - eps)
    bool denied = false;
};

struct NetworkStats {
    double mean_outage = 0.0;
    double mean_throughput = 0.0;
    double transmission_capacity = 0.0;  // bpcu per unit area
    std::vector<UplinkOutcome> per_uplink;
};

// How denied mobiles enter the network-average outage. They never transmit,
// so their eps is undefined; `zero` counts them as silent, `one` charges
// them as outages.
enum class DeniedOutageConvention { zero, one };

inline DeniedOutageConvention denied_convention_from_string(const std::string& name) {
    if (name == "zero") return DeniedOutageConvention::zero;
    if (name == "one") return DeniedOutageConvention::one;
    throw ConfigError("unknown denied_outage_convention: " + name + " (expected zero or one)");
}

inline const char* to_string(DeniedOutageConvention c) {
    return c == DeniedOutageConvention::zero ? "zero" : "one";
}

/// One admitted reference uplink, ready for rate selection.
struct AdmittedUplink {
    int mobile = -1;
    int m0 = 1;  // Nakagami shape of the reference link
    LinkEnvironment env;
};

/// Outage and throughput of one uplink at a given rate.
inline UplinkOutcome evaluate_uplink(const LinkEnvironment& env, int m0, double rate) {
    if (!(rate > 0.0)) throw DomainError("evaluate_uplink: rate must be > 0");
    const double eps = outage_probability(env, rate_to_threshold(rate), m0);
    return UplinkOutcome{env.reference_mobile, rate, eps, rate * (1.0 - eps), false};
}

/// tau = lambda * E[T] with lambda = M / (pi * r_net^2): successful data rate
/// per unit area.
inline double transmission_capacity(double mean_throughput, int total_mobiles, double r_net) {
    if (!(r_net > 0.0)) throw DomainError("transmission_capacity: r_net must be > 0");
    return static_cast<double>(total_mobiles) / (std::numbers::pi * r_net * r_net) *
           mean_throughput;
}

namespace detail {

// eps_i(R_k) for every admitted uplink over one rate grid.
struct RateResponse {
    const std::vector<double>* grid = nullptr;
    int rates = 0;
    std::vector<double> eps;  // row-major [uplink][rate]

    double at(std::size_t uplink, int k) const { return eps[uplink * rates + k]; }
};

inline RateResponse build_rate_response(const std::vector<AdmittedUplink>& uplinks,
                                        const std::vector<double>& grid) {
    RateResponse rr;
    rr.grid = &grid;
    rr.rates = static_cast<int>(grid.size());
    std::vector<double> thresholds(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) thresholds[k] = rate_to_threshold(grid[k]);
    rr.eps.resize(uplinks.size() * grid.size());
    for (std::size_t i = 0; i < uplinks.size(); ++i)
        for (std::size_t k = 0; k < grid.size(); ++k)
            rr.eps[i * grid.size() + k] =
                outage_probability(uplinks[i].env, thresholds[k], uplinks[i].m0);
    return rr;
}

// Largest beta with eps(beta) <= zeta, found by bisection on the monotone
// outage curve. Returns a zero-rate outcome when even the smallest candidate
// rate violates the constraint.
inline UplinkOutcome ocvr_uplink(const AdmittedUplink& up, double zeta, double beta_min,
                                 double beta_top) {
    double lo = beta_min;
    double eps_lo = outage_probability(up.env, lo, up.m0);
    if (eps_lo > zeta) return UplinkOutcome{up.mobile, 0.0, 0.0, 0.0, false};

    double hi = std::max(beta_top, beta_min * 2.0);
    double eps_hi = outage_probability(up.env, hi, up.m0);
    for (int guard = 0; eps_hi <= zeta && guard < 64; ++guard) {
        lo = hi;
        eps_lo = eps_hi;
        hi *= 2.0;
        eps_hi = outage_probability(up.env, hi, up.m0);
    }
    if (eps_hi <= zeta) {  // constraint never binds within the search range
        lo = hi;
        eps_lo = eps_hi;
    } else {
        while (hi - lo > 1e-9) {
            const double mid = 0.5 * (lo + hi);
            const double eps_mid = outage_probability(up.env, mid, up.m0);
            if (std::abs(eps_mid - zeta) <= 1e-6) {
                lo = mid;
                eps_lo = eps_mid;
                break;
            }
            if (eps_mid <= zeta) {
                lo = mid;
                eps_lo = eps_mid;
            } else {
                hi = mid;
            }
        }
    }
    const double rate = threshold_to_rate(lo);
    return UplinkOutcome{up.mobile, rate, eps_lo, rate * (1.0 - eps_lo), false};
}

} // namespace detail

/// Applies each policy to the same realization. Denied mobiles get rate 0
/// and throughput 0 and are included in every M-denominator average; admitted
/// mobiles that end up with rate 0 (infeasible constraint) are silent and
/// contribute eps = 0.
inline std::vector<NetworkStats> apply_policies(
    const std::vector<AdmittedUplink>& uplinks, const std::vector<PolicySpec>& specs,
    int total_mobiles, const std::vector<int>& denied_mobiles, double r_net,
    DeniedOutageConvention convention = DeniedOutageConvention::zero) {
    if (total_mobiles < 0 ||
        uplinks.size() + denied_mobiles.size() != static_cast<std::size_t>(total_mobiles))
        throw DomainError("apply_policies: admitted + denied must cover all mobiles exactly");
    for (const PolicySpec& spec : specs) spec.validate();

    // Grid responses are shared between policies with identical grids.
    std::vector<std::unique_ptr<detail::RateResponse>> cache;
    auto find_response = [&](const std::vector<double>& grid) -> const detail::RateResponse* {
        for (const auto& r : cache)
            if (*r->grid == grid) return r.get();
        return nullptr;
    };
    auto response_for = [&](const std::vector<double>& grid) -> const detail::RateResponse& {
        if (const auto* hit = find_response(grid)) return *hit;
        cache.push_back(
            std::make_unique<detail::RateResponse>(detail::build_rate_response(uplinks, grid)));
        return *cache.back();
    };

    const double denied_eps =
        convention == DeniedOutageConvention::one ? 1.0 : 0.0;
    const double denied_eps_sum = denied_eps * static_cast<double>(denied_mobiles.size());

    std::vector<NetworkStats> results;
    results.reserve(specs.size());
    for (const PolicySpec& spec : specs) {
        const std::vector<double>& grid = spec.rate_grid;
        std::vector<UplinkOutcome> chosen(uplinks.size());

        switch (spec.kind) {
            case PolicyKind::MTFR: {
                // One common rate maximizing the network-average throughput.
                const auto& rr = response_for(grid);
                int best_k = 0;
                double best_sum = -1.0;
                for (int k = 0; k < rr.rates; ++k) {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < uplinks.size(); ++i) sum += 1.0 - rr.at(i, k);
                    sum *= grid[k];
                    if (sum > best_sum) {
                        best_sum = sum;
                        best_k = k;
                    }
                }
                for (std::size_t i = 0; i < uplinks.size(); ++i) {
                    const double eps = rr.at(i, best_k);
                    chosen[i] = UplinkOutcome{uplinks[i].mobile, grid[best_k], eps,
                                              grid[best_k] * (1.0 - eps), false};
                }
                break;
            }
            case PolicyKind::OCFR: {
                // Largest common rate whose network-average outage stays
                // within zeta; zero rate for everyone when none qualifies.
                const auto* rr = find_response(grid);
                std::vector<double> memo(grid.size(), -1.0);
                auto mean_eps_at = [&](int k) {
                    if (memo[k] >= 0.0) return memo[k];
                    double sum = denied_eps_sum;
                    if (rr) {
                        for (std::size_t i = 0; i < uplinks.size(); ++i) sum += rr->at(i, k);
                    } else {
                        const double beta = rate_to_threshold(grid[k]);
                        for (const AdmittedUplink& up : uplinks)
                            sum += outage_probability(up.env, beta, up.m0);
                    }
                    return memo[k] = sum / total_mobiles;
                };
                int pick = -1;
                if (mean_eps_at(0) <= spec.zeta) {
                    int lo = 0, hi = static_cast<int>(grid.size()) - 1;
                    if (mean_eps_at(hi) <= spec.zeta) {
                        pick = hi;
                    } else {
                        while (hi - lo > 1) {  // mean eps is nondecreasing along the grid
                            const int mid = lo + (hi - lo) / 2;
                            (mean_eps_at(mid) <= spec.zeta ? lo : hi) = mid;
                        }
                        pick = lo;
                    }
                }
                if (pick < 0) {
                    for (std::size_t i = 0; i < uplinks.size(); ++i)
                        chosen[i] = UplinkOutcome{uplinks[i].mobile, 0.0, 0.0, 0.0, false};
                } else {
                    const double beta = rate_to_threshold(grid[pick]);
                    for (std::size_t i = 0; i < uplinks.size(); ++i) {
                        const double eps =
                            rr ? rr->at(i, pick)
                               : outage_probability(uplinks[i].env, beta, uplinks[i].m0);
                        chosen[i] = UplinkOutcome{uplinks[i].mobile, grid[pick], eps,
                                                  grid[pick] * (1.0 - eps), false};
                    }
                }
                break;
            }
            case PolicyKind::MTVR: {
                // Per-uplink throughput-maximizing rate.
                const auto& rr = response_for(grid);
                for (std::size_t i = 0; i < uplinks.size(); ++i) {
                    int best_k = 0;
                    double best_t = -1.0;
                    for (int k = 0; k < rr.rates; ++k) {
                        const double t = grid[k] * (1.0 - rr.at(i, k));
                        if (t > best_t) {
                            best_t = t;
                            best_k = k;
                        }
                    }
                    const double eps = rr.at(i, best_k);
                    chosen[i] = UplinkOutcome{uplinks[i].mobile, grid[best_k], eps,
                                              grid[best_k] * (1.0 - eps), false};
                }
                break;
            }
            case PolicyKind::OCVR: {
                // Per-uplink largest rate meeting the outage constraint,
                // searched continuously above the grid floor.
                const double beta_min = rate_to_threshold(grid.front());
                const double beta_top = rate_to_threshold(grid.back());
                for (std::size_t i = 0; i < uplinks.size(); ++i)
                    chosen[i] = detail::ocvr_uplink(uplinks[i], spec.zeta, beta_min, beta_top);
                break;
            }
        }

        NetworkStats stats;
        stats.per_uplink.resize(total_mobiles);
        for (int d : denied_mobiles)
            stats.per_uplink[d] = UplinkOutcome{d, 0.0, denied_eps, 0.0, true};
        for (const UplinkOutcome& o : chosen) stats.per_uplink[o.mobile] = o;
        double eps_sum = 0.0, thr_sum = 0.0;
        for (const UplinkOutcome& o : stats.per_uplink) {
            eps_sum += o.outage;
            thr_sum += o.throughput;
        }
        stats.mean_outage = total_mobiles > 0 ? eps_sum / total_mobiles : 0.0;
        stats.mean_throughput = total_mobiles > 0 ? thr_sum / total_mobiles : 0.0;
        stats.transmission_capacity =
            transmission_capacity(stats.mean_throughput, total_mobiles, r_net);
        results.push_back(std::move(stats));
    }
    return results;
}

inline NetworkStats apply_policy(const std::vector<AdmittedUplink>& uplinks,
                                 const PolicySpec& spec, int total_mobiles,
                                 const std::vector<int>& denied_mobiles, double r_net,
                                 DeniedOutageConvention convention = DeniedOutageConvention::zero) {
    return apply_policies(uplinks, {spec}, total_mobiles, denied_mobiles, r_net,
                          convention)[0];
}

} // namespace uplink
