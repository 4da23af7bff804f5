#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gains.hpp"

namespace uplink {

/// SINR threshold for a Shannon-capacity rate in bpcu: beta = 2^R - 1.
inline double rate_to_threshold(double rate_bpcu) { return std::exp2(rate_bpcu) - 1.0; }

/// Inverse mapping: R = log2(1 + beta).
inline double threshold_to_rate(double beta) { return std::log2(1.0 + beta); }

struct OutageQuery {
    LinkEnvironment env;
    double beta = 1.0;  // SINR threshold, linear
    int m0 = 1;         // Nakagami shape of the reference link, integer
};

/// Per-interferer weights Psi_i = (b0 Omega_i/m_i + 1)^(-1), each in (0,1]
/// and equal to 1 exactly when the interferer power is zero.
struct PsiVector {
    std::vector<double> psi;
};

inline PsiVector psi_vector(const LinkEnvironment& env, double beta0) {
    if (!(beta0 >= 0.0)) throw DomainError("psi_vector: beta0 must be >= 0");
    PsiVector out;
    out.psi.reserve(env.interferers.size());
    for (const Interferer& f : env.interferers)
        out.psi.push_back(f.m / (beta0 * f.omega + f.m));
    return out;
}

// The conditional outage probability of a reference uplink with Gamma-fading
// links, all parameters fixed by the realization, is
//
//   eps = 1 - e^(-b0 z) * sum_{s=0}^{m0-1} (b0 z)^s
//             * sum_{t=0}^{s} z^(-t) H_t(Psi) / (s-t)!
//
// with b0 = beta * m0 / omega_ref, z = 1/snr, Psi_i = (b0 Omega_i/m_i + 1)^(-1),
// and H_t the sum over all ways of spending t units across the interferers:
//
//   H_t = sum_{l_1+...+l_n = t} prod_i G_{l_i}(Psi_i)
//   G_0 = 1 - p_i (1 - Psi_i^{m_i})
//   G_l = p_i * C(l+m_i-1, l) * (Omega_i/m_i)^l * Psi_i^{m_i+l},  l > 0.
//
// H_t is exactly the coefficient of x^t in prod_i (sum_l G_l(Psi_i) x^l), so
// it is computed by truncated polynomial multiplication in O(n * m0^2) rather
// than by enumerating compositions. Regrouping the double sum by t gives
//
//   eps = 1 - e^(-b0 z) * sum_t H_t b0^t * E_{m0-1-t}(b0 z),
//   E_k(x) = sum_{u=0}^{k} x^u / u!,
//
// which has no negative powers of z, so the no-noise limit z = 0 is exact.

namespace detail {

// G_0..G_{count-1} for one interferer at a given b0.
inline void g_weights(const Interferer& f, double beta0, double* g, int count) {
    const double m = static_cast<double>(f.m);
    const double psi = m / (beta0 * f.omega + m);
    double psi_m = psi;
    for (int k = 1; k < f.m; ++k) psi_m *= psi;
    g[0] = 1.0 - f.p * (1.0 - psi_m);
    if (count > 1) {
        const double q = psi * f.omega / m;
        double gl = f.p * psi_m * m * q;  // l = 1
        g[1] = gl;
        for (int l = 2; l < count; ++l) {
            gl *= q * (m + l - 1) / l;
            g[l] = gl;
        }
    }
}

// Reduced weights G_l(Psi_i) * beta0^l. Folding beta0 in keeps every
// intermediate bounded for arbitrary input magnitudes: the growth ratio
// q = beta0 Omega / (beta0 Omega + m) lies in [0, 1), and H_t beta0^t <= 1.
inline void g_weights_reduced(const Interferer& f, double beta0, double* g, int count) {
    const double m = static_cast<double>(f.m);
    const double s = beta0 * f.omega;  // rounding to 0 or inf is harmless here
    const double psi = m / (s + m);
    double psi_m = psi;
    for (int k = 1; k < f.m; ++k) psi_m *= psi;
    g[0] = 1.0 - f.p * (1.0 - psi_m);
    if (count > 1) {
        const double q = 1.0 - psi;
        double gl = f.p * psi_m * m * q;  // l = 1
        g[1] = gl;
        for (int l = 2; l < count; ++l) {
            gl *= q * (m + l - 1) / l;
            g[l] = gl;
        }
    }
}

template <void (*Weights)(const Interferer&, double, double*, int)>
inline void h_convolve(const Interferer* interferers, std::size_t n, double beta0, double* H,
                       int count) {
    H[0] = 1.0;
    std::fill(H + 1, H + count, 0.0);
    constexpr int kStack = 8;
    double g[kStack];
    std::vector<double> heap;
    double* gp = g;
    if (count > kStack) {
        heap.resize(count);
        gp = heap.data();
    }
    for (std::size_t i = 0; i < n; ++i) {
        Weights(interferers[i], beta0, gp, count);
        for (int t = count - 1; t >= 0; --t) {
            double acc = H[t] * gp[0];
            for (int l = 1; l <= t; ++l) acc += H[t - l] * gp[l];
            H[t] = acc;
        }
    }
}

inline void h_coefficients(const Interferer* interferers, std::size_t n, double beta0, double* H,
                           int count) {
    h_convolve<&g_weights>(interferers, n, beta0, H, count);
}

} // namespace detail

/// G_l(Psi_i) weight of a single interferer; exposed for validation.
inline double g_ell(const Interferer& f, double beta0, int ell) {
    if (ell < 0) throw DomainError("g_ell: ell must be >= 0");
    constexpr int kStack = 64;
    if (ell < kStack) {
        double g[kStack];
        detail::g_weights(f, beta0, g, ell + 1);
        return g[ell];
    }
    std::vector<double> g(ell + 1);
    detail::g_weights(f, beta0, g.data(), ell + 1);
    return g[ell];
}

/// H_0..H_max_t of the interferer set; exposed for validation.
inline std::vector<double> h_coefficients(const std::vector<Interferer>& interferers,
                                          double beta0, int max_t) {
    if (max_t < 0) throw DomainError("h_coefficients: max_t must be >= 0");
    std::vector<double> H(max_t + 1);
    detail::h_coefficients(interferers.data(), interferers.size(), beta0, H.data(), max_t + 1);
    return H;
}

/// Closed-form conditional outage probability of the reference uplink at SINR
/// threshold beta, averaging over Nakagami fading and interferer activity.
/// The result is clamped to [0,1] only to absorb rounding at the 1e-12 level;
/// excursions beyond 1e-9 raise NumericalInstability.
inline double outage_probability(const LinkEnvironment& env, double beta, int m0) {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw DomainError("outage_probability: beta must be positive and finite");
    if (!(env.omega_ref > 0.0) || !std::isfinite(env.omega_ref))
        throw DomainError("outage_probability: omega_ref must be positive and finite");
    if (m0 < 1 || m0 > 64)
        throw DomainError("outage_probability: m0 must be an integer in [1, 64]");
    if (!(env.snr > 0.0)) throw DomainError("outage_probability: snr must be > 0");

    const double beta0 = beta * m0 / env.omega_ref;  // may overflow for extreme inputs
    const double z = 1.0 / env.snr;  // snr may be +inf, giving the exact z = 0 case
    const double x = z == 0.0 ? 0.0 : beta0 * z;
    // e^(-x) is zero in double from 746 on, and for m0 <= 64 the polynomial
    // factor cannot lift e^(-x) x^t back above double resolution
    if (x >= 746.0) return 1.0;

    constexpr int kStack = 8;
    double stack[kStack];
    std::vector<double> heap;
    double* H = stack;
    if (m0 > kStack) {
        heap.resize(m0);
        H = heap.data();
    }
    // H[t] holds H_t(Psi) * beta0^t, each in [0, 1]
    detail::h_convolve<&detail::g_weights_reduced>(env.interferers.data(),
                                                   env.interferers.size(), beta0, H, m0);

    double series = 0.0;
    for (int t = 0; t < m0; ++t) {
        double ek = 1.0, xu = 1.0;
        for (int u = 1; u <= m0 - 1 - t; ++u) {
            xu *= x / u;
            ek += xu;
        }
        series += H[t] * ek;
    }
    const double eps = 1.0 - std::exp(-x) * series;

    if (!(eps >= -1e-9 && eps <= 1.0 + 1e-9))
        throw NumericalInstability("outage_probability: result " + std::to_string(eps) +
                                   " outside [0,1] beyond rounding tolerance");
    return std::clamp(eps, 0.0, 1.0);
}

inline double outage_probability(const OutageQuery& query) {
    return outage_probability(query.env, query.beta, query.m0);
}

struct OracleEstimate {
    double probability = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo fading simulation of the same SINR event: unit-mean Gamma
/// power gains, Bernoulli interferer activity. Independent of the closed
/// form; used to validate it.
inline OracleEstimate outage_probability_oracle(const LinkEnvironment& env, double beta, int m0,
                                                std::int64_t draws, std::mt19937_64& rng) {
    if (draws < 1) throw DomainError("outage_probability_oracle: draws must be >= 1");
    if (m0 < 1) throw DomainError("outage_probability_oracle: m0 must be a positive integer");

    std::gamma_distribution<double> ref_gain(m0, 1.0 / m0);
    std::vector<std::gamma_distribution<double>> gains;
    gains.reserve(env.interferers.size());
    for (const Interferer& f : env.interferers)
        gains.emplace_back(f.m, 1.0 / f.m);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double z = 1.0 / env.snr;
    std::int64_t outages = 0;
    for (std::int64_t d = 0; d < draws; ++d) {
        double denom = z;
        for (std::size_t i = 0; i < gains.size(); ++i) {
            const double p = env.interferers[i].p;
            if (p <= 0.0) continue;
            if (p >= 1.0 || unit(rng) < p) denom += gains[i](rng) * env.interferers[i].omega;
        }
        // gamma <= beta  <=>  g * omega_ref <= beta * denom (denom = 0 means no outage)
        if (ref_gain(rng) * env.omega_ref <= beta * denom) ++outages;
    }
    const double p_hat = static_cast<double>(outages) / static_cast<double>(draws);
    return OracleEstimate{p_hat, std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(draws))};
}

inline OracleEstimate outage_probability_oracle(const OutageQuery& query, std::int64_t draws,
                                                std::mt19937_64& rng) {
    return outage_probability_oracle(query.env, query.beta, query.m0, draws, rng);
}

/// Agreement z-test between a hypothesized probability and an oracle
/// estimate. The binomial standard error is taken at whichever of the two
/// probabilities gives the wider interval; the plug-in error alone collapses
/// to zero when the empirical frequency saturates at 0 or 1, which would
/// flag a difference of 1e-16 as disagreement.
inline bool oracle_agrees(double hypothesized, const OracleEstimate& est, std::int64_t draws,
                          double z_score = 4.0) {
    const double se_null =
        std::sqrt(hypothesized * (1.0 - hypothesized) / static_cast<double>(draws));
    const double se = std::max(est.std_error, se_null);
    return std::abs(hypothesized - est.probability) <= z_score * se;
}

} // namespace uplink
