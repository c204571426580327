#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clv/calculus.hpp"
#include "clv/carnot.hpp"
#include "clv/errors.hpp"
#include "clv/estimates.hpp"
#include "clv/field.hpp"
#include "clv/liouville.hpp"
#include "clv/quadrature.hpp"
#include "clv/rng.hpp"

namespace clv {

// Radial supersolution pair u = C_u (1 + S^{p'})^{-s}, v = C_v (1 + S^{q'})^{-t}:
// strictly positive, bounded, decaying to zero, so both essential infima over
// the whole space vanish.
struct RadialAnsatz {
    double s = 0.0, t = 0.0;
    double C_u = 1.0, C_v = 1.0;
    double pprime = 2.0, qprime = 2.0;

    // Exponents of the decay profiles at infinity.
    double decay_u() const { return s * pprime; }
    double decay_v() const { return t * qprime; }
};

// Profile field C (1 + S^m)^{-s} with its closed-form horizontal gradient
// through grad_L S.
inline ScalarField profile_field(const HomogeneousNorm& norm, double C, double m, double s) {
    ScalarField f;
    f.name = "profile(C=" + std::to_string(C) + ",m=" + std::to_string(m) +
             ",s=" + std::to_string(s) + ")";
    // the norm is captured by value so the field owns its dependencies
    f.evaluate = [norm, C, m, s](std::span<const double> x) {
        return C * std::pow(1.0 + std::pow(norm.value(x), m), -s);
    };
    if (norm.horizontal_gradient) {
        f.horizontal_gradient = [norm, C, m, s](std::span<const double> x, std::span<double> out) {
            const double sv = norm.value(x);
            norm.horizontal_gradient(x, out);
            const double factor = sv > 0.0 ? -C * s * m * std::pow(sv, m - 1.0) *
                                                 std::pow(1.0 + std::pow(sv, m), -s - 1.0)
                                           : 0.0;
            for (auto& g : out) g *= factor;
        };
    }
    return f;
}

struct ResidualStats {
    double min_rel_residual_u = 0.0;  // min over the cloud of r_1 / scale
    double min_rel_residual_v = 0.0;
    std::int64_t points = 0;
    bool certified = false;
};

struct SearchOutcome {
    bool found = false;
    RadialAnsatz ansatz;
    ResidualStats stats;
    std::vector<std::string> notes;
};

namespace detail {

// Deterministic cloud spread over log-radial shells S in [1e-2, 1e3].
inline std::vector<std::vector<double>> residual_cloud(const CarnotGroup& g,
                                                       const HomogeneousNorm& s, std::int64_t n,
                                                       std::uint64_t seed) {
    std::vector<std::vector<double>> cloud;
    cloud.reserve(n);
    Rng rng(seed);
    const int N = g.ambient_dim;
    std::vector<double> x(N), scaled(N);
    while (static_cast<std::int64_t>(cloud.size()) < n) {
        for (auto& c : x) c = rng.uniform(-1.0, 1.0);
        const double sv = s.value(x);
        if (!(sv > 1e-6)) continue;
        const double radius = std::pow(10.0, rng.uniform(-2.0, 3.0));
        g.dilate(radius / sv, x, scaled);
        cloud.push_back(scaled);
    }
    return cloud;
}

struct PointData {
    double lap_u = 0.0;  // -Delta_p of the unit-amplitude u profile
    double lap_v = 0.0;
    double pow_v = 0.0;  // (unit v profile)^a
    double pow_u = 0.0;
};

}  // namespace detail

// Pointwise residual certificate of -Delta_p u >= v^a, -Delta_q v >= u^b on a
// sample cloud; residuals are measured relative to max(|flux term|, |source|).
inline ResidualStats certify_residuals(const CarnotGroup& g, const HomogeneousNorm& norm,
                                       const RadialAnsatz& ansatz, double p, double q, double a,
                                       double b, std::int64_t points, std::uint64_t seed,
                                       const FDScheme& scheme = FDScheme{}) {
    const ScalarField u1 = profile_field(norm, 1.0, ansatz.pprime, ansatz.s);
    const ScalarField v1 = profile_field(norm, 1.0, ansatz.qprime, ansatz.t);
    const auto cloud = detail::residual_cloud(g, norm, points, seed);
    ResidualStats stats;
    stats.points = points;
    double worst_u = std::numeric_limits<double>::infinity();
    double worst_v = std::numeric_limits<double>::infinity();
    const double amp_u = std::pow(ansatz.C_u, p - 1.0);
    const double amp_v = std::pow(ansatz.C_v, q - 1.0);
    for (const auto& x : cloud) {
        const double lap_u = -apply_operator(g, power_flux(p), u1, x, scheme) * amp_u;
        const double lap_v = -apply_operator(g, power_flux(q), v1, x, scheme) * amp_v;
        const double src_u = std::pow(ansatz.C_v * v1.evaluate(x), a);
        const double src_v = std::pow(ansatz.C_u * u1.evaluate(x), b);
        const double scale_u = std::max(std::abs(lap_u), std::abs(src_u));
        const double scale_v = std::max(std::abs(lap_v), std::abs(src_v));
        if (scale_u > 0.0) worst_u = std::min(worst_u, (lap_u - src_u) / scale_u);
        if (scale_v > 0.0) worst_v = std::min(worst_v, (lap_v - src_v) / scale_v);
    }
    stats.min_rel_residual_u = worst_u;
    stats.min_rel_residual_v = worst_v;
    stats.certified = worst_u >= -1e-6 && worst_v >= -1e-6;
    return stats;
}

// Grid/continuation search for a certified radial supersolution pair when the
// nonexistence condition fails. Seeds the profile exponents from the scaling
// algebra of the coupled system and picks amplitudes from the measured
// pointwise ratios.
inline SearchOutcome search_counterexample(const CarnotGroup& g, const HomogeneousNorm& norm,
                                           double p, double q, double a, double b,
                                           std::int64_t cloud_points, std::uint64_t seed) {
    const double Q = g.hom_dim;
    const LiouvilleVerdict verdict = hyp_condition(Q, p, q, a, b);
    if (verdict.route == LiouvilleRoute::parabolic_constancy)
        throw ConfigError("counterexample search needs Q > max(p, q)");
    if (verdict.condition_holds)
        throw ConfigError(
            "counterexample search refused: the nonexistence condition holds for these exponents");

    const double pprime = p / (p - 1.0), qprime = q / (q - 1.0);
    const double denom = a * b - (p - 1.0) * (q - 1.0);  // positive when the condition fails
    const double gamma = (a * q + p * (q - 1.0)) / denom;
    const double tau = (b * p + q * (p - 1.0)) / denom;
    const double s0 = gamma / pprime;
    const double t0 = tau / qprime;

    SearchOutcome outcome;
    outcome.notes.push_back("profile exponents seeded at the scaling solution");

    const auto cloud = detail::residual_cloud(g, norm, cloud_points, seed);
    const FDScheme scheme;

    const double factors[] = {1.0, 0.95, 1.05, 0.9, 1.1, 0.8, 1.25};
    for (const double fs : factors) {
        for (const double ft : factors) {
            RadialAnsatz cand;
            cand.s = s0 * fs;
            cand.t = t0 * ft;
            cand.pprime = pprime;
            cand.qprime = qprime;

            const ScalarField up = profile_field(norm, 1.0, pprime, cand.s);
            const ScalarField vp = profile_field(norm, 1.0, qprime, cand.t);
            double m_u = std::numeric_limits<double>::infinity();
            double m_v = std::numeric_limits<double>::infinity();
            bool usable = true;
            for (const auto& x : cloud) {
                const double lap_u = -apply_operator(g, power_flux(p), up, x, scheme);
                const double lap_v = -apply_operator(g, power_flux(q), vp, x, scheme);
                const double pv = std::pow(vp.evaluate(x), a);
                const double pu = std::pow(up.evaluate(x), b);
                if (!(lap_u > 0.0) || !(lap_v > 0.0)) {
                    usable = false;
                    break;
                }
                m_u = std::min(m_u, lap_u / pv);
                m_v = std::min(m_v, lap_v / pu);
            }
            if (!usable || !(m_u > 0.0) || !(m_v > 0.0)) continue;

            // Equal amplitudes C: need C^{p-1} m_u >= C^a and C^{q-1} m_v >= C^b.
            double log_c = 0.0;
            bool have_amp = false;
            if (a > p - 1.0 && b > q - 1.0) {
                log_c = std::min(std::log(m_u) / (a - p + 1.0), std::log(m_v) / (b - q + 1.0)) -
                        0.05;
                have_amp = true;
            }
            std::vector<double> amps;
            if (have_amp) amps.push_back(std::exp(log_c));
            for (const double c : {1.0, 0.5, 0.25, 0.1}) amps.push_back(c);
            for (const double c : amps) {
                if (!(std::pow(c, p - 1.0) * m_u >= std::pow(c, a)) ||
                    !(std::pow(c, q - 1.0) * m_v >= std::pow(c, b)))
                    continue;
                cand.C_u = cand.C_v = c;
                const ResidualStats stats = certify_residuals(g, norm, cand, p, q, a, b,
                                                              cloud_points, seed, scheme);
                if (stats.certified) {
                    outcome.found = true;
                    outcome.ansatz = cand;
                    outcome.stats = stats;
                    outcome.notes.push_back("certified at the first admissible amplitude");
                    return outcome;
                }
            }
        }
    }
    outcome.notes.push_back("search budget exhausted without a certified pair");
    return outcome;
}

}  // namespace clv
