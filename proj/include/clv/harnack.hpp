#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "clv/carnot.hpp"
#include "clv/errors.hpp"
#include "clv/field.hpp"
#include "clv/quadrature.hpp"
#include "clv/rng.hpp"

namespace clv {

// Critical integrability exponent Q(p-1)/(Q-p) of the weak Harnack
// inequality; requires Q > p.
inline double harnack_critical_exponent(double Q, double p) {
    if (!(Q > p))
        throw ConfigError(
            "weak Harnack scans need Q > p; for p >= Q every nonnegative "
            "supersolution is constant and there is nothing to scan");
    return Q * (p - 1.0) / (Q - p);
}

// Midpoint of the admissible interval (0, Q(p-1)/(Q-p)).
inline double default_harnack_sigma(double Q, double p) {
    return 0.5 * harnack_critical_exponent(Q, p);
}

// ((1/|B_R|) int_{B_R} u^sigma)^{1/sigma} / ess inf_{B_{R/2}} u.
// The infimum is the sample-cloud estimator (an upper bound), so the ratio
// is a lower estimate and scans report "no violation found" rather than a
// certified constant.
inline double harnack_ratio(const CarnotGroup& g, const HomogeneousNorm& s, const ScalarField& u,
                            double sigma, double R, const QuadratureBudget& budget) {
    if (!(sigma > 0.0)) throw ConfigError("harnack_ratio: sigma must be positive");
    if (!(R > 0.0)) throw ConfigError("harnack_ratio: R must be positive");

    const ComponentsFn comp = [&](std::span<const double> x, double sv, std::span<double> out) {
        if (sv < R) {
            const double v = u.evaluate(x);
            if (!(v > 0.0))
                throw EvaluationError("harnack_ratio: nonpositive field sample", x);
            out[0] = std::pow(v, sigma);
            out[1] = 1.0;
        } else {
            out[0] = 0.0;
            out[1] = 0.0;
        }
    };
    MeanStats st = sample_components(g, s, R, 2, comp, budget, u.singular_points);
    if (st.mean[1] == 0.0) throw ConfigError("harnack_ratio: no samples in the ball");
    const double moment = st.mean[0] / st.mean[1];
    const double numerator = std::pow(moment, 1.0 / sigma);
    const double denominator =
        ess_inf(g, s, Region::ball(R / 2.0), u, budget.with_seed(derive_seed(budget.seed, 0x1f)));
    if (!(denominator > 0.0))
        throw ConfigError("harnack_ratio: essential infimum estimate is not positive");
    return numerator / denominator;
}

struct HarnackScan {
    double sigma = 0.0;
    double p = 2.0;
    std::vector<double> radii;
    std::vector<double> ratios;
    double empirical_cH = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
};

// Measures the (WH) ratio over a radius grid. sigma <= 0 selects the default
// midpoint exponent. Refuses p >= Q per the constancy theorem for parabolic
// exponents.
inline HarnackScan harnack_scan(const CarnotGroup& g, const HomogeneousNorm& s,
                                const ScalarField& u, double p, double sigma,
                                const std::vector<double>& radii,
                                const QuadratureBudget& budget) {
    const double crit = harnack_critical_exponent(g.hom_dim, p);
    if (sigma <= 0.0) sigma = 0.5 * crit;
    if (!(sigma < crit))
        throw ConfigError("harnack_scan: sigma must lie in (0, Q(p-1)/(Q-p))");
    if (radii.empty()) throw ConfigError("harnack_scan: empty radius grid");

    HarnackScan scan;
    scan.sigma = sigma;
    scan.p = p;
    scan.radii = radii;
    scan.samples = budget.samples;
    scan.seed = budget.seed;
    scan.ratios.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const auto b = budget.with_seed(derive_seed(budget.seed, 0x48 + i));
        scan.ratios.push_back(harnack_ratio(g, s, u, sigma, radii[i], b));
    }
    scan.empirical_cH = *std::max_element(scan.ratios.begin(), scan.ratios.end());
    return scan;
}

struct DensityRow {
    double R = 0.0;
    double ball_fraction = 0.0;
    double annulus_fraction = 0.0;
};

// Sublevel-set density |{u < eps}| relative to B_R and to A_{R/2} for each
// radius. Callers declare ess inf u = 0 over the whole space; under (WH) both
// families of fractions tend to 1.
inline std::vector<DensityRow> density_limit(const CarnotGroup& g, const HomogeneousNorm& s,
                                             const ScalarField& u, double eps,
                                             const std::vector<double>& radii,
                                             const QuadratureBudget& budget) {
    if (!(eps > 0.0)) throw ConfigError("density_limit: eps must be positive");
    std::vector<DensityRow> rows;
    rows.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double R = radii[i];
        DensityRow row;
        row.R = R;
        row.ball_fraction =
            sublevel_fraction(g, s, Region::ball(R), u, eps,
                              budget.with_seed(derive_seed(budget.seed, 0xd0 + 2 * i)));
        row.annulus_fraction =
            sublevel_fraction(g, s, Region::annulus(R / 2.0), u, eps,
                              budget.with_seed(derive_seed(budget.seed, 0xd1 + 2 * i)));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace clv
