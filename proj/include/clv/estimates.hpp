#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clv/calculus.hpp"
#include "clv/carnot.hpp"
#include "clv/cutoff.hpp"
#include "clv/errors.hpp"
#include "clv/field.hpp"
#include "clv/harnack.hpp"
#include "clv/quadrature.hpp"
#include "clv/rng.hpp"

namespace clv {

// Nonlinearity evaluated at a point and the two unknowns: (x, u(x), v(x)).
using SourceFn = std::function<double(std::span<const double>, double, double)>;

inline SourceFn zero_source() {
    return [](std::span<const double>, double, double) { return 0.0; };
}

// One system of two coupled divergence-form inequalities together with an
// explicit candidate pair, the radius grid and the sampling budget.
struct SystemInstance {
    CarnotGroup group;
    HomogeneousNorm norm;
    double p = 2.0, q = 2.0;
    ScalarField u, v;
    SourceFn f, g;
    double a = 1.0, b = 1.0;  // growth exponents for the decay estimates
    std::vector<double> radii = {1.0, 2.0, 4.0, 8.0};
    QuadratureBudget budget;
    double kappa = 0.0;  // cutoff steepness; 0 selects max(p,2) / max(q,2)
    // Separable forms of the sources, required by the decay estimates.
    std::function<double(double)> f_of_v;
    std::function<double(double)> g_of_u;
    bool declared_inf_zero_u = false;  // caller-certified ess inf over the whole space
    bool declared_inf_zero_v = false;
    std::optional<OperatorSpec> op_u;  // weak-form fluxes; power flux when absent
    std::optional<OperatorSpec> op_v;
    FDScheme scheme;

    double kappa_for(double expo) const { return kappa > 0.0 ? kappa : default_kappa(expo); }
};

// Constants of the estimate chain, derived from the Young-inequality split.
// young_mu is the second Young parameter (the frame matrix already owns the
// name mu). The default rule eta = (|alpha| p'/2)^{1/p'} gives c1 = |alpha|/2.
struct EstimateConstants {
    double alpha = -1.0, beta = -1.0, ell = 0.0;
    double eta = 1.0, young_mu = 1.0;
    double sigma = 0.0, delta = 0.0;  // moment exponents, in (p-1, crit) resp. (q-1, crit)
    double kappa_u = 2.0, kappa_v = 2.0;
    double cH_u = 1.0, cH_v = 1.0;
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
    double c1t = 0, c2t = 0, c3t = 0, c4t = 0, c5t = 0;

    static double default_eta(double alpha, double p) {
        const double pprime = p / (p - 1.0);
        return std::pow(std::abs(alpha) * pprime / 2.0, 1.0 / pprime);
    }

    // Moment exponent compatible with both the moment bound (needs > p-1)
    // and the weak Harnack range (needs < Q(p-1)/(Q-p)).
    static double chain_sigma(double Q, double p) {
        return 0.5 * ((p - 1.0) + harnack_critical_exponent(Q, p));
    }

    static EstimateConstants for_exponents(const SystemInstance& inst, double alpha, double beta,
                                           double ell, double cH_u, double cH_v) {
        if (!(alpha < 0.0) || !(beta < 0.0))
            throw ConfigError("estimate constants need alpha, beta < 0");
        if (!(ell >= 0.0)) throw ConfigError("estimate constants need ell >= 0");
        EstimateConstants c;
        c.alpha = alpha;
        c.beta = beta;
        c.ell = ell;
        c.cH_u = cH_u;
        c.cH_v = cH_v;
        const double Q = inst.group.hom_dim;
        c.sigma = chain_sigma(Q, inst.p);
        c.delta = chain_sigma(Q, inst.q);
        c.kappa_u = inst.kappa_for(inst.p);
        c.kappa_v = inst.kappa_for(inst.q);
        c.eta = default_eta(alpha, inst.p);
        c.young_mu = default_eta(beta, inst.q);
        c.derive(inst);
        return c;
    }

    static EstimateConstants defaults(const SystemInstance& inst, double cH_u = 1.0,
                                      double cH_v = 1.0) {
        return for_exponents(inst, -1.0, -1.0, 0.0, cH_u, cH_v);
    }

    // Recomputes c1..c5 from (alpha, eta, sigma, ...) and the instance data.
    void derive(const SystemInstance& inst) {
        const double p = inst.p, q = inst.q;
        const double pprime = p / (p - 1.0), qprime = q / (q - 1.0);
        const double Q = inst.group.hom_dim;
        const double grad_bound = inst.norm.grad_sup_bound;
        const double two_Q = std::pow(2.0, Q);

        c1 = std::abs(alpha) - std::pow(eta, pprime) / pprime;
        c2 = std::pow(eta, -p) / p;
        c1t = std::abs(beta) - std::pow(young_mu, qprime) / qprime;
        c2t = std::pow(young_mu, -q) / q;
        if (!(c1 > 0.0) || !(c1t > 0.0))
            throw ConfigError("Young parameters too large: c1 and the tilded c1 must be positive");
        c3 = std::pow(c2 / c1, 1.0 / pprime);
        c3t = std::pow(c2t / c1t, 1.0 / qprime);
        const double cprofile_u = std::pow(kappa_u, p);
        const double cprofile_v = std::pow(kappa_v, q);
        c4 = c3 * (two_Q - 1.0) * cprofile_u * std::pow(grad_bound, p);
        c4t = c3t * (two_Q - 1.0) * cprofile_v * std::pow(grad_bound, q);
        c5 = c4 * std::pow(1.0 - 1.0 / two_Q, (1.0 - p) / sigma) * std::pow(cH_u, p - 1.0);
        c5t = c4t * std::pow(1.0 - 1.0 / two_Q, (1.0 - q) / delta) * std::pow(cH_v, q - 1.0);
    }

    std::map<std::string, double> as_params() const {
        return {{"alpha", alpha}, {"beta", beta},   {"ell", ell},       {"eta", eta},
                {"young_mu", young_mu}, {"sigma", sigma}, {"delta", delta},
                {"kappa_u", kappa_u},   {"kappa_v", kappa_v}, {"cH_u", cH_u}, {"cH_v", cH_v},
                {"c1", c1},   {"c2", c2},   {"c3", c3},   {"c4", c4},   {"c5", c5},
                {"c1t", c1t}, {"c2t", c2t}, {"c3t", c3t}, {"c4t", c4t}, {"c5t", c5t}};
    }
};

enum class Verdict { pass, violation, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::violation: return "violation";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct EstimateRow {
    std::string line;  // which inequality or which unknown the row tests
    double R = 0.0;
    double lhs = 0.0, rhs = 0.0;
    double margin = 0.0;   // rhs - lhs
    double std_error = 0.0;
    std::int64_t samples = 0;
    std::uint64_t seed = 0;
    bool skipped = false;
    std::string note;
};

struct EstimateReport {
    std::string check;
    std::string description;
    Verdict verdict = Verdict::pass;
    std::vector<EstimateRow> rows;
    std::map<std::string, double> params;
    std::vector<std::string> notes;

    // A violation is only claimed at the 3-sigma level; degenerate rows
    // (flagged by notes) leave the verdict inconclusive.
    void finalize() {
        bool any_inconclusive = false;
        bool any_violation = false;
        for (const auto& row : rows) {
            if (row.skipped) continue;
            if (!std::isfinite(row.margin)) {
                any_inconclusive = true;
                continue;
            }
            if (row.margin < -3.0 * row.std_error) any_violation = true;
        }
        verdict = any_violation ? Verdict::violation
                                : (any_inconclusive ? Verdict::inconclusive : Verdict::pass);
    }
};

namespace detail {

// Per-line view of the system: the u-line checks the p-equation on u against
// f, the v-line the q-equation on v against g.
struct LineCtx {
    const SystemInstance* inst = nullptr;
    std::string label;
    const ScalarField* w = nullptr;  // the unknown this line estimates
    const SourceFn* src = nullptr;
    double p = 2.0;
    double alpha = -1.0;
    double kappa = 2.0;
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
    double sigma = 0;
    double cH = 1.0;
    const OperatorSpec* op = nullptr;  // null selects the power flux

    double pprime() const { return p / (p - 1.0); }

    double source_at(std::span<const double> x) const {
        return (*src)(x, inst->u.evaluate(x), inst->v.evaluate(x));
    }
};

inline LineCtx u_line(const SystemInstance& inst, const EstimateConstants& c) {
    LineCtx line;
    line.inst = &inst;
    line.label = "u";
    line.w = &inst.u;
    line.src = &inst.f;
    line.p = inst.p;
    line.alpha = c.alpha;
    line.kappa = c.kappa_u;
    line.c1 = c.c1;
    line.c2 = c.c2;
    line.c3 = c.c3;
    line.c4 = c.c4;
    line.c5 = c.c5;
    line.sigma = c.sigma;
    line.cH = c.cH_u;
    line.op = inst.op_u ? &*inst.op_u : nullptr;
    return line;
}

inline LineCtx v_line(const SystemInstance& inst, const EstimateConstants& c) {
    LineCtx line;
    line.inst = &inst;
    line.label = "v";
    line.w = &inst.v;
    line.src = &inst.g;
    line.p = inst.q;
    line.alpha = c.beta;
    line.kappa = c.kappa_v;
    line.c1 = c.c1t;
    line.c2 = c.c2t;
    line.c3 = c.c3t;
    line.c4 = c.c4t;
    line.c5 = c.c5t;
    line.sigma = c.delta;
    line.cH = c.cH_v;
    line.op = inst.op_v ? &*inst.op_v : nullptr;
    return line;
}

inline std::uint64_t row_seed(const SystemInstance& inst, const char* check, int line_index,
                              std::size_t radius_index) {
    return derive_seed(inst.budget.seed,
                       hash_str(check) ^ (static_cast<std::uint64_t>(line_index) << 40) ^
                           (static_cast<std::uint64_t>(radius_index) << 8));
}

// |grad_L w| and flux(grad_L w) . grad_L phi helpers for the component
// lambdas; closed forms are used when the field carries them.
inline double grad_norm_of(const LineCtx& line, std::span<const double> x) {
    const int l = line.inst->group.horizontal_dim;
    double g[kMaxDim];
    horizontal_gradient(line.inst->group, *line.w, x, line.inst->scheme,
                        {g, static_cast<std::size_t>(l)});
    double acc = 0.0;
    for (int i = 0; i < l; ++i) acc += g[i] * g[i];
    return std::sqrt(acc);
}

inline double flux_dot_phi_grad(const LineCtx& line, const TestFunction& phi,
                                std::span<const double> x) {
    const int l = line.inst->group.horizontal_dim;
    double gw[kMaxDim], gphi[kMaxDim], fx[kMaxDim];
    horizontal_gradient(line.inst->group, *line.w, x, line.inst->scheme,
                        {gw, static_cast<std::size_t>(l)});
    phi.horizontal_gradient(x, {gphi, static_cast<std::size_t>(l)});
    if (line.op) {
        const double wv = line.w->evaluate(x);
        line.op->flux(x, wv, {gw, static_cast<std::size_t>(l)}, {fx, static_cast<std::size_t>(l)});
    } else {
        double n2 = 0.0;
        for (int i = 0; i < l; ++i) n2 += gw[i] * gw[i];
        const double norm = std::sqrt(n2);
        const double scale = norm > 0.0 ? std::pow(norm, line.p - 2.0) : 0.0;
        for (int i = 0; i < l; ++i) fx[i] = scale * gw[i];
    }
    double acc = 0.0;
    for (int i = 0; i < l; ++i) acc += fx[i] * gphi[i];
    return acc;
}

// pow with the convention 0^0 = 1 used by the ell = 0 integrands.
inline double upow(double base, double expo) {
    if (expo == 0.0) return 1.0;
    return std::pow(base, expo);
}

struct DegenerateFlag {
    std::atomic<bool> hit{false};
    void set() { hit.store(true, std::memory_order_relaxed); }
    bool get() const { return hit.load(); }
};

}  // namespace detail

// Weak-form margins int flux(grad w).grad phi - int src phi >= 0 for the
// scaled test functions at every radius of the grid, both lines.
inline EstimateReport check_weak_solution(const SystemInstance& inst) {
    EstimateReport rep;
    rep.check = "weak_form";
    rep.description = "flux tested against the cutoff battery dominates the source integral";
    const EstimateConstants consts = EstimateConstants::defaults(inst);
    const detail::LineCtx lines[2] = {detail::u_line(inst, consts), detail::v_line(inst, consts)};
    for (int li = 0; li < 2; ++li) {
        const auto& line = lines[li];
        for (std::size_t ri = 0; ri < inst.radii.size(); ++ri) {
            const double R = inst.radii[ri];
            const TestFunction phi =
                scaled_test_function(inst.group, inst.norm, make_cutoff(line.p, line.kappa), R);
            const ComponentsFn comp = [&](std::span<const double> x, double sv,
                                          std::span<double> out) {
                if (sv >= 2.0 * R) {
                    out[0] = out[1] = 0.0;
                    return;
                }
                const double pv = phi.value(x);
                out[0] = (sv > R) ? detail::flux_dot_phi_grad(line, phi, x) : 0.0;
                out[1] = pv > 0.0 ? line.source_at(x) * pv : 0.0;
            };
            EstimateRow row;
            row.line = line.label;
            row.R = R;
            row.seed = detail::row_seed(inst, "weak_form", li, ri);
            const MeanStats st =
                sample_components(inst.group, inst.norm, 2.0 * R, 2, comp,
                                  inst.budget.with_seed(row.seed), inst.u.singular_points);
            const double V = st.box_volume;
            const ValueSE margin = delta_method(
                st, [&](std::span<const double> m) { return V * (m[0] - m[1]); });
            row.lhs = V * st.mean[0];
            row.rhs = V * st.mean[1];
            row.margin = margin.value;
            row.std_error = margin.se;
            row.samples = st.draws;
            rep.rows.push_back(row);
        }
    }
    rep.params = consts.as_params();
    rep.finalize();
    return rep;
}

// Energy estimate: int src w_l^a phi + c1 int |grad w|^p w_l^{a-1} phi
//                  <= c2 int w_l^{a-1+p} |grad phi|^p phi^{1-p}.
inline EstimateReport check_caccioppoli(const SystemInstance& inst,
                                        const EstimateConstants& consts) {
    if (!(consts.c1 > 0.0) || !(consts.c1t > 0.0))
        throw ConfigError("caccioppoli check requires positive c1 constants");
    EstimateReport rep;
    rep.check = "caccioppoli";
    rep.description = "energy of the unknown is controlled by cutoff-derivative weights";
    const detail::LineCtx lines[2] = {detail::u_line(inst, consts), detail::v_line(inst, consts)};
    const double ell = consts.ell;
    for (int li = 0; li < 2; ++li) {
        const auto& line = lines[li];
        if (line.alpha - 1.0 + line.p < 0.0 && ell == 0.0)
            throw ConfigError(
                "caccioppoli check needs ell > 0 when alpha - 1 + p < 0 (unbounded integrand)");
        for (std::size_t ri = 0; ri < inst.radii.size(); ++ri) {
            const double R = inst.radii[ri];
            const TestFunction phi =
                scaled_test_function(inst.group, inst.norm, make_cutoff(line.p, line.kappa), R);
            detail::DegenerateFlag degenerate;
            const double e_rhs = line.alpha - 1.0 + line.p;
            const ComponentsFn comp = [&](std::span<const double> x, double sv,
                                          std::span<double> out) {
                out[0] = out[1] = out[2] = 0.0;
                if (sv >= 2.0 * R) return;
                const double pv = phi.value(x);
                const double wl = line.w->evaluate(x) + ell;
                if (wl <= 0.0) {
                    degenerate.set();
                    return;
                }
                if (pv > 0.0) {
                    out[0] = line.source_at(x) * detail::upow(wl, line.alpha) * pv;
                    const double gn = detail::grad_norm_of(line, x);
                    out[1] = std::pow(gn, line.p) * detail::upow(wl, line.alpha - 1.0) * pv;
                }
                const double gr = phi.grad_ratio(x);
                if (gr > 0.0) out[2] = detail::upow(wl, e_rhs) * gr;
            };
            EstimateRow row;
            row.line = line.label;
            row.R = R;
            row.seed = detail::row_seed(inst, "caccioppoli", li, ri);
            const MeanStats st =
                sample_components(inst.group, inst.norm, 2.0 * R, 3, comp,
                                  inst.budget.with_seed(row.seed), inst.u.singular_points);
            const double V = st.box_volume;
            const double c1 = line.c1, c2 = line.c2;
            const ValueSE margin = delta_method(st, [&](std::span<const double> m) {
                return V * (c2 * m[2] - m[0] - c1 * m[1]);
            });
            row.lhs = V * (st.mean[0] + c1 * st.mean[1]);
            row.rhs = V * c2 * st.mean[2];
            row.margin = margin.value;
            row.std_error = margin.se;
            row.samples = st.draws;
            if (degenerate.get()) {
                row.skipped = true;
                row.note = "unbounded integrand: the shifted unknown vanished on a sample";
                rep.notes.push_back("line " + line.label +
                                    ": shifted unknown vanished with a negative exponent");
            }
            rep.rows.push_back(row);
        }
    }
    rep.params = consts.as_params();
    rep.finalize();
    if (!rep.notes.empty() && rep.verdict == Verdict::pass) rep.verdict = Verdict::inconclusive;
    return rep;
}

// Product form: int src phi <= c3 (int w_l^{a-1+p} r_phi)^{1/p'}
//                              (int w_l^{(1-a)(p-1)} r_phi)^{1/p},
// with r_phi the cutoff derivative ratio.
inline EstimateReport check_product_bound(const SystemInstance& inst,
                                          const EstimateConstants& consts) {
    if (!(consts.c1 > 0.0) || !(consts.c1t > 0.0))
        throw ConfigError("product bound requires positive c1 constants");
    EstimateReport rep;
    rep.check = "product_bound";
    rep.description = "source integral against the cutoff is bounded by split annulus energies";
    const detail::LineCtx lines[2] = {detail::u_line(inst, consts), detail::v_line(inst, consts)};
    const double ell = consts.ell;
    for (int li = 0; li < 2; ++li) {
        const auto& line = lines[li];
        for (std::size_t ri = 0; ri < inst.radii.size(); ++ri) {
            const double R = inst.radii[ri];
            const TestFunction phi =
                scaled_test_function(inst.group, inst.norm, make_cutoff(line.p, line.kappa), R);
            detail::DegenerateFlag degenerate;
            const double e1 = line.alpha - 1.0 + line.p;
            const double e2 = (1.0 - line.alpha) * (line.p - 1.0);
            const ComponentsFn comp = [&](std::span<const double> x, double sv,
                                          std::span<double> out) {
                out[0] = out[1] = out[2] = 0.0;
                if (sv >= 2.0 * R) return;
                const double pv = phi.value(x);
                if (pv > 0.0) out[0] = line.source_at(x) * pv;
                const double gr = phi.grad_ratio(x);
                if (gr > 0.0) {
                    const double wl = line.w->evaluate(x) + ell;
                    if (wl <= 0.0 && (e1 < 0.0 || e2 < 0.0)) {
                        degenerate.set();
                        return;
                    }
                    out[1] = detail::upow(wl, e1) * gr;
                    out[2] = detail::upow(wl, e2) * gr;
                }
            };
            EstimateRow row;
            row.line = line.label;
            row.R = R;
            row.seed = detail::row_seed(inst, "product_bound", li, ri);
            const MeanStats st =
                sample_components(inst.group, inst.norm, 2.0 * R, 3, comp,
                                  inst.budget.with_seed(row.seed), inst.u.singular_points);
            const double V = st.box_volume;
            const double c3 = line.c3, pp = line.pprime(), p = line.p;
            const ValueSE margin = delta_method(st, [&](std::span<const double> m) {
                return c3 * std::pow(V * m[1], 1.0 / pp) * std::pow(V * m[2], 1.0 / p) - V * m[0];
            });
            row.lhs = V * st.mean[0];
            row.rhs = c3 * std::pow(V * st.mean[1], 1.0 / pp) * std::pow(V * st.mean[2], 1.0 / p);
            row.margin = margin.value;
            row.std_error = margin.se;
            row.samples = st.draws;
            if (degenerate.get()) {
                row.skipped = true;
                row.note = "unbounded integrand: the shifted unknown vanished on a sample";
            }
            rep.rows.push_back(row);
        }
    }
    rep.params = consts.as_params();
    rep.finalize();
    return rep;
}

// Averaged annulus form: avg_{B_R} src <= c4 R^{-p}
//   (avg_{A_R} w^{a-1+p})^{1/p'} (avg_{A_R} w^{(1-a)(p-1)})^{1/p}.
inline EstimateReport check_annulus_bound(const SystemInstance& inst,
                                          const EstimateConstants& consts) {
    EstimateReport rep;
    rep.check = "annulus_bound";
    rep.description = "ball average of the source against scaled annulus moments";
    const detail::LineCtx lines[2] = {detail::u_line(inst, consts), detail::v_line(inst, consts)};
    for (int li = 0; li < 2; ++li) {
        const auto& line = lines[li];
        const double e1 = line.alpha - 1.0 + line.p;
        const double e2 = (1.0 - line.alpha) * (line.p - 1.0);
        for (std::size_t ri = 0; ri < inst.radii.size(); ++ri) {
            const double R = inst.radii[ri];
            detail::DegenerateFlag degenerate;
            const ComponentsFn comp = [&](std::span<const double> x, double sv,
                                          std::span<double> out) {
                for (int j = 0; j < 5; ++j) out[j] = 0.0;
                if (sv < R) {
                    out[0] = 1.0;
                    out[1] = line.source_at(x);
                } else if (sv > R && sv < 2.0 * R) {
                    out[2] = 1.0;
                    const double wv = line.w->evaluate(x);
                    if (wv <= 0.0 && (e1 < 0.0 || e2 < 0.0)) {
                        degenerate.set();
                        out[2] = 0.0;
                        return;
                    }
                    out[3] = detail::upow(wv, e1);
                    out[4] = detail::upow(wv, e2);
                }
            };
            EstimateRow row;
            row.line = line.label;
            row.R = R;
            row.seed = detail::row_seed(inst, "annulus_bound", li, ri);
            const MeanStats st =
                sample_components(inst.group, inst.norm, 2.0 * R, 5, comp,
                                  inst.budget.with_seed(row.seed), inst.u.singular_points);
            const double c4 = line.c4, pp = line.pprime(), p = line.p;
            const ValueSE margin = delta_method(st, [&](std::span<const double> m) {
                const double lhs = m[1] / m[0];
                const double rhs = c4 * std::pow(R, -p) * std::pow(m[3] / m[2], 1.0 / pp) *
                                   std::pow(m[4] / m[2], 1.0 / p);
                return rhs - lhs;
            });
            row.lhs = st.mean[1] / st.mean[0];
            row.rhs = c4 * std::pow(R, -p) * std::pow(st.mean[3] / st.mean[2], 1.0 / pp) *
                      std::pow(st.mean[4] / st.mean[2], 1.0 / p);
            row.margin = margin.value;
            row.std_error = margin.se;
            row.samples = st.draws;
            if (degenerate.get()) {
                row.skipped = true;
                row.note = "non-integrable sample: unknown vanished with a negative exponent";
            }
            rep.rows.push_back(row);
        }
    }
    rep.params = consts.as_params();
    rep.finalize();
    return rep;
}

// The moment exponent alpha used to reduce the annulus bound to a single
// sigma-moment; valid (negative) whenever sigma > p-1.
inline double moment_alpha(double sigma, double p) {
    if (!(sigma > p - 1.0)) throw ConfigError("moment bound needs sigma > p - 1");
    const double rule = 1.0 - sigma / (p - 1.0);
    return std::max(rule, 1.0 - p);
}

// Moment form: avg_{B_R} src <= c4 R^{-p} (avg_{A_R} w^{sigma})^{(p-1)/sigma}.
// The constants are rebuilt at the moment-compatible alpha.
inline EstimateReport check_moment_bound(const SystemInstance& inst,
                                         const EstimateConstants& consts) {
    const double alpha25 = moment_alpha(consts.sigma, inst.p);
    const double beta25 = moment_alpha(consts.delta, inst.q);
    EstimateConstants mc = EstimateConstants::for_exponents(inst, alpha25, beta25, consts.ell,
                                                            consts.cH_u, consts.cH_v);
    mc.sigma = consts.sigma;
    mc.delta = consts.delta;
    mc.derive(inst);
    EstimateReport rep;
    rep.check = "moment_bound";
    rep.description = "ball average of the source against a single annulus moment";
    const detail::LineCtx lines[2] = {detail::u_line(inst, mc), detail::v_line(inst, mc)};
    for (int li = 0; li < 2; ++li) {
        const auto& line = lines[li];
        for (std::size_t ri = 0; ri < inst.radii.size(); ++ri) {
            const double R = inst.radii[ri];
            const ComponentsFn comp = [&](std::span<const double> x, double sv,
                                          std::span<double> out) {
                for (int j = 0; j < 4; ++j) out[j] = 0.0;
                if (sv < R) {
                    out[0] = 1.0;
                    out[1] = line.source_at(x);
                } else if (sv > R && sv < 2.0 * R) {
                    out[2] = 1.0;
                    out[3] = std::pow(std::max(line.w->evaluate(x), 0.0), line.sigma);
                }
            };
            EstimateRow row;
            row.line = line.label;
            row.R = R;
            row.seed = detail::row_seed(inst, "moment_bound", li, ri);
            const MeanStats st =
                sample_components(inst.group, inst.norm, 2.0 * R, 4, comp,
                                  inst.budget.with_seed(row.seed), inst.u.singular_points);
            const double c4 = line.c4, p = line.p, sg = line.sigma;
            const ValueSE margin = delta_method(st, [&](std::span<const double> m) {
                const double lhs = m[1] / m[0];
                const double rhs =
                    c4 * std::pow(R, -p) * std::pow(m[3] / m[2], (p - 1.0) / sg);
                return rhs - lhs;
            });
            row.lhs = st.mean[1] / st.mean[0];
            row.rhs = c4 * std::pow(R, -p) *
                      std::pow(st.mean[3] / st.mean[2], (p - 1.0) / sg);
            row.margin = margin.value;
            row.std_error = margin.se;
            row.samples = st.draws;
            if (!std::isfinite(row.margin))
                row.note = "margin not finite; moment reduction inconclusive at this radius";
            rep.rows.push_back(row);
        }
    }
    rep.params = mc.as_params();
    rep.params["alpha_moment_u"] = alpha25;
    rep.params["alpha_moment_v"] = beta25;
    rep.finalize();
    return rep;
}

// Infimum form: avg_{B_R} src <= c5 R^{-p} (ess inf_{B_R} w)^{p-1}, with c5
// built from the measured weak-Harnack constant. The scan must contain the
// doubled radius of every grid point.
inline EstimateReport check_infimum_bound(const SystemInstance& inst,
                                          const EstimateConstants& consts,
                                          const HarnackScan& scan_u, const HarnackScan& scan_v) {
    const auto covers = [](const HarnackScan& scan, double R2) {
        for (double r : scan.radii)
            if (std::abs(r - R2) <= 1e-12 * R2) return true;
        return false;
    };
    for (double R : inst.radii) {
        if (!covers(scan_u, 2.0 * R) || !covers(scan_v, 2.0 * R))
            throw ConfigError("infimum bound needs harnack scans covering twice every grid radius");
    }
    EstimateConstants ic = consts;
    ic.cH_u = scan_u.empirical_cH;
    ic.cH_v = scan_v.empirical_cH;
    ic.sigma = scan_u.sigma;
    ic.delta = scan_v.sigma;
    ic.derive(inst);

    EstimateReport rep;
    rep.check = "infimum_bound";
    rep.description =
        "ball average of the source against the scaled infimum, via the measured weak-Harnack "
        "constant (infimum estimated from above; pass claimed up to sampling error)";
    const detail::LineCtx lines[2] = {detail::u_line(inst, ic), detail::v_line(inst, ic)};
    for (int li = 0; li < 2; ++li) {
        const auto& line = lines[li];
        for (std::size_t ri = 0; ri < inst.radii.size(); ++ri) {
            const double R = inst.radii[ri];
            const ComponentsFn comp = [&](std::span<const double> x, double sv,
                                          std::span<double> out) {
                out[0] = out[1] = 0.0;
                if (sv < R) {
                    out[0] = 1.0;
                    out[1] = line.source_at(x);
                }
            };
            EstimateRow row;
            row.line = line.label;
            row.R = R;
            row.seed = detail::row_seed(inst, "infimum_bound", li, ri);
            const MeanStats st =
                sample_components(inst.group, inst.norm, R, 2, comp,
                                  inst.budget.with_seed(row.seed), inst.u.singular_points);
            const double einf =
                ess_inf(inst.group, inst.norm, Region::ball(R), *line.w,
                        inst.budget.with_seed(derive_seed(row.seed, 0xe5)));
            const double c5 = line.c5, p = line.p;
            const ValueSE lhs = delta_method(
                st, [&](std::span<const double> m) { return m[1] / m[0]; });
            row.lhs = lhs.value;
            row.rhs = c5 * std::pow(R, -p) * std::pow(einf, p - 1.0);
            row.margin = row.rhs - row.lhs;
            row.std_error = lhs.se;
            row.samples = st.draws;
            rep.rows.push_back(row);
        }
    }
    rep.params = ic.as_params();
    rep.finalize();
    return rep;
}

}  // namespace clv
