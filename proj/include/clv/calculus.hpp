#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clv/carnot.hpp"
#include "clv/errors.hpp"
#include "clv/field.hpp"
#include "clv/rng.hpp"

namespace clv {

// Central-difference scheme. h0_grad drives first derivatives, h0_div the
// nested divergence evaluations. eps_grad floors |grad_L u| inside the flux
// when p < 2 (|xi|^{p-2} xi is continuous at 0 only for p >= 2); 0 selects
// the default rule 1e-12 * (1 + |grad_L u|).
struct FDScheme {
    double h0_grad = 1e-4;
    double h0_div = 1e-3;
    double eps_grad = 0.0;

    double gradient_floor(double grad_norm) const {
        return eps_grad > 0.0 ? eps_grad : 1e-12 * (1.0 + grad_norm);
    }
};

namespace detail {

inline void check_finite(double v, std::span<const double> x, const char* what) {
    if (std::isnan(v) || std::isinf(v)) throw EvaluationError(std::string(what), x);
}

}  // namespace detail

// Ambient central-difference gradient of u at x.
inline void fd_ambient_gradient(const CarnotGroup& g, const ScalarField& u,
                                std::span<const double> x, const FDScheme& scheme,
                                std::span<double> out) {
    const int N = g.ambient_dim;
    double buf[kMaxDim];
    std::copy(x.begin(), x.end(), buf);
    for (int j = 0; j < N; ++j) {
        const double h = scheme.h0_grad;
        buf[j] = x[j] + h;
        const double fp = u.evaluate({buf, static_cast<std::size_t>(N)});
        buf[j] = x[j] - h;
        const double fm = u.evaluate({buf, static_cast<std::size_t>(N)});
        buf[j] = x[j];
        detail::check_finite(fp, x, "stencil evaluation not finite");
        detail::check_finite(fm, x, "stencil evaluation not finite");
        out[j] = (fp - fm) / (2.0 * h);
    }
}

// grad_L u = mu(x) . (ambient gradient), always through the FD stencil.
inline void fd_horizontal_gradient(const CarnotGroup& g, const ScalarField& u,
                                   std::span<const double> x, const FDScheme& scheme,
                                   std::span<double> out) {
    const int N = g.ambient_dim;
    const int l = g.horizontal_dim;
    double grad[kMaxDim], mu[kMaxDim * kMaxDim];
    fd_ambient_gradient(g, u, x, scheme, {grad, static_cast<std::size_t>(N)});
    g.frame(x, {mu, static_cast<std::size_t>(l * N)});
    for (int i = 0; i < l; ++i) {
        double acc = 0.0;
        for (int j = 0; j < N; ++j) acc += mu[i * N + j] * grad[j];
        out[i] = acc;
    }
}

// Horizontal gradient of u at x: the closed form when the field carries one,
// otherwise finite differences through the frame.
inline void horizontal_gradient(const CarnotGroup& g, const ScalarField& u,
                                std::span<const double> x, const FDScheme& scheme,
                                std::span<double> out) {
    if (u.has_gradient()) {
        u.horizontal_gradient(x, out);
        return;
    }
    fd_horizontal_gradient(g, u, x, scheme, out);
}

// Divergence-form flux A(x, t, xi) on the horizontal bundle, with declared
// coercivity class and constants. p' below denotes p/(p-1).
struct OperatorSpec {
    std::string name;
    double p = 2.0;
    std::function<void(std::span<const double>, double, std::span<const double>, std::span<double>)>
        flux;
    enum class Coercivity { strong, weak };
    Coercivity coercivity_class = Coercivity::strong;
    double h = 1.0;
    double k = 1.0;
    bool depends_on_t = false;
};

// A_p(x,t,xi) = |xi|^{p-2} xi, the p-sub-Laplacian flux (h = k = 1, S-p-C).
inline OperatorSpec power_flux(double p) {
    if (!(p > 1.0)) throw ConfigError("power_flux: p must be > 1");
    OperatorSpec op;
    op.name = "power(" + std::to_string(p) + ")";
    op.p = p;
    op.flux = [p](std::span<const double>, double, std::span<const double> xi,
                  std::span<double> out) {
        double norm2 = 0.0;
        for (double v : xi) norm2 += v * v;
        const double norm = std::sqrt(norm2);
        const double scale = (norm > 0.0) ? std::pow(norm, p - 2.0) : 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i) out[i] = scale * xi[i];
    };
    return op;
}

// div_L of x -> A(x, u(x), grad_L u(x)) by nested central differences:
// div_L(h) = div(mu^T h), evaluated coordinatewise with step h0_div.
inline double apply_operator(const CarnotGroup& g, const OperatorSpec& a, const ScalarField& u,
                             std::span<const double> x, const FDScheme& scheme) {
    const int N = g.ambient_dim;
    const int l = g.horizontal_dim;

    if (a.p < 2.0) {  // the flux is singular where the gradient vanishes
        double grad[kMaxDim];
        horizontal_gradient(g, u, x, scheme, {grad, static_cast<std::size_t>(l)});
        double norm2 = 0.0;
        for (int i = 0; i < l; ++i) norm2 += grad[i] * grad[i];
        const double norm = std::sqrt(norm2);
        if (norm <= scheme.gradient_floor(norm))
            throw EvaluationError("degenerate gradient in flux with p < 2", x);
    }

    // G_j(y) = sum_i mu_ij(y) * A_i(y, u(y), grad_L u(y))
    const auto flux_ambient = [&](std::span<const double> y, int j) {
        double grad[kMaxDim], fx[kMaxDim], mu[kMaxDim * kMaxDim];
        horizontal_gradient(g, u, y, scheme, {grad, static_cast<std::size_t>(l)});
        if (a.p < 2.0) {
            double norm2 = 0.0;
            for (int i = 0; i < l; ++i) norm2 += grad[i] * grad[i];
            const double norm = std::sqrt(norm2);
            const double floor = scheme.gradient_floor(norm);
            if (norm <= floor)
                throw EvaluationError("degenerate gradient in flux with p < 2", y);
        }
        const double uv = u.evaluate(y);
        detail::check_finite(uv, y, "field value not finite");
        a.flux(y, uv, {grad, static_cast<std::size_t>(l)}, {fx, static_cast<std::size_t>(l)});
        g.frame(y, {mu, static_cast<std::size_t>(l * N)});
        double acc = 0.0;
        for (int i = 0; i < l; ++i) acc += mu[i * N + j] * fx[i];
        return acc;
    };

    double buf[kMaxDim];
    std::copy(x.begin(), x.end(), buf);
    double div = 0.0;
    const double h = scheme.h0_div;
    for (int j = 0; j < N; ++j) {
        buf[j] = x[j] + h;
        const double gp = flux_ambient({buf, static_cast<std::size_t>(N)}, j);
        buf[j] = x[j] - h;
        const double gm = flux_ambient({buf, static_cast<std::size_t>(N)}, j);
        buf[j] = x[j];
        detail::check_finite(gp, x, "flux stencil not finite");
        detail::check_finite(gm, x, "flux stencil not finite");
        div += (gp - gm) / (2.0 * h);
    }
    return div;
}

// Delta_{G,p} u = div_L(|grad_L u|^{p-2} grad_L u).
inline double p_sublaplacian(const CarnotGroup& g, const ScalarField& u, std::span<const double> x,
                             double p, const FDScheme& scheme) {
    return apply_operator(g, power_flux(p), u, x, scheme);
}

// Worst sampled margins of the coercivity chain
//   A(x,t,xi).xi >= h |xi|^p >= k |A(x,t,xi)|^{p'}.
// A failing margin is data, not an error; margins are reported relative to
// the local scale |xi|^p + |A|^{p'}.
struct CoercivityReport {
    double worst_strong_margin = 0.0;  // min over samples of (A.xi - h|xi|^p) / scale
    double worst_chain_margin = 0.0;   // min of (h|xi|^p - k|A|^{p'}) / scale
    double worst_weak_margin = 0.0;    // min of (A.xi - k|A|^{p'}) / scale
    bool strong_holds = false;
    bool weak_holds = false;
    int samples = 0;
    bool t_dependent = false;
};

inline CoercivityReport coercivity_check(const OperatorSpec& a, int l, int samples,
                                         std::uint64_t seed = 7) {
    if (samples < 1) throw ConfigError("coercivity_check: samples must be >= 1");
    Rng rng(seed);
    const double pprime = a.p / (a.p - 1.0);
    CoercivityReport rep;
    rep.samples = samples;
    rep.t_dependent = a.depends_on_t;
    double worst_s = 1e300, worst_c = 1e300, worst_w = 1e300;
    double x[kMaxDim], xi[kMaxDim], fx[kMaxDim];
    for (int n = 0; n < samples; ++n) {
        for (int j = 0; j < l; ++j) x[j] = rng.uniform(-10.0, 10.0);
        const double t = rng.uniform(-10.0, 10.0);
        const double mag = std::pow(10.0, rng.uniform(-3.0, 3.0));
        double xin = 0.0;
        for (int j = 0; j < l; ++j) {
            xi[j] = mag * rng.uniform(-1.0, 1.0);
            xin += xi[j] * xi[j];
        }
        xin = std::sqrt(xin);
        a.flux({x, static_cast<std::size_t>(l)}, t, {xi, static_cast<std::size_t>(l)},
               {fx, static_cast<std::size_t>(l)});
        double dot = 0.0, an = 0.0;
        for (int j = 0; j < l; ++j) {
            dot += fx[j] * xi[j];
            an += fx[j] * fx[j];
        }
        an = std::sqrt(an);
        const double xip = std::pow(xin, a.p);
        const double ap = std::pow(an, pprime);
        const double scale = std::max(xip + ap, 1e-300);
        worst_s = std::min(worst_s, (dot - a.h * xip) / scale);
        worst_c = std::min(worst_c, (a.h * xip - a.k * ap) / scale);
        worst_w = std::min(worst_w, (dot - a.k * ap) / scale);
    }
    rep.worst_strong_margin = worst_s;
    rep.worst_chain_margin = worst_c;
    rep.worst_weak_margin = worst_w;
    const double tol = -1e-12;
    rep.strong_holds = worst_s >= tol && worst_c >= tol;
    rep.weak_holds = worst_w >= tol;
    return rep;
}

}  // namespace clv
