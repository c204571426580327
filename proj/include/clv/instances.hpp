#pragma once

#include <cmath>
#include <string>

#include "clv/carnot.hpp"
#include "clv/estimates.hpp"
#include "clv/field.hpp"
#include "clv/sharpness.hpp"

namespace clv {

// Closed-form source -Delta u for the euclidean profile u = C (1+r^2)^{-s}:
//   2 s C (1+r^2)^{-s-2} [ N + (N-2-2s) r^2 ],
// nonnegative everywhere iff s <= (N-2)/2.
inline ScalarField euclidean_profile_source(int N, double C, double s) {
    ScalarField f;
    f.name = "euclidean_profile_source(s=" + std::to_string(s) + ")";
    f.evaluate = [N, C, s](std::span<const double> x) {
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        return 2.0 * s * C * std::pow(1.0 + r2, -s - 2.0) * (N + (N - 2.0 - 2.0 * s) * r2);
    };
    return f;
}

// Closed-form source -Delta_H u for the H^n gauge profile u = C (1+S^4)^{-s}:
//   4 s C rho (1+S^4)^{-s-2} [ (Q+2) + (Q-2-4s) S^4 ],  rho = sum x_i^2+y_i^2,
// nonnegative everywhere iff s <= (Q-2)/4. Smooth: rho and S^4 are polynomial.
inline ScalarField heisenberg_profile_source(int n, double C, double s) {
    const double Q = 2 * n + 2;
    ScalarField f;
    f.name = "heisenberg_profile_source(s=" + std::to_string(s) + ")";
    f.evaluate = [n, Q, C, s](std::span<const double> x) {
        double rho = 0.0;
        for (int j = 0; j < 2 * n; ++j) rho += x[j] * x[j];
        const double t = x[2 * n];
        const double s4 = rho * rho + t * t;
        return 4.0 * s * C * rho * std::pow(1.0 + s4, -s - 2.0) *
               ((Q + 2.0) + (Q - 2.0 - 4.0 * s) * s4);
    };
    return f;
}

inline SourceFn source_from_field(const ScalarField& field) {
    return [field](std::span<const double> x, double, double) { return field.evaluate(x); };
}

// f(x,u,v) = C v^a, with the separable 1-d form attached by the caller.
inline SourceFn power_source_of_v(double a, double C = 1.0) {
    return [a, C](std::span<const double>, double, double v) {
        return C * std::pow(std::max(v, 0.0), a);
    };
}

inline SourceFn power_source_of_u(double b, double C = 1.0) {
    return [b, C](std::span<const double>, double u, double) {
        return C * std::pow(std::max(u, 0.0), b);
    };
}

// u = v = (1+r^2)^{-s} on R^N with the exact sources f = g = -Delta u: the
// weak-form inequalities hold with equality, so every chain margin is a
// theorem-backed nonnegative quantity.
inline SystemInstance manufactured_euclidean_instance(int N, double s,
                                                      const QuadratureBudget& budget) {
    SystemInstance inst;
    inst.group = euclidean_group(N);
    inst.norm = gauge_norm(inst.group);
    inst.p = inst.q = 2.0;
    inst.u = profile_field(inst.norm, 1.0, 2.0, s);
    inst.v = inst.u;
    inst.f = source_from_field(euclidean_profile_source(N, 1.0, s));
    inst.g = inst.f;
    inst.budget = budget;
    inst.declared_inf_zero_u = inst.declared_inf_zero_v = true;
    return inst;
}

inline SystemInstance manufactured_heisenberg_instance(int n, double s,
                                                       const QuadratureBudget& budget) {
    SystemInstance inst;
    inst.group = heisenberg_group(n);
    inst.norm = gauge_norm(inst.group);
    inst.p = inst.q = 2.0;
    inst.u = profile_field(inst.norm, 1.0, 4.0, s);
    inst.v = inst.u;
    inst.f = source_from_field(heisenberg_profile_source(n, 1.0, s));
    inst.g = inst.f;
    inst.budget = budget;
    inst.declared_inf_zero_u = inst.declared_inf_zero_v = true;
    return inst;
}

// u = v = 1 with vanishing sources: all margins reduce to their trivial
// values.
inline SystemInstance trivial_instance(int N, const QuadratureBudget& budget) {
    SystemInstance inst;
    inst.group = euclidean_group(N);
    inst.norm = gauge_norm(inst.group);
    inst.p = inst.q = 2.0;
    inst.u = constant_field(1.0);
    inst.v = constant_field(1.0);
    inst.f = zero_source();
    inst.g = zero_source();
    inst.budget = budget;
    return inst;
}

// Coupled power system -Delta_p u >= v^a, -Delta_q v >= u^b with a certified
// radial pair as the candidate solution.
inline SystemInstance power_system_instance(const CarnotGroup& g, const HomogeneousNorm& norm,
                                            double p, double q, double a, double b,
                                            const RadialAnsatz& ansatz,
                                            const QuadratureBudget& budget) {
    SystemInstance inst;
    inst.group = g;
    inst.norm = norm;
    inst.p = p;
    inst.q = q;
    inst.a = a;
    inst.b = b;
    inst.u = profile_field(norm, ansatz.C_u, ansatz.pprime, ansatz.s);
    inst.v = profile_field(norm, ansatz.C_v, ansatz.qprime, ansatz.t);
    inst.f = power_source_of_v(a);
    inst.g = power_source_of_u(b);
    inst.f_of_v = [a](double t) { return std::pow(t, a); };
    inst.g_of_u = [b](double t) { return std::pow(t, b); };
    inst.budget = budget;
    inst.declared_inf_zero_u = inst.declared_inf_zero_v = true;  // profiles decay to zero
    return inst;
}

}  // namespace clv
