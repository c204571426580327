#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "clv/calculus.hpp"
#include "clv/carnot.hpp"
#include "clv/errors.hpp"
#include "clv/field.hpp"

namespace clv {

// Cutoff profile phi0 = psi^kappa with psi(t) = min(1, max(0, 2 - |t|)):
// identically 1 on |t| < 1, 0 on |t| > 2. For kappa >= p the ratio
// |phi0'|^p / phi0^{p-1} = kappa^p psi^{kappa-p} is bounded by
// c_profile = kappa^p; kappa < p would make it blow up as psi -> 0.
struct Cutoff {
    double p = 2.0;
    double kappa = 2.0;
    double c_profile = 4.0;

    static double ramp(double t) { return std::min(1.0, std::max(0.0, 2.0 - std::abs(t))); }
    static double ramp_deriv(double t) {
        const double a = std::abs(t);
        return (a > 1.0 && a < 2.0) ? (t > 0.0 ? -1.0 : 1.0) : 0.0;
    }

    double value(double t) const { return std::pow(ramp(t), kappa); }

    double deriv(double t) const {
        const double psi = ramp(t);
        if (psi <= 0.0 || psi >= 1.0) return 0.0;
        return kappa * std::pow(psi, kappa - 1.0) * ramp_deriv(t);
    }

    // |phi0'(t)|^p / phi0(t)^{p-1}; zero on the plateau and outside the
    // support (the transition endpoints are a null set).
    double ratio_power(double t) const {
        const double psi = ramp(t);
        if (psi <= 0.0 || psi >= 1.0) return 0.0;
        return std::pow(kappa, p) * std::pow(psi, kappa - p);
    }
};

inline Cutoff make_cutoff(double p, double kappa) {
    if (!(p > 1.0)) throw ConfigError("make_cutoff: p must be > 1");
    if (!(kappa >= p))
        throw ConfigError("make_cutoff: kappa must be >= p (ratio unbounded otherwise)");
    Cutoff c;
    c.p = p;
    c.kappa = kappa;
    c.c_profile = std::pow(kappa, p);
    return c;
}

inline double default_kappa(double p) { return std::max(p, 2.0); }

// phi1(x) = phi0(S(delta_{1/R} x)): 1 on B_R, 0 outside B_{2R}, with the
// closed-form pointwise bound
//   |grad_L phi1|^p / phi1^{p-1} <= c_profile * ||grad_L S||_inf^p * R^{-p}.
class TestFunction {
  public:
    TestFunction(const CarnotGroup& g, const HomogeneousNorm& s, Cutoff cutoff, double R)
        : g_(g), s_(s), cutoff_(cutoff), radius_(R) {
        if (!(R > 0.0)) throw ConfigError("scaled_test_function: R must be positive");
    }

    double radius() const { return radius_; }
    const Cutoff& cutoff() const { return cutoff_; }

    double value(std::span<const double> x) const { return cutoff_.value(s_(x) / radius_); }

    // S(delta_{1/R} x) = S(x)/R by degree-1 homogeneity, and the vector
    // grad_L S is degree-0 homogeneous, so both factors can be evaluated at x
    // itself rather than at the dilated point.
    double grad_ratio(std::span<const double> x) const {
        const double t = s_(x) / radius_;
        const double prof = cutoff_.ratio_power(t);
        if (prof == 0.0) return 0.0;
        return prof * std::pow(norm_grad_norm(x) / radius_, cutoff_.p);
    }

    void horizontal_gradient(std::span<const double> x, std::span<double> out) const {
        const double t = s_(x) / radius_;
        const double dphi = cutoff_.deriv(t);
        if (dphi == 0.0) {
            for (auto& v : out) v = 0.0;
            return;
        }
        norm_gradient(x, out);
        for (auto& v : out) v *= dphi / radius_;
    }

    ScalarField as_field() const {
        ScalarField f;
        f.name = "phi(R=" + std::to_string(radius_) + ")";
        const TestFunction self = *this;
        f.evaluate = [self](std::span<const double> x) { return self.value(x); };
        f.horizontal_gradient = [self](std::span<const double> x, std::span<double> out) {
            self.horizontal_gradient(x, out);
        };
        f.smoothness = 0;
        return f;
    }

  private:
    void norm_gradient(std::span<const double> x, std::span<double> out) const {
        if (s_.horizontal_gradient) {
            s_.horizontal_gradient(x, out);
            return;
        }
        fd_horizontal_gradient(g_, norm_field(s_), x, FDScheme{}, out);
    }

    double norm_grad_norm(std::span<const double> x) const {
        double grad[kMaxDim];
        norm_gradient(x, {grad, static_cast<std::size_t>(g_.horizontal_dim)});
        double acc = 0.0;
        for (int i = 0; i < g_.horizontal_dim; ++i) acc += grad[i] * grad[i];
        return std::sqrt(acc);
    }

    CarnotGroup g_;
    HomogeneousNorm s_;
    Cutoff cutoff_;
    double radius_;
};

inline TestFunction scaled_test_function(const CarnotGroup& g, const HomogeneousNorm& s,
                                         Cutoff cutoff, double R) {
    return TestFunction(g, s, cutoff, R);
}

}  // namespace clv
