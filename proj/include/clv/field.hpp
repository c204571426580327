#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clv/carnot.hpp"
#include "clv/errors.hpp"

namespace clv {

// An evaluable function on group points. The optional closed-form horizontal
// gradient (size l) is preferred by the calculus kernels; finite differences
// are the fallback and the cross-check. Declared singular points are masked
// by the quadrature module (exclusion_radius in the budget).
struct ScalarField {
    std::string name;
    std::function<double(std::span<const double>)> evaluate;
    std::function<void(std::span<const double>, std::span<double>)> horizontal_gradient;
    int smoothness = 2;
    std::vector<std::vector<double>> singular_points;

    double operator()(std::span<const double> x) const { return evaluate(x); }

    bool has_gradient() const { return static_cast<bool>(horizontal_gradient); }

    double checked_eval(std::span<const double> x) const {
        const double v = evaluate(x);
        if (std::isnan(v)) throw EvaluationError("field '" + name + "' returned NaN", x);
        return v;
    }
};

inline ScalarField constant_field(double c) {
    ScalarField f;
    f.name = "constant(" + std::to_string(c) + ")";
    f.evaluate = [c](std::span<const double>) { return c; };
    f.horizontal_gradient = [](std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
    };
    f.smoothness = 1000;
    return f;
}

// w(x) = S(x), with the norm's own gradient if available.
inline ScalarField norm_field(const HomogeneousNorm& s) {
    ScalarField f;
    f.name = "norm:" + s.name;
    f.evaluate = s.value;
    if (s.horizontal_gradient) f.horizontal_gradient = s.horizontal_gradient;
    f.smoothness = 1;
    return f;
}

}  // namespace clv
