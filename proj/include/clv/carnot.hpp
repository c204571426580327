#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "clv/errors.hpp"
#include "clv/rng.hpp"

namespace clv {

inline constexpr int kMaxDim = 32;

using ComposeFn = std::function<void(std::span<const double>, std::span<const double>, std::span<double>)>;
using UnaryFn = std::function<void(std::span<const double>, std::span<double>)>;
// Writes the l x N horizontal frame matrix mu(x), row major.
using FrameFn = std::function<void(std::span<const double>, std::span<double>)>;

// A homogeneous group on R^N with stratified dilations. The first layer
// (dimension l = layer_dims[0]) spans the horizontal directions; coordinate j
// in layer i scales as R^i under dilate(R, .).
struct CarnotGroup {
    std::string name;
    int ambient_dim = 0;            // N
    int step = 0;                   // r
    std::vector<int> layer_dims;    // n_1..n_r, sum = N
    std::vector<int> coord_degree;  // dilation degree of each coordinate
    int hom_dim = 0;                // Q = sum_i i*n_i
    int horizontal_dim = 0;         // l = n_1
    ComposeFn compose_fn;
    UnaryFn inverse_fn;
    FrameFn frame_fn;

    void compose(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
        compose_fn(x, y, out);
    }
    void inverse(std::span<const double> x, std::span<double> out) const { inverse_fn(x, out); }
    void frame(std::span<const double> x, std::span<double> mu) const { frame_fn(x, mu); }

    void dilate(double R, std::span<const double> x, std::span<double> out) const {
        if (!(R > 0.0)) throw ConfigError("dilation factor must be positive");
        for (int j = 0; j < ambient_dim; ++j) out[j] = std::pow(R, coord_degree[j]) * x[j];
    }
};

namespace detail {

inline std::vector<int> degrees_from_layers(const std::vector<int>& layer_dims) {
    std::vector<int> deg;
    for (std::size_t i = 0; i < layer_dims.size(); ++i)
        deg.insert(deg.end(), layer_dims[i], static_cast<int>(i) + 1);
    return deg;
}

inline void finalize_group(CarnotGroup& g) {
    g.ambient_dim = std::accumulate(g.layer_dims.begin(), g.layer_dims.end(), 0);
    g.step = static_cast<int>(g.layer_dims.size());
    g.horizontal_dim = g.layer_dims[0];
    g.coord_degree = degrees_from_layers(g.layer_dims);
    g.hom_dim = 0;
    for (std::size_t i = 0; i < g.layer_dims.size(); ++i)
        g.hom_dim += static_cast<int>(i + 1) * g.layer_dims[i];
    if (g.ambient_dim > kMaxDim) throw ConfigError("ambient dimension exceeds kMaxDim");
}

}  // namespace detail

inline CarnotGroup euclidean_group(int N) {
    if (N < 1) throw ConfigError("euclidean_group: N must be >= 1");
    CarnotGroup g;
    g.name = "euclidean(" + std::to_string(N) + ")";
    g.layer_dims = {N};
    g.compose_fn = [N](std::span<const double> x, std::span<const double> y, std::span<double> out) {
        for (int j = 0; j < N; ++j) out[j] = x[j] + y[j];
    };
    g.inverse_fn = [N](std::span<const double> x, std::span<double> out) {
        for (int j = 0; j < N; ++j) out[j] = -x[j];
    };
    g.frame_fn = [N](std::span<const double>, std::span<double> mu) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) mu[i * N + j] = (i == j) ? 1.0 : 0.0;
    };
    detail::finalize_group(g);
    return g;
}

// Heisenberg group H^n on R^{2n+1}, coordinates (x_1..x_n, y_1..y_n, t).
// Horizontal fields X_i = d/dx_i + 2 y_i d/dt and Y_i = d/dy_i - 2 x_i d/dt.
inline CarnotGroup heisenberg_group(int n) {
    if (n < 1) throw ConfigError("heisenberg_group: n must be >= 1");
    const int N = 2 * n + 1;
    CarnotGroup g;
    g.name = "heisenberg(" + std::to_string(n) + ")";
    g.layer_dims = {2 * n, 1};
    g.compose_fn = [n, N](std::span<const double> a, std::span<const double> b, std::span<double> out) {
        double twist = 0.0;
        for (int i = 0; i < n; ++i) twist += b[i] * a[n + i] - a[i] * b[n + i];
        for (int j = 0; j < N - 1; ++j) out[j] = a[j] + b[j];
        out[N - 1] = a[N - 1] + b[N - 1] + 2.0 * twist;
    };
    g.inverse_fn = [N](std::span<const double> x, std::span<double> out) {
        for (int j = 0; j < N; ++j) out[j] = -x[j];
    };
    g.frame_fn = [n, N](std::span<const double> x, std::span<double> mu) {
        for (int i = 0; i < 2 * n; ++i)
            for (int j = 0; j < N; ++j) mu[i * N + j] = 0.0;
        for (int i = 0; i < n; ++i) {
            mu[i * N + i] = 1.0;                      // X_i: d/dx_i
            mu[i * N + (N - 1)] = 2.0 * x[n + i];     // X_i: +2 y_i d/dt
            mu[(n + i) * N + (n + i)] = 1.0;          // Y_i: d/dy_i
            mu[(n + i) * N + (N - 1)] = -2.0 * x[i];  // Y_i: -2 x_i d/dt
        }
    };
    detail::finalize_group(g);
    return g;
}

inline CarnotGroup custom_group(std::string name, std::vector<int> layer_dims, ComposeFn compose,
                                UnaryFn inverse, FrameFn frame) {
    if (layer_dims.empty()) throw ConfigError("custom_group: empty layer dims");
    for (int d : layer_dims)
        if (d < 1) throw ConfigError("custom_group: layer dims must be positive");
    CarnotGroup g;
    g.name = std::move(name);
    g.layer_dims = std::move(layer_dims);
    g.compose_fn = std::move(compose);
    g.inverse_fn = std::move(inverse);
    g.frame_fn = std::move(frame);
    detail::finalize_group(g);
    return g;
}

// A norm S that is degree-1 homogeneous under the dilations, symmetric under
// inversion and vanishing only at the origin. grad_sup_bound dominates
// |grad_L S| (a degree-0 homogeneous, hence bounded, quantity).
// unit_half_widths gives a Euclidean box containing {S < 1}; the box for
// {S < r} follows by scaling coordinate j with r^degree(j).
struct HomogeneousNorm {
    std::string name;
    std::function<double(std::span<const double>)> value;
    // Optional closed-form horizontal gradient (size l); empty if unavailable.
    std::function<void(std::span<const double>, std::span<double>)> horizontal_gradient;
    double grad_sup_bound = 1.0;
    bool grad_bound_estimated = false;
    std::vector<double> unit_half_widths;

    double operator()(std::span<const double> x) const { return value(x); }

    void box_half_widths(const CarnotGroup& g, double radius, std::span<double> out) const {
        for (int j = 0; j < g.ambient_dim; ++j)
            out[j] = unit_half_widths[j] * std::pow(radius, g.coord_degree[j]);
    }
};

namespace detail {

inline HomogeneousNorm euclidean_norm(int N) {
    HomogeneousNorm s;
    s.name = "euclidean";
    s.value = [N](std::span<const double> x) {
        double acc = 0.0;
        for (int j = 0; j < N; ++j) acc += x[j] * x[j];
        return std::sqrt(acc);
    };
    s.horizontal_gradient = [N](std::span<const double> x, std::span<double> out) {
        double r = 0.0;
        for (int j = 0; j < N; ++j) r += x[j] * x[j];
        r = std::sqrt(r);
        for (int j = 0; j < N; ++j) out[j] = (r > 0.0) ? x[j] / r : 0.0;
    };
    s.grad_sup_bound = 1.0;
    s.unit_half_widths.assign(N, 1.0);
    return s;
}

// Quartic gauge on H^n: S = ((sum x_i^2+y_i^2)^2 + t^2)^{1/4}. Its horizontal
// gradient has |grad_H S| = sqrt(rho)/S <= 1 with rho = sum x_i^2+y_i^2.
inline HomogeneousNorm heisenberg_gauge(int n) {
    const int N = 2 * n + 1;
    HomogeneousNorm s;
    s.name = "gauge";
    s.value = [n, N](std::span<const double> x) {
        double rho = 0.0;
        for (int j = 0; j < 2 * n; ++j) rho += x[j] * x[j];
        const double t = x[N - 1];
        return std::pow(rho * rho + t * t, 0.25);
    };
    s.horizontal_gradient = [n, N](std::span<const double> x, std::span<double> out) {
        double rho = 0.0;
        for (int j = 0; j < 2 * n; ++j) rho += x[j] * x[j];
        const double t = x[N - 1];
        const double s4 = rho * rho + t * t;
        if (s4 == 0.0) {
            for (int i = 0; i < 2 * n; ++i) out[i] = 0.0;
            return;
        }
        const double s3 = std::pow(s4, 0.75);
        for (int i = 0; i < n; ++i) {
            out[i] = (x[i] * rho + x[n + i] * t) / s3;
            out[n + i] = (x[n + i] * rho - x[i] * t) / s3;
        }
    };
    s.grad_sup_bound = 1.0;
    s.unit_half_widths.assign(N, 1.0);
    return s;
}

// Factorial-exponent gauge S = (sum_i |xi^(i)|^{2r!/i})^{1/2r!} for a generic
// stratified group; |xi^(i)| is the Euclidean length of the layer-i block.
inline HomogeneousNorm generic_gauge(const CarnotGroup& g) {
    const int r = g.step;
    double fact = 1.0;
    for (int i = 2; i <= r; ++i) fact *= i;
    const double outer = 2.0 * fact;
    std::vector<int> layer_dims = g.layer_dims;
    HomogeneousNorm s;
    s.name = "generic-gauge";
    s.value = [layer_dims, outer](std::span<const double> x) {
        double acc = 0.0;
        int off = 0;
        for (std::size_t i = 0; i < layer_dims.size(); ++i) {
            double block = 0.0;
            for (int j = 0; j < layer_dims[i]; ++j) block += x[off + j] * x[off + j];
            off += layer_dims[i];
            if (block > 0.0) acc += std::pow(block, 0.5 * outer / static_cast<double>(i + 1));
        }
        return std::pow(acc, 1.0 / outer);
    };
    s.unit_half_widths.assign(g.ambient_dim, 1.0);  // each |coordinate|^{2r!/i} <= S^{2r!}
    s.grad_sup_bound = 1.0;  // replaced by a sampled estimate in gauge_norm()
    s.grad_bound_estimated = true;
    return s;
}

// |grad_L S| at sampled points of the unit sphere {S = 1}, by central
// differences through the frame. Used to bound the degree-0 homogeneous
// quantity |grad_L S| for norms without a closed-form gradient.
inline double sampled_norm_gradient_sup(const CarnotGroup& g, const HomogeneousNorm& s,
                                        std::uint64_t seed, int samples) {
    const int N = g.ambient_dim;
    const int l = g.horizontal_dim;
    const double h = 1e-5;
    Rng rng(seed);
    double x[kMaxDim], xp[kMaxDim], grad[kMaxDim], mu[kMaxDim * kMaxDim];
    double sup = 0.0;
    for (int k = 0; k < samples; ++k) {
        for (int j = 0; j < N; ++j) x[j] = rng.uniform(-1.0, 1.0);
        const double sv = s.value({x, static_cast<std::size_t>(N)});
        if (!(sv > 1e-8)) continue;
        g.dilate(1.0 / sv, {x, static_cast<std::size_t>(N)}, {x, static_cast<std::size_t>(N)});
        for (int j = 0; j < N; ++j) {
            std::copy(x, x + N, xp);
            xp[j] = x[j] + h;
            const double fp = s.value({xp, static_cast<std::size_t>(N)});
            xp[j] = x[j] - h;
            const double fm = s.value({xp, static_cast<std::size_t>(N)});
            grad[j] = (fp - fm) / (2.0 * h);
        }
        g.frame({x, static_cast<std::size_t>(N)}, {mu, static_cast<std::size_t>(l * N)});
        double norm2 = 0.0;
        for (int i = 0; i < l; ++i) {
            double gi = 0.0;
            for (int j = 0; j < N; ++j) gi += mu[i * N + j] * grad[j];
            norm2 += gi * gi;
        }
        sup = std::max(sup, std::sqrt(norm2));
    }
    return sup;
}

}  // namespace detail

// The canonical norm of a built-in group: the Euclidean norm on R^N, the
// quartic gauge on H^n, and the factorial-exponent gauge otherwise. For the
// generic gauge the gradient bound is estimated by sampled maximization with
// a 10% safety inflation and flagged as estimated.
inline HomogeneousNorm gauge_norm(const CarnotGroup& g) {
    if (g.step == 1) return detail::euclidean_norm(g.ambient_dim);
    if (g.name.rfind("heisenberg", 0) == 0 && g.layer_dims.size() == 2 && g.layer_dims[1] == 1)
        return detail::heisenberg_gauge(g.layer_dims[0] / 2);
    HomogeneousNorm s = detail::generic_gauge(g);
    s.grad_sup_bound =
        1.1 * detail::sampled_norm_gradient_sup(g, s, /*seed=*/0x9a7eull, /*samples=*/2000);
    return s;
}

// Gauge ball B_R = {S < R} and annulus A_R = B_{2R} \ closure(B_R).
struct Region {
    enum class Kind { ball, annulus };
    Kind kind = Kind::ball;
    double radius = 1.0;

    static Region ball(double R) {
        if (!(R > 0.0)) throw ConfigError("ball radius must be positive");
        return {Kind::ball, R};
    }
    static Region annulus(double R) {
        if (!(R > 0.0)) throw ConfigError("annulus radius must be positive");
        return {Kind::annulus, R};
    }

    // Radius of the smallest ball containing the region (box construction).
    double outer_radius() const { return kind == Kind::ball ? radius : 2.0 * radius; }

    bool contains(double s_value) const {
        return kind == Kind::ball ? s_value < radius
                                  : (s_value > radius && s_value < 2.0 * radius);
    }
};

}  // namespace clv
