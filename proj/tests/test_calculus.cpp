#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "clv/calculus.hpp"
#include "clv/carnot.hpp"
#include "clv/field.hpp"
#include "clv/rng.hpp"
#include "oracles.hpp"

using namespace clv;

namespace {

ScalarField quadratic_field() {
    ScalarField f;
    f.name = "|x|^2";
    f.evaluate = [](std::span<const double> x) {
        double acc = 0.0;
        for (double v : x) acc += v * v;
        return acc;
    };
    return f;
}

// Smooth field with a hand-derived H^1 horizontal gradient for cross-checks:
// u = sin(x) cos(y) + x t.
ScalarField h1_mixed_field() {
    ScalarField f;
    f.name = "mixed";
    f.evaluate = [](std::span<const double> p) {
        return std::sin(p[0]) * std::cos(p[1]) + p[0] * p[2];
    };
    return f;
}

void h1_mixed_gradient(double x, double y, double t, double out[2]) {
    const double ux = std::cos(x) * std::cos(y) + t;
    const double uy = -std::sin(x) * std::sin(y);
    const double ut = x;
    out[0] = ux + 2.0 * y * ut;  // X u
    out[1] = uy - 2.0 * x * ut;  // Y u
}

}  // namespace

TEST_CASE("horizontal gradient on euclidean groups") {
    const CarnotGroup g = euclidean_group(3);
    const FDScheme scheme;
    const ScalarField u = quadratic_field();
    double grad[3];
    const std::vector<double> e1 = {1.0, 0.0, 0.0};
    fd_horizontal_gradient(g, u, e1, scheme, grad);
    CHECK(grad[0] == Catch::Approx(2.0).margin(1e-9));
    CHECK(std::abs(grad[1]) < 1e-12);
    CHECK(std::abs(grad[2]) < 1e-12);

    SECTION("frame consistency: identical to the ambient stencil") {
        Rng rng(3);
        double amb[3], hor[3];
        std::vector<double> x(3);
        for (int k = 0; k < 50; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            fd_ambient_gradient(g, u, x, scheme, amb);
            fd_horizontal_gradient(g, u, x, scheme, hor);
            for (int j = 0; j < 3; ++j) CHECK(hor[j] == amb[j]);
        }
    }
}

TEST_CASE("H^1 horizontal gradient matches hand-derived frames") {
    const CarnotGroup h1 = heisenberg_group(1);
    const FDScheme scheme;

    SECTION("u = t gives (2y, -2x)") {
        ScalarField u;
        u.name = "t";
        u.evaluate = [](std::span<const double> p) { return p[2]; };
        Rng rng(5);
        std::vector<double> x(3);
        double grad[2];
        for (int k = 0; k < 200; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            fd_horizontal_gradient(h1, u, x, scheme, grad);
            CHECK(grad[0] == Catch::Approx(2.0 * x[1]).margin(1e-9));
            CHECK(grad[1] == Catch::Approx(-2.0 * x[0]).margin(1e-9));
        }
    }

    SECTION("gauge gradient: FD vs closed form, |grad S|(1,0,0) = 1") {
        const HomogeneousNorm s = gauge_norm(h1);
        const ScalarField sf = norm_field(s);
        double fd[2], cf[2];
        const std::vector<double> p0 = {1.0, 0.0, 0.0};
        fd_horizontal_gradient(h1, sf, p0, scheme, fd);
        CHECK(std::hypot(fd[0], fd[1]) == Catch::Approx(1.0).margin(1e-8));

        Rng rng(6);
        std::vector<double> x(3);
        for (int k = 0; k < 1000; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            if (s(x) < 0.3) continue;  // keep away from the gauge singularity
            fd_horizontal_gradient(h1, sf, x, scheme, fd);
            oracle::h1_gauge_gradient(x[0], x[1], x[2], cf);
            const double scale = std::max({1e-8, std::abs(cf[0]), std::abs(cf[1])});
            CHECK(std::abs(fd[0] - cf[0]) / scale <= 1e-6);
            CHECK(std::abs(fd[1] - cf[1]) / scale <= 1e-6);
        }
    }

    SECTION("mixed smooth field at 1e3 points, relative error <= 1e-6") {
        const ScalarField u = h1_mixed_field();
        Rng rng(7);
        std::vector<double> x(3);
        double fd[2], cf[2];
        for (int k = 0; k < 1000; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            fd_horizontal_gradient(h1, u, x, scheme, fd);
            h1_mixed_gradient(x[0], x[1], x[2], cf);
            const double scale = std::max({1.0, std::abs(cf[0]), std::abs(cf[1])});
            CHECK(std::abs(fd[0] - cf[0]) / scale <= 1e-6);
            CHECK(std::abs(fd[1] - cf[1]) / scale <= 1e-6);
        }
    }
}

TEST_CASE("closed-form gradients are preferred and consistent") {
    const CarnotGroup h1 = heisenberg_group(1);
    const HomogeneousNorm s = gauge_norm(h1);
    ScalarField sf = norm_field(s);
    REQUIRE(sf.has_gradient());
    const FDScheme scheme;
    Rng rng(8);
    std::vector<double> x(3);
    double used[2], fd[2];
    for (int k = 0; k < 1000; ++k) {
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        if (s(x) < 0.3) continue;
        horizontal_gradient(h1, sf, x, scheme, used);
        fd_horizontal_gradient(h1, sf, x, scheme, fd);
        const double scale = std::max(1e-8, std::hypot(used[0], used[1]));
        for (int j = 0; j < 2; ++j) CHECK(std::abs(used[j] - fd[j]) / scale <= 1e-6);
    }
}

TEST_CASE("second-order convergence of the gradient stencil") {
    const CarnotGroup g = euclidean_group(2);
    ScalarField u;
    u.name = "smooth";
    u.evaluate = [](std::span<const double> x) { return std::sin(x[0]) * std::exp(x[1]); };
    const std::vector<double> p = {0.7, 0.3};
    const double exact = std::cos(0.7) * std::exp(0.3);
    double g1[2], g2[2];
    FDScheme coarse, fine;
    coarse.h0_grad = 1e-2;
    fine.h0_grad = 5e-3;
    fd_horizontal_gradient(g, u, p, coarse, g1);
    fd_horizontal_gradient(g, u, p, fine, g2);
    const double e1 = std::abs(g1[0] - exact);
    const double e2 = std::abs(g2[0] - exact);
    const double factor = e1 / e2;
    CHECK(factor >= 3.5);
    CHECK(factor <= 4.5);
}

TEST_CASE("p-sub-Laplacian") {
    const FDScheme scheme;

    SECTION("Laplacian of |x|^2 is 2N") {
        for (int N : {2, 3, 5}) {
            const CarnotGroup g = euclidean_group(N);
            std::vector<double> x(N, 0.3);
            const double v = p_sublaplacian(g, quadratic_field(), x, 2.0, scheme);
            CHECK(v == Catch::Approx(2.0 * N).margin(1e-6 * N));
        }
    }

    SECTION("radial p-harmonic functions are annihilated") {
        const int N = 3;
        const CarnotGroup g = euclidean_group(N);
        for (const double p : {1.5, 4.0}) {
            const double expo = (p - N) / (p - 1.0);
            ScalarField u;
            u.name = "r^expo";
            u.evaluate = [expo](std::span<const double> x) {
                return std::pow(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), expo);
            };
            Rng rng(17);
            std::vector<double> x(N);
            for (int k = 0; k < 20; ++k) {
                for (auto& v : x) v = rng.uniform(0.5, 1.5);
                const double lap = p_sublaplacian(g, u, x, p, scheme);
                // scale of individual flux-derivative terms
                const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
                const double scale =
                    std::pow(std::abs(expo) * std::pow(r, expo - 1.0), p - 1.0) / r;
                CHECK(std::abs(lap) <= 2e-3 * scale);
                // independent radial oracle agrees on the annihilation
                const double orc = oracle::radial_p_laplacian(
                    [expo](double rr) { return std::pow(rr, expo); }, N, p, r);
                CHECK(std::abs(orc) <= 2e-3 * scale);
            }
        }
    }

    SECTION("gauge fundamental solution on H^1: Delta_H S^{-2} = 0") {
        const CarnotGroup h1 = heisenberg_group(1);
        const HomogeneousNorm s = gauge_norm(h1);
        ScalarField u;
        u.name = "S^-2";
        u.evaluate = [&](std::span<const double> x) { return std::pow(s(x), -2.0); };
        Rng rng(19);
        std::vector<double> x(3);
        int tested = 0;
        while (tested < 30) {
            for (auto& v : x) v = rng.uniform(-1.5, 1.5);
            const double sv = s(x);
            if (sv < 0.8 || sv > 1.3) continue;
            ++tested;
            const double lap = p_sublaplacian(h1, u, x, 2.0, scheme);
            const double scale = u.evaluate(x) / (sv * sv);  // magnitude of each X_i^2 term
            CHECK(std::abs(lap) <= 1e-3 * scale);
            // cross-check with the independent Kohn-Laplacian stencil
            const double orc = oracle::h1_kohn_laplacian_fd(
                [&](double a, double b, double c) {
                    return std::pow(oracle::h1_gauge(a, b, c), -2.0);
                },
                x[0], x[1], x[2]);
            CHECK(std::abs(orc) <= 1e-3 * scale);
        }
    }
}

TEST_CASE("apply_operator") {
    const FDScheme scheme;
    const int N = 3;
    const CarnotGroup g = euclidean_group(N);

    SECTION("identity flux reproduces the Laplacian") {
        OperatorSpec id;
        id.name = "identity";
        id.p = 2.0;
        id.flux = [](std::span<const double>, double, std::span<const double> xi,
                     std::span<double> out) {
            for (std::size_t i = 0; i < xi.size(); ++i) out[i] = xi[i];
        };
        std::vector<double> x = {0.2, -0.4, 0.9};
        CHECK(apply_operator(g, id, quadratic_field(), x, scheme) ==
              Catch::Approx(2.0 * N).margin(1e-5));
    }

    SECTION("power flux reproduces p_sublaplacian to 1e-10 relative") {
        ScalarField u;
        u.name = "smooth";
        u.evaluate = [](std::span<const double> x) {
            return std::sin(x[0]) + std::cos(x[1]) * x[2] + 0.2 * x[0] * x[0];
        };
        Rng rng(23);
        std::vector<double> x(N);
        const double p = 2.7;
        for (int k = 0; k < 100; ++k) {
            for (auto& v : x) v = rng.uniform(-1.0, 1.0);
            const double a = apply_operator(g, power_flux(p), u, x, scheme);
            const double b = p_sublaplacian(g, u, x, p, scheme);
            CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)));
        }
    }

    SECTION("anisotropic constant flux: div(D grad u) = 2 tr(D) for u = |x|^2") {
        const double D[3][3] = {{2.0, 0.3, 0.0}, {0.3, 1.0, -0.2}, {0.0, -0.2, 0.5}};
        OperatorSpec an;
        an.name = "anisotropic";
        an.p = 2.0;
        an.flux = [&D](std::span<const double>, double, std::span<const double> xi,
                       std::span<double> out) {
            for (int i = 0; i < 3; ++i) {
                out[i] = 0.0;
                for (int j = 0; j < 3; ++j) out[i] += D[i][j] * xi[j];
            }
        };
        std::vector<double> x = {0.4, 0.1, -0.3};
        const double trace = D[0][0] + D[1][1] + D[2][2];
        CHECK(apply_operator(g, an, quadratic_field(), x, scheme) ==
              Catch::Approx(2.0 * trace).margin(1e-5));
    }

    SECTION("degenerate gradient with p < 2 is rejected") {
        std::vector<double> origin = {0.0, 0.0, 0.0};
        CHECK_THROWS_AS(p_sublaplacian(g, quadratic_field(), origin, 1.5, scheme),
                        EvaluationError);
    }

    SECTION("NaN stencil propagates as evaluation error") {
        ScalarField bad;
        bad.name = "bad";
        bad.evaluate = [](std::span<const double> x) {
            return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
        };
        std::vector<double> x = {0.499, 0.0, 0.0};
        CHECK_THROWS_AS(p_sublaplacian(g, bad, x, 2.0, scheme), EvaluationError);
    }
}

TEST_CASE("coercivity classification") {
    SECTION("power flux is strongly coercive with unit constants") {
        OperatorSpec op = power_flux(2.5);
        const auto rep = coercivity_check(op, 3, 2000);
        CHECK(rep.strong_holds);
        CHECK(rep.weak_holds);
        CHECK(std::abs(rep.worst_strong_margin) <= 1e-12);
        CHECK(std::abs(rep.worst_chain_margin) <= 1e-12);
    }

    SECTION("zero flux is weakly but not strongly coercive") {
        OperatorSpec op;
        op.name = "zero";
        op.p = 2.0;
        op.flux = [](std::span<const double>, double, std::span<const double>,
                     std::span<double> out) {
            for (auto& v : out) v = 0.0;
        };
        const auto rep = coercivity_check(op, 3, 2000);
        CHECK(rep.weak_holds);
        CHECK_FALSE(rep.strong_holds);
    }

    SECTION("scaled power flux needs rescaled constants") {
        const double p = 2.5;
        const double pprime = p / (p - 1.0);
        OperatorSpec op = power_flux(p);
        auto base = op.flux;
        op.flux = [base](std::span<const double> x, double t, std::span<const double> xi,
                         std::span<double> out) {
            base(x, t, xi, out);
            for (auto& v : out) v *= 2.0;
        };
        op.h = 2.0;
        op.k = std::pow(2.0, 1.0 - pprime);  // |flux|^{p'} = 2^{p'} |xi|^p
        const auto rep = coercivity_check(op, 3, 2000);
        CHECK(rep.strong_holds);
        CHECK(std::abs(rep.worst_chain_margin) <= 1e-9);
    }
}
