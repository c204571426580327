#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "clv/calculus.hpp"
#include "clv/carnot.hpp"
#include "clv/cutoff.hpp"
#include "clv/rng.hpp"

using namespace clv;

TEST_CASE("cutoff profile") {
    SECTION("plateau, support and the closed-form constant") {
        const Cutoff c = make_cutoff(2.0, 2.0);
        CHECK(c.c_profile == 4.0);
        CHECK(c.value(0.5) == 1.0);
        CHECK(c.value(0.99) == 1.0);
        CHECK(c.value(3.0) == 0.0);
        CHECK(c.value(2.0) == 0.0);
        CHECK(c.value(1.5) == Catch::Approx(0.25));
    }

    SECTION("kappa below p is rejected") {
        CHECK_THROWS_AS(make_cutoff(3.0, 2.0), ConfigError);
        CHECK_THROWS_AS(make_cutoff(0.9, 2.0), ConfigError);
    }

    SECTION("dense scan of the derivative ratio stays under kappa^p") {
        const Cutoff c = make_cutoff(3.0, 3.0);
        double sup = 0.0;
        for (int i = 1; i < 20000; ++i) {
            const double t = 1.0 + i / 20000.0;
            const double phi = c.value(t);
            if (phi <= 0.0) continue;
            sup = std::max(sup, std::pow(std::abs(c.deriv(t)), 3.0) / (phi * phi));
        }
        CHECK(sup <= 27.0 + 1e-9);
        CHECK(sup >= 27.0 - 1e-6);  // ratio is constant when kappa = p
        for (int i = 1; i < 1000; ++i) {
            const double t = 1.0 + i / 1000.0;
            CHECK(c.ratio_power(t) == Catch::Approx(27.0));
        }
    }

    SECTION("ratio_power agrees with the explicit derivative quotient") {
        const Cutoff c = make_cutoff(2.0, 3.5);
        for (int i = 1; i < 1000; ++i) {
            const double t = 1.0 + i / 1000.0;
            const double phi = c.value(t);
            const double direct = std::pow(std::abs(c.deriv(t)), 2.0) / phi;
            CHECK(c.ratio_power(t) == Catch::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("scaled test function") {
    const CarnotGroup h1 = heisenberg_group(1);
    const HomogeneousNorm s = gauge_norm(h1);
    const double R = 2.0;
    const TestFunction phi = scaled_test_function(h1, s, make_cutoff(2.0, 2.0), R);

    CHECK_THROWS_AS(scaled_test_function(h1, s, make_cutoff(2.0, 2.0), 0.0), ConfigError);

    SECTION("plateau and support are exact") {
        Rng rng(41);
        std::vector<double> x(3);
        for (int k = 0; k < 2000; ++k) {
            for (auto& v : x) v = rng.uniform(-6.0, 6.0);
            const double sv = s(x);
            if (sv < R) CHECK(phi.value(x) == 1.0);
            if (sv > 2.0 * R) CHECK(phi.value(x) == 0.0);
        }
        // spec examples: S = R/2 on the plateau, S = 3R outside the support
        std::vector<double> inner = {0.0, 0.0, 1.0};  // S = 1 = R/2
        std::vector<double> outer = {6.0, 0.0, 0.0};  // S = 6 = 3R
        CHECK(phi.value(inner) == 1.0);
        CHECK(phi.value(outer) == 0.0);
    }

    SECTION("pointwise gradient-ratio bound with the norm gradient bound") {
        const double p = 2.0;
        const double bound =
            phi.cutoff().c_profile * std::pow(s.grad_sup_bound, p) * std::pow(R, -p);
        Rng rng(42);
        std::vector<double> x(3);
        int inside = 0;
        while (inside < 3000) {
            for (auto& v : x) v = rng.uniform(-5.0, 5.0);
            const double sv = s(x);
            if (sv <= R || sv >= 2.0 * R) continue;
            ++inside;
            CHECK(phi.grad_ratio(x) <= bound * 1.05);
        }
    }

    SECTION("closed-form gradient matches finite differences of the field") {
        const ScalarField f = phi.as_field();
        const FDScheme scheme;
        Rng rng(43);
        std::vector<double> x(3);
        double cf[2], fd[2];
        int tested = 0;
        while (tested < 300) {
            for (auto& v : x) v = rng.uniform(-5.0, 5.0);
            const double sv = s(x);
            // stay inside the transition shell, clear of its kink surfaces
            if (sv < R * 1.05 || sv > 2.0 * R * 0.95) continue;
            ++tested;
            phi.horizontal_gradient(x, cf);
            fd_horizontal_gradient(h1, f, x, scheme, fd);
            const double scale = std::max(1e-8, std::hypot(cf[0], cf[1]));
            CHECK(std::abs(cf[0] - fd[0]) / scale <= 1e-5);
            CHECK(std::abs(cf[1] - fd[1]) / scale <= 1e-5);
        }
    }
}

TEST_CASE("euclidean FD scan of the ratio bound") {
    const CarnotGroup g = euclidean_group(3);
    const HomogeneousNorm s = gauge_norm(g);
    const double R = 1.0, p = 2.0;
    const TestFunction phi = scaled_test_function(g, s, make_cutoff(p, 2.0), R);
    const ScalarField f = phi.as_field();
    const FDScheme scheme;
    Rng rng(44);
    std::vector<double> x(3);
    double fd[3];
    int inside = 0;
    double sup = 0.0;
    while (inside < 2000) {
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        const double sv = s(x);
        if (sv <= R * 1.01 || sv >= 2.0 * R * 0.99) continue;
        ++inside;
        fd_horizontal_gradient(g, f, x, scheme, fd);
        const double num = fd[0] * fd[0] + fd[1] * fd[1] + fd[2] * fd[2];
        sup = std::max(sup, num / phi.value(x));
    }
    CHECK(sup <= 4.0 * 1.05);  // c_profile * ||grad S||^p * R^{-p} = 4, plus FD slack
}
