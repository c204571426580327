#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "clv/carnot.hpp"
#include "clv/rng.hpp"
#include "oracles.hpp"

using namespace clv;

namespace {

std::vector<double> pt(std::initializer_list<double> v) { return std::vector<double>(v); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("heisenberg group basics") {
    const CarnotGroup h1 = heisenberg_group(1);
    CHECK(h1.ambient_dim == 3);
    CHECK(h1.step == 2);
    CHECK(h1.horizontal_dim == 2);
    CHECK(h1.hom_dim == 4);  // Q = 2n+2

    CHECK_THROWS_AS(heisenberg_group(0), ConfigError);

    SECTION("identity and the quadratic twist") {
        auto a = pt({0, 0, 0}), b = pt({0.3, -1.2, 0.7}), out = pt({0, 0, 0});
        h1.compose(a, b, out);
        CHECK(max_abs_diff(out, b) == 0.0);

        auto e1 = pt({1, 0, 0}), e2 = pt({0, 1, 0});
        h1.compose(e1, e2, out);
        CHECK(out[0] == 1.0);
        CHECK(out[1] == 1.0);
        CHECK(out[2] == -2.0);
    }

    SECTION("inverse composes to the origin") {
        Rng rng(11);
        auto x = pt({0, 0, 0}), ix = x, out = x;
        for (int k = 0; k < 200; ++k) {
            for (auto& v : x) v = rng.uniform(-3.0, 3.0);
            h1.inverse(x, ix);
            h1.compose(x, ix, out);
            for (double v : out) CHECK(std::abs(v) < 1e-14);
        }
    }

    SECTION("dilations scale layers by degree") {
        auto x = pt({1, 1, 1}), out = pt({0, 0, 0});
        h1.dilate(3.0, x, out);
        CHECK(out[0] == 3.0);
        CHECK(out[1] == 3.0);
        CHECK(out[2] == 9.0);
        CHECK_THROWS_AS(h1.dilate(-1.0, x, out), ConfigError);
        CHECK_THROWS_AS(h1.dilate(0.0, x, out), ConfigError);
    }

    SECTION("dilations are group automorphisms") {
        Rng rng(12);
        auto x = pt({0, 0, 0}), y = x, dx = x, dy = x, lhs = x, rhs = x, xy = x;
        for (int k = 0; k < 1000; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            for (auto& v : y) v = rng.uniform(-2.0, 2.0);
            const double R = std::exp(rng.uniform(-2.0, 2.0));
            h1.compose(x, y, xy);
            h1.dilate(R, xy, lhs);
            h1.dilate(R, x, dx);
            h1.dilate(R, y, dy);
            h1.compose(dx, dy, rhs);
            for (int j = 0; j < 3; ++j) {
                const double scale = std::max(1.0, std::abs(lhs[j]));
                CHECK(std::abs(lhs[j] - rhs[j]) <= 1e-12 * scale);
            }
        }
    }

    SECTION("dilate round-trip is the identity") {
        Rng rng(13);
        auto x = pt({0, 0, 0}), d = x, back = x;
        for (int k = 0; k < 100; ++k) {
            for (auto& v : x) v = rng.uniform(-5.0, 5.0);
            const double R = std::exp(rng.uniform(-3.0, 3.0));
            h1.dilate(R, x, d);
            h1.dilate(1.0 / R, d, back);
            for (int j = 0; j < 3; ++j) CHECK(std::abs(back[j] - x[j]) <= 1e-12 * (1 + std::abs(x[j])));
        }
    }
}

TEST_CASE("euclidean group basics") {
    const CarnotGroup e3 = euclidean_group(3);
    CHECK(e3.hom_dim == 3);
    CHECK(e3.step == 1);
    CHECK_THROWS_AS(euclidean_group(0), ConfigError);

    auto x = pt({1, 1, 1}), out = pt({0, 0, 0});
    e3.dilate(2.0, x, out);
    CHECK(out == pt({2, 2, 2}));

    auto mx = x;
    e3.inverse(x, mx);
    e3.compose(x, mx, out);
    CHECK(out == pt({0, 0, 0}));
}

TEST_CASE("homogeneous dimension matches the layer sum") {
    for (int n = 1; n <= 3; ++n) CHECK(heisenberg_group(n).hom_dim == 2 * n + 2);
    for (int N = 1; N <= 5; ++N) CHECK(euclidean_group(N).hom_dim == N);
    // a custom step-3 group only used for bookkeeping checks
    const auto frame = [](std::span<const double>, std::span<double> mu) {
        for (auto& v : mu) v = 0.0;
        mu[0] = 1.0;
        mu[5] = 1.0;
    };
    const auto add = [](std::span<const double> a, std::span<const double> b, std::span<double> o) {
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = a[j] + b[j];
    };
    const auto neg = [](std::span<const double> a, std::span<double> o) {
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = -a[j];
    };
    const CarnotGroup g = custom_group("toy", {2, 1, 1}, add, neg, frame);
    CHECK(g.hom_dim == 2 * 1 + 1 * 2 + 1 * 3);
    CHECK(g.coord_degree == std::vector<int>({1, 1, 2, 3}));
}

TEST_CASE("gauge norm on H^1") {
    const CarnotGroup h1 = heisenberg_group(1);
    const HomogeneousNorm s = gauge_norm(h1);

    CHECK(s(pt({1, 0, 0})) == 1.0);
    CHECK(s(pt({0, 0, 1})) == 1.0);
    CHECK(s(pt({0, 0, 0})) == 0.0);

    SECTION("degree-1 homogeneity") {
        Rng rng(21);
        auto x = pt({0, 0, 0}), d = x;
        for (int k = 0; k < 500; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            const double R = std::exp(rng.uniform(-2.0, 2.0));
            h1.dilate(R, x, d);
            const double lhs = s(d);
            const double rhs = R * s(x);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1e-30, std::abs(rhs)));
        }
    }

    SECTION("inversion symmetry") {
        Rng rng(22);
        auto x = pt({0, 0, 0}), ix = x;
        for (int k = 0; k < 500; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            h1.inverse(x, ix);
            CHECK(s(ix) == Catch::Approx(s(x)).epsilon(1e-14));
        }
    }

    SECTION("matches the hand-derived gauge") {
        Rng rng(23);
        auto x = pt({0, 0, 0});
        for (int k = 0; k < 200; ++k) {
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            CHECK(s(x) == Catch::Approx(oracle::h1_gauge(x[0], x[1], x[2])).epsilon(1e-14));
        }
    }

    SECTION("generic factorial-exponent gauge specializes to the quartic gauge") {
        const HomogeneousNorm gen = detail::generic_gauge(h1);
        Rng rng(24);
        auto x = pt({0, 0, 0});
        for (int k = 0; k < 500; ++k) {
            for (auto& v : x) v = rng.uniform(-3.0, 3.0);
            CHECK(gen.value(x) == Catch::Approx(s(x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("norm equivalence constants near the origin are finite") {
    const CarnotGroup h1 = heisenberg_group(1);
    const HomogeneousNorm s = gauge_norm(h1);
    Rng rng(31);
    auto x = pt({0, 0, 0});
    double c_lower = 0.0, c_upper = 0.0;
    int used = 0;
    for (int k = 0; k < 5000; ++k) {
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        const double sv = s(x);
        if (sv <= 0.0 || sv > 1.0) continue;
        ++used;
        const double euc = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        c_lower = std::max(c_lower, euc / sv);                 // C^{-1}|xi| <= S
        c_upper = std::max(c_upper, sv / std::sqrt(euc));      // S <= C |xi|^{1/r}, r = 2
    }
    REQUIRE(used > 100);
    CHECK(std::isfinite(c_lower));
    CHECK(std::isfinite(c_upper));
    INFO("empirical norm-equivalence constants: " << c_lower << ", " << c_upper);
    CHECK(c_lower > 0.0);
}

TEST_CASE("euclidean gauge norm is the euclidean norm") {
    const CarnotGroup e3 = euclidean_group(3);
    const HomogeneousNorm s = gauge_norm(e3);
    CHECK(s(pt({3, 4, 0})) == Catch::Approx(5.0));
    CHECK(s.grad_sup_bound == 1.0);
    CHECK_FALSE(s.grad_bound_estimated);
}
