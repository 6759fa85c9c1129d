#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>

#include "dbd/quadrature.hpp"
#include "dbd/random.hpp"
#include "dbd/spline.hpp"
#include "dbd/units.hpp"

using namespace dbd;

TEST_SUITE("numerics") {
    TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
        for (int n : {2, 5, 33, 65}) {
            const QuadratureRule r = gauss_legendre(n);
            REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
            for (int k = 0; k <= 2 * n - 1; k += (n > 5 ? 7 : 1)) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) s += r.weights[static_cast<std::size_t>(i)] * std::pow(r.nodes[static_cast<std::size_t>(i)], k);
                const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
                CHECK(s == doctest::Approx(exact).epsilon(1e-13));
            }
        }
    }

    TEST_CASE("Gaussian-weighted rule reproduces the first moments") {
        const QuadratureRule r = gaussian_weighted_rule(0.1, 0.05, 33);
        const double w = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i) {
            m1 += r.weights[i] * r.nodes[i];
            m2 += r.weights[i] * (r.nodes[i] - 0.1) * (r.nodes[i] - 0.1);
        }
        CHECK(w == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m1 == doctest::Approx(0.1).epsilon(1e-12));
        // Truncation at 5 sigma removes 6e-7 of the mass, slightly narrowing the distribution.
        CHECK(std::sqrt(m2) == doctest::Approx(0.05).epsilon(1e-4));
    }

    TEST_CASE("natural cubic spline is exact for linear data and accurate for smooth data") {
        std::vector<double> x, lin, sine;
        for (int i = 0; i <= 40; ++i) {
            x.push_back(0.1 * i);
            lin.push_back(3.0 * x.back() - 1.0);
            sine.push_back(std::sin(x.back()));
        }
        const CubicSpline<double> a(x, lin), b(x, sine);
        for (double t = 0.05; t < 3.9; t += 0.173) {
            CHECK(a(t) == doctest::Approx(3.0 * t - 1.0).epsilon(1e-13));
            // Interior error of a natural spline on h = 0.1 is O(h^4); ends carry the natural-boundary error.
            if (t > 0.5 && t < 3.5) CHECK(std::abs(b(t) - std::sin(t)) < 1e-5);
        }
        CHECK(b(x[7]) == sine[7]);
    }

    TEST_CASE("spline of complex values interpolates componentwise") {
        std::vector<double> x{0.0, 1.0, 2.0, 3.0};
        std::vector<cplx> y{{0, 1}, {1, 0}, {2, -1}, {3, -2}};
        const CubicSpline<cplx> s(x, y);
        CHECK(std::abs(s(1.5) - cplx(1.5, -0.5)) < 1e-14);
    }

    TEST_CASE("spline rejects non-increasing abscissae") {
        CHECK_THROWS(CubicSpline<double>({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}));
    }

    TEST_CASE("Philox4x32-10 known-answer vectors") {
        using B = Philox4x32::Block;
        CHECK(Philox4x32::generate(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        CHECK(Philox4x32::generate(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
              B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        CHECK(Philox4x32::generate(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
              B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("streams are reproducible and distinct") {
        Philox4x32 a(42), b(42), c(43), d(42, 1);
        for (int i = 0; i < 10; ++i) {
            const double x = a.uniform();
            CHECK(x == b.uniform());
            CHECK(x != c.uniform());
            CHECK(x != d.uniform());
        }
    }

    TEST_CASE("normal draws have unit variance") {
        Philox4x32 r(7);
        const int n = 200000;
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = r.normal();
            s += x;
            ss += x * x;
        }
        CHECK(std::abs(s / n) < 0.01);
        CHECK(std::abs(ss / n - 1.0) < 0.01);
    }

    TEST_CASE("uniform draws stay strictly inside the unit interval") {
        CHECK(uniform_from(0, 0) > 0.0);
        CHECK(uniform_from(0xffffffff, 0xffffffff) < 1.0);
    }
}
