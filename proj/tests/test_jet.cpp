#include <doctest.h>

#include <cmath>
#include <complex>

#include "dwt/jet.hpp"

using namespace dwt;
using cplx = std::complex<double>;

namespace {

// Central finite difference of order (i, j) with step d.
template <class F>
cplx fd(F f, double x, double xi, int i, int j, double d) {
    if (i > 0) return (fd(f, x + d, xi, i - 1, j, d) - fd(f, x - d, xi, i - 1, j, d)) / (2 * d);
    if (j > 0) return (fd(f, x, xi + d, i, j - 1, d) - fd(f, x, xi - d, i, j - 1, d)) / (2 * d);
    return f(x, xi);
}

}  // namespace

TEST_CASE("arithmetic and elementary functions against closed forms") {
    const double x0 = 0.7, xi0 = -0.3;
    const Jet X = Jet::var_x(x0, 4, 4), XI = Jet::var_xi(xi0, 4, 4);
    const Jet f = sin(X) * exp(XI * X);
    for (int j = 0; j <= 3; ++j) {
        // d^j/dxi^j in closed form, x-derivatives by differences.
        auto Fj = [j](double x, double xi) { return cplx(std::sin(x) * std::pow(x, j) * std::exp(xi * x)); };
        for (int i = 0; i <= 2; ++i) CHECK(std::abs(f.derivative(i, j) - fd(Fj, x0, xi0, i, 0, 1e-3)) < 1e-5);
    }

    const Jet g = pow(X + 2.0, 1.5) / (1.0 + XI * XI);
    CHECK(std::abs(g.value() - std::pow(2.7, 1.5) / 1.09) < 1e-14);
    CHECK(std::abs(g.derivative(1, 0) - 1.5 * std::sqrt(2.7) / 1.09) < 1e-13);
    CHECK(std::abs(g.derivative(0, 1) - std::pow(2.7, 1.5) * (-2 * xi0) / (1.09 * 1.09)) < 1e-13);
    CHECK(std::abs(log(exp(X)).derivative(1, 0) - 1.0) < 1e-14);
    CHECK(std::abs(sqrt(X * X).derivative(2, 0)) < 1e-12);
    CHECK(std::abs(ipow(X, 3).derivative(3, 0) - 6.0) < 1e-13);
    CHECK(ipow(X, 3).derivative(4, 0) == cplx(0.0));
}

TEST_CASE("derivatives agree with finite differences at random probes") {
    auto expr = [](const Jet& x, const Jet& xi) { return cos(x) * plateau(xi, 1.0, 2.0) + smooth_step(x * 0.5); };
    auto F = [&](double x, double xi) { return expr(Jet::constant(x, 0, 0), Jet::constant(xi, 0, 0)).value(); };
    // Derivative (a, b) of the sampler at (x, xi), from the jet truncated at that order.
    auto D = [&](double x, double xi, int a, int b) {
        return expr(Jet::var_x(x, a, b), Jet::var_xi(xi, a, b)).derivative(a, b);
    };
    const double probes[][2] = {{0.3, 1.4}, {1.2, -1.7}, {0.9, 1.1}};
    const double d = 1e-3;
    for (const auto& p : probes) {
        const double x = p[0], xi = p[1];
        CHECK(std::abs(D(x, xi, 0, 0) - F(x, xi)) < 1e-15);
        // Each derivative against a Richardson difference of the one below it,
        // so every order is tied back to plain samples.
        for (int a = 0; a <= 3; ++a)
            for (int b = 0; b <= 3; ++b) {
                if (a + b == 0) continue;
                const bool in_x = a > 0;
                const int a0 = in_x ? a - 1 : a, b0 = in_x ? b : b - 1;
                auto g = [&](double t) { return in_x ? D(x + t, xi, a0, b0) : D(x, xi + t, a0, b0); };
                const cplx c1 = (g(d) - g(-d)) / (2 * d), c2 = (g(d / 2) - g(-d / 2)) / d;
                const cplx ref = (4.0 * c2 - c1) / 3.0;
                CHECK(std::abs(D(x, xi, a, b) - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
            }
    }
}

TEST_CASE("transitions") {
    CHECK(smooth_step(-0.1) == 0.0);
    CHECK(smooth_step(0.0) == 0.0);
    CHECK(smooth_step(1.0) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double v = smooth_step(i / 100.0);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(plateau(0.0, 1.0, 2.0) == 1.0);
    CHECK(plateau(-1.0, 1.0, 2.0) == 1.0);
    CHECK(plateau(2.0, 1.0, 2.0) == 0.0);
    CHECK(plateau(-2.5, 1.0, 2.0) == 0.0);
    const double mid = plateau(1.5, 1.0, 2.0);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    // Flat outside the transition: every derivative vanishes.
    const Jet inside = plateau(Jet::var_x(0.5, 5, 0), 1.0, 2.0);
    for (int i = 1; i <= 5; ++i) CHECK(inside.derivative(i, 0) == cplx(0.0));
    CHECK(bump_primitive(Jet::var_x(-0.5, 3, 0)).is_zero());
}

TEST_CASE("structure") {
    const Jet X = Jet::var_x(1.0, 3, 2);
    CHECK(X.order_x() == 3);
    CHECK(X.order_xi() == 2);
    const Jet d = (X * X * X).differentiate(1, 0);
    CHECK(d.order_x() == 2);
    CHECK(std::abs(d.value() - 3.0) < 1e-14);
    CHECK(std::abs((X * X).truncate(1, 0).derivative(1, 0) - 2.0) < 1e-14);
    CHECK(Jet::constant(0.0, 2, 2).is_zero());
}
